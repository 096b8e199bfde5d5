#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expo/critic.hpp"
#include "expo/diffusion.hpp"
#include "expo/edit.hpp"

namespace expo {

enum class QSource { online_mean, target_mean };

struct OtfConfig {
  int n = 8;                       // candidate pairs
  QSource q_source = QSource::online_mean;
  bool include_edits = true;       // false realizes the edit ablation
};

// Candidates for one state, in selection order. With edits included the rows
// interleave [base_0, edited_0, base_1, edited_1, ...]; without them the rows
// are the N base samples.
struct CandidateSet {
  Mat actions;                       // (2N or N) x action_dim
  std::vector<double> q;             // one value per row
  std::vector<std::uint8_t> edited;  // provenance flag per row
  int n_pairs = 0;

  int size() const { return actions.rows; }
};

// Argmax over the candidate rows; ties break to the lowest index.
int select_index(std::span<const double> q);

struct OtfDecision {
  std::vector<double> action;
  double q = 0.0;
  bool edited = false;
};

CandidateSet propose(const DiffusionPolicy& base, const EditPolicy& edit,
                     const CriticEnsemble& critic, std::span<const double> state,
                     const OtfConfig& cfg, Rng& rng);

OtfDecision select(const CandidateSet& set);

OtfDecision act(std::span<const double> state, const DiffusionPolicy& base,
                const EditPolicy& edit, const CriticEnsemble& critic, const OtfConfig& cfg,
                Rng& rng);

// Backup-time selection for a whole batch of next-states in one sweep: every
// state gets N base samples (one batched reverse process over B*N rows) plus
// their edits, scored by cfg.q_source; the argmax row per state is returned.
struct BackupSelection {
  Mat actions;                  // B x action_dim
  double mean_q = 0.0;          // mean selected Q over the batch
  double edited_win_frac = 0.0; // fraction of rows won by an edited candidate
};

BackupSelection select_backup_actions(const Mat& states, const DiffusionPolicy& base,
                                      const EditPolicy& edit, const CriticEnsemble& critic,
                                      const OtfConfig& cfg, Rng& rng);

}  // namespace expo
