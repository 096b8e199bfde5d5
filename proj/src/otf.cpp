#include "expo/otf.hpp"

#include <algorithm>

#include "expo/errors.hpp"

namespace expo {

int select_index(std::span<const double> q) {
  if (q.empty()) throw UsageError("select on empty candidate set");
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i)
    if (q[i] > q[best]) best = i;  // strict: first index wins ties
  return best;
}

CandidateSet propose(const DiffusionPolicy& base, const EditPolicy& edit,
                     const CriticEnsemble& critic, std::span<const double> state,
                     const OtfConfig& cfg, Rng& rng) {
  if (cfg.n < 1) throw ConfigError("candidate pair count must be >= 1");
  const int d = base.action_dim();
  Mat bases = base.sample_batch(state, cfg.n, rng);
  CandidateSet set;
  set.n_pairs = cfg.n;
  if (!cfg.include_edits) {
    set.actions = std::move(bases);
    set.edited.assign(cfg.n, 0);
  } else {
    set.actions = Mat(2 * cfg.n, d);
    set.edited.assign(2 * cfg.n, 0);
    for (int i = 0; i < cfg.n; ++i) {
      auto b = bases.row(i);
      EditSample e = edit.sample_edit(state, b, rng);
      auto ed = edited_action(b, e.edit);
      std::copy(b.begin(), b.end(),
                set.actions.d.begin() + static_cast<std::size_t>(2 * i) * d);
      std::copy(ed.begin(), ed.end(),
                set.actions.d.begin() + static_cast<std::size_t>(2 * i + 1) * d);
      set.edited[static_cast<std::size_t>(2 * i) + 1] = 1;
    }
  }
  Mat states_rep(set.actions.rows, static_cast<int>(state.size()));
  for (int r = 0; r < states_rep.rows; ++r)
    std::copy(state.begin(), state.end(),
              states_rep.d.begin() + static_cast<std::size_t>(r) * states_rep.cols);
  set.q = critic.q_mean_rows(states_rep, set.actions, cfg.q_source == QSource::target_mean);
  return set;
}

OtfDecision select(const CandidateSet& set) {
  int i = select_index(set.q);
  OtfDecision out;
  auto row = set.actions.row(i);
  out.action.assign(row.begin(), row.end());
  out.q = set.q[i];
  out.edited = set.edited[i] != 0;
  return out;
}

OtfDecision act(std::span<const double> state, const DiffusionPolicy& base,
                const EditPolicy& edit, const CriticEnsemble& critic, const OtfConfig& cfg,
                Rng& rng) {
  return select(propose(base, edit, critic, state, cfg, rng));
}

BackupSelection select_backup_actions(const Mat& states, const DiffusionPolicy& base,
                                      const EditPolicy& edit, const CriticEnsemble& critic,
                                      const OtfConfig& cfg, Rng& rng) {
  if (cfg.n < 1) throw ConfigError("candidate pair count must be >= 1");
  if (states.rows == 0) throw UsageError("backup selection on empty batch");
  const int B = states.rows, d = base.action_dim(), N = cfg.n;
  // Each state replicated N times: row i*N + j is state i's j-th sample.
  Mat rep(B * N, states.cols);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < N; ++j)
      std::copy(states.d.begin() + static_cast<std::size_t>(i) * states.cols,
                states.d.begin() + static_cast<std::size_t>(i + 1) * states.cols,
                rep.d.begin() + static_cast<std::size_t>(i * N + j) * states.cols);

  Mat bases = base.sample_rows(rep, rng);
  bool with_edits = cfg.include_edits;
  Mat edits;
  Mat edited_acts;
  if (with_edits) {
    edits = edit.sample_edit_rows(rep, bases, rng);
    edited_acts = Mat(B * N, d);
    for (std::size_t i = 0; i < edited_acts.size(); ++i)
      edited_acts.d[i] = std::clamp(bases.d[i] + edits.d[i], -1.0, 1.0);
  }

  bool use_target = cfg.q_source == QSource::target_mean;
  std::vector<double> q_base = critic.q_mean_rows(rep, bases, use_target);
  std::vector<double> q_edit;
  if (with_edits) q_edit = critic.q_mean_rows(rep, edited_acts, use_target);

  BackupSelection out;
  out.actions = Mat(B, d);
  int edited_wins = 0;
  double q_sum = 0.0;
  for (int i = 0; i < B; ++i) {
    // Scan candidates in the per-state interleaved order [base_j, edited_j].
    double best_q = 0.0;
    int best_row = -1;
    bool best_edited = false;
    for (int j = 0; j < N; ++j) {
      int row = i * N + j;
      if (best_row < 0 || q_base[row] > best_q) {
        best_q = q_base[row];
        best_row = row;
        best_edited = false;
      }
      if (with_edits && q_edit[row] > best_q) {
        best_q = q_edit[row];
        best_row = row;
        best_edited = true;
      }
    }
    const Mat& src = best_edited ? edited_acts : bases;
    std::copy(src.d.begin() + static_cast<std::size_t>(best_row) * d,
              src.d.begin() + static_cast<std::size_t>(best_row + 1) * d,
              out.actions.d.begin() + static_cast<std::size_t>(i) * d);
    q_sum += best_q;
    if (best_edited) ++edited_wins;
  }
  out.mean_q = q_sum / B;
  out.edited_win_frac = static_cast<double>(edited_wins) / B;
  return out;
}

}  // namespace expo
