#include "expo/optim.hpp"

#include <cmath>

#include "expo/errors.hpp"

namespace expo {

AdamState::AdamState(std::size_t n, double learning_rate)
    : lr(learning_rate), m(n, 0.0), v(n, 0.0) {}

void adam_step(AdamState& st, ParamVector& params, const ParamVector& grads) {
  if (!params.same_layout(grads)) throw ConfigError("adam_step: layout mismatch");
  if (st.m.size() != params.size()) throw ConfigError("adam_step: state size mismatch");
  st.step += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    params[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
  }
}

void polyak_update_inplace(ParamVector& target, const ParamVector& online, double tau) {
  if (!target.same_layout(online)) throw ConfigError("polyak_update: layout mismatch");
  if (!(tau > 0.0) || tau > 1.0) throw ConfigError("polyak_update: tau must be in (0, 1]");
  const double keep = 1.0 - tau;
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = keep * target[i] + tau * online[i];
}

ParamVector polyak_update(const ParamVector& target, const ParamVector& online, double tau) {
  ParamVector out = target;
  polyak_update_inplace(out, online, tau);
  return out;
}

}  // namespace expo
