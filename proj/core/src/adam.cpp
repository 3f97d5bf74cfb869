#include "dcvae/adam.hpp"

#include <cmath>

#include "dcvae/error.hpp"

namespace dcvae {

AdamState make_adam_state(std::span<Parameter* const> params) {
  AdamState state;
  for (const Parameter* p : params) {
    state.m.emplace_back(p->value.shape());
    state.v.emplace_back(p->value.shape());
  }
  return state;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& config) {
  if (state.m.empty() && state.t == 0) state = make_adam_state(params);
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("adam state tracks " + std::to_string(state.m.size()) + " tensors, got " +
                         std::to_string(params.size()) + " parameters");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    if (p.grad.shape() != p.value.shape() || m.shape() != p.value.shape() || v.shape() != p.value.shape()) {
      throw DimensionError("adam_step: shape mismatch for " + p.name);
    }
    const double* g = p.grad.data().data();
    double* mm = m.data().data();
    double* vv = v.data().data();
    double* w = p.value.data().data();
    const std::size_t n = p.value.numel();
    for (std::size_t i = 0; i < n; ++i) {
      mm[i] = config.beta1 * mm[i] + (1.0 - config.beta1) * g[i];
      vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * g[i] * g[i];
      w[i] -= config.learning_rate * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + config.eps);
    }
  }
}

}  // namespace dcvae
