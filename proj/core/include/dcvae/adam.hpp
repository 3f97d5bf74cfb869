#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dcvae/autodiff.hpp"

namespace dcvae {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators, one per parameter, plus the step count.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(std::span<Parameter* const> params);

/// Bias-corrected Adam update from each Parameter::grad:
///   p -= lr * m_hat / (sqrt(v_hat) + eps)
/// An empty state is initialised on first use. Throws DimensionError when the
/// state does not match the parameter list.
void adam_step(std::span<Parameter* const> params, AdamState& state, const AdamConfig& config);

}  // namespace dcvae
