#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "dcvae/autodiff.hpp"

namespace dcvae {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Check at most this many coordinates (0 = all), sampled with `seed`.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  /// max over checked coordinates of |analytic - numeric| / max(1, |analytic| + |numeric|)
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

using ScalarFn = std::function<Var(Tape&, const Var&)>;
using ParamObjective = std::function<Var(Tape&)>;

/// Compares the tape gradient of f at x with central differences.
/// Throws DomainError if f(x) is not finite, ContractError if eps <= 0.
GradCheckResult grad_check(const ScalarFn& f, const Tensor& x, const GradCheckOptions& options = {});

inline double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
  return grad_check(f, x, GradCheckOptions{eps, 0, 0}).max_rel_error;
}

/// Same check with respect to parameter values. The objective is re-run with
/// each perturbed coordinate; parameters are restored before returning.
/// Parameter::grad is overwritten.
GradCheckResult grad_check_params(const ParamObjective& f, std::span<Parameter* const> params,
                                  const GradCheckOptions& options = {});

}  // namespace dcvae
