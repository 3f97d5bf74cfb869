#include "dcvae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

namespace {

std::vector<std::size_t> pick_coords(std::size_t total, const GradCheckOptions& options) {
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), 0);
  if (options.max_coords == 0 || options.max_coords >= total) return all;
  Rng rng(derive_seed(options.seed, Stream::gradcheck));
  std::vector<std::size_t> picked;
  picked.reserve(options.max_coords);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), options.max_coords, rng);
  return picked;
}

double checked_value(const Var& out) {
  if (out.value().numel() != 1) throw ContractError("grad_check: objective is not scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw DomainError("grad_check: objective is not finite");
  return v;
}

void check_eps(double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check: eps must be positive");
}

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic) + std::abs(numeric));
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, const Tensor& x, const GradCheckOptions& options) {
  check_eps(options.eps);
  Tensor analytic;
  {
    Tape tape;
    Var xv = tape.variable(x);
    Var out = f(tape, xv);
    checked_value(out);
    tape.backward(out);
    analytic = tape.grad(xv);
  }
  auto eval = [&](const Tensor& point) {
    Tape tape;
    return checked_value(f(tape, tape.variable(point)));
  };

  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t i : pick_coords(x.numel(), options)) {
    const double orig = probe[i];
    probe[i] = orig + options.eps;
    const double plus = eval(probe);
    probe[i] = orig - options.eps;
    const double minus = eval(probe);
    probe[i] = orig;
    const double err = rel_error(analytic[i], (plus - minus) / (2.0 * options.eps));
    if (err > result.max_rel_error || result.checked == 0) {
      result.max_rel_error = std::max(err, result.max_rel_error);
      result.worst_index = i;
    }
    ++result.checked;
  }
  return result;
}

GradCheckResult grad_check_params(const ParamObjective& f, std::span<Parameter* const> params,
                                  const GradCheckOptions& options) {
  check_eps(options.eps);
  for (Parameter* p : params) p->grad = Tensor(p->value.shape());
  {
    Tape tape;
    Var out = f(tape);
    checked_value(out);
    tape.backward(out);
  }
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (Parameter* p : params) {
    offsets.push_back(total);
    total += p->value.numel();
  }
  auto eval = [&] {
    Tape tape;
    return checked_value(f(tape));
  };

  GradCheckResult result;
  for (std::size_t flat : pick_coords(total, options)) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const std::size_t which = static_cast<std::size_t>(it - offsets.begin()) - 1;
    Parameter& p = *params[which];
    const std::size_t i = flat - offsets[which];
    const double orig = p.value[i];
    p.value[i] = orig + options.eps;
    const double plus = eval();
    p.value[i] = orig - options.eps;
    const double minus = eval();
    p.value[i] = orig;
    const double err = rel_error(p.grad[i], (plus - minus) / (2.0 * options.eps));
    if (err > result.max_rel_error || result.checked == 0) {
      result.max_rel_error = std::max(err, result.max_rel_error);
      result.worst_index = flat;
    }
    ++result.checked;
  }
  return result;
}

}  // namespace dcvae
