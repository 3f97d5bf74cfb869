#include "dcvae/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dcvae/error.hpp"

namespace dcvae {

namespace {

void check_beta(const KernelConfig& cfg) {
  if (!(cfg.beta > 0.0)) throw ConfigError("kernel bandwidth beta must be positive");
}

void check_alpha(const ContrastiveConfig& cfg) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("contrastive margin alpha must be positive");
}

}  // namespace

double gaussian_kernel(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
  check_beta(cfg);
  if (x.size() != y.size()) {
    throw DimensionError("gaussian_kernel: dimensions " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-cfg.beta * d2);
}

Var gaussian_kernel_matrix(const Var& a, const Var& b, const KernelConfig& cfg) {
  check_beta(cfg);
  return exp(scale(sq_dist(a, b), -cfg.beta));
}

Var mmd2(const Var& x, const Var& y, const KernelConfig& cfg) {
  if (x.value().rank() != 2 || y.value().rank() != 2) {
    throw DimensionError("mmd2 expects row-set matrices, got " + shape_str(x.shape()) + " and " + shape_str(y.shape()));
  }
  const Var kxx = mean(gaussian_kernel_matrix(x, x, cfg));
  const Var kxy = mean(gaussian_kernel_matrix(x, y, cfg));
  const Var kyy = mean(gaussian_kernel_matrix(y, y, cfg));
  return add(sub(kxx, scale(kxy, 2.0)), kyy);
}

double mmd2(const Tensor& x, const Tensor& y, const KernelConfig& cfg) {
  if (x.empty() || y.empty()) throw ContractError("mmd2 needs non-empty sample sets");
  Tape tape;
  return mmd2(tape.constant(x), tape.constant(y), cfg).value().item();
}

GroupMmd group_mmd(const Var& z, std::span<const int> labels, const KernelConfig& cfg) {
  if (z.value().rank() != 2 || z.shape()[0] != labels.size()) {
    throw DimensionError("group_mmd: " + std::to_string(labels.size()) + " labels for z of shape " +
                         shape_str(z.shape()));
  }
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];

  GroupMmd out;
  out.groups = counts.size();
  if (out.groups < 2) {
    out.degenerate = true;
    out.value = z.tape().constant(Tensor::scalar(0.0));
    return out;
  }

  // sum_{i<j} mmd2(G_i, G_j) = sum_i (c-1)/n_i^2 sum K_ii - sum_{i!=j} 1/(n_i n_j) sum K_ij
  const double c = static_cast<double>(out.groups);
  const std::size_t n = labels.size();
  Tensor weights({n, n});
  for (std::size_t a = 0; a < n; ++a) {
    const double na = static_cast<double>(counts[labels[a]]);
    for (std::size_t b = 0; b < n; ++b) {
      const double nb = static_cast<double>(counts[labels[b]]);
      weights.at(a, b) = labels[a] == labels[b] ? (c - 1.0) / (na * na) : -1.0 / (na * nb);
    }
  }
  const Var k = gaussian_kernel_matrix(z, z, cfg);
  out.value = sum(mul(k, z.tape().constant(std::move(weights))));
  return out;
}

Var contrastive_loss(const Var& vi, const Var& vj, const Tensor& similar, const ContrastiveConfig& cfg) {
  check_alpha(cfg);
  if (vi.shape() != vj.shape() || vi.value().rank() != 2) {
    throw DimensionError("contrastive_loss: " + shape_str(vi.shape()) + " vs " + shape_str(vj.shape()));
  }
  if (similar.rank() != 1 || similar.numel() != vi.shape()[0]) {
    throw DimensionError("contrastive_loss: similarity labels " + shape_str(similar.shape()) + " for batch " +
                         std::to_string(vi.shape()[0]));
  }
  Tensor dissimilar(similar.shape());
  for (std::size_t i = 0; i < similar.numel(); ++i) dissimilar[i] = 1.0 - similar[i];

  Tape& tape = vi.tape();
  const Var d2 = sum(square(sub(vi, vj)), 1);
  const Var pull = mul(d2, tape.constant(similar));
  const Var push = mul(relu(add_scalar(neg(d2), cfg.alpha)), tape.constant(std::move(dissimilar)));
  return scale(add(pull, push), 0.5);
}

double contrastive_loss(std::span<const double> vi, std::span<const double> vj, bool similar,
                        const ContrastiveConfig& cfg) {
  check_alpha(cfg);
  if (vi.size() != vj.size()) {
    throw DimensionError("contrastive_loss: dimensions " + std::to_string(vi.size()) + " and " +
                         std::to_string(vj.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < vi.size(); ++i) d2 += (vi[i] - vj[i]) * (vi[i] - vj[i]);
  return similar ? 0.5 * d2 : 0.5 * std::max(0.0, cfg.alpha - d2);
}

}  // namespace dcvae
