#pragma once

#include <cstddef>
#include <span>

#include "dcvae/autodiff.hpp"

namespace dcvae {

/// k(x, y) = exp(-beta |x - y|^2)
struct KernelConfig {
  double beta = 1.0;
};

struct ContrastiveConfig {
  double alpha = 1.0;  ///< margin on the squared distance
};

double gaussian_kernel(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

/// Kernel matrix between the rows of a [m x d] and b [n x d].
Var gaussian_kernel_matrix(const Var& a, const Var& b, const KernelConfig& cfg);

/// Biased (V-statistic) squared MMD between row sets x [M x d] and y [N x d]:
///   mean k(x, x') - 2 mean k(x, y) + mean k(y, y')
/// Throws ContractError for an empty set, DimensionError for mismatched d.
Var mmd2(const Var& x, const Var& y, const KernelConfig& cfg);
double mmd2(const Tensor& x, const Tensor& y, const KernelConfig& cfg);

struct GroupMmd {
  Var value;               ///< scalar; constant 0 when degenerate
  std::size_t groups = 0;  ///< number of populated labels
  bool degenerate = false; ///< fewer than two populated labels
};

/// Sum over unordered pairs of distinct populated labels (i, j) of
/// mmd2(rows labelled i, rows labelled j). Evaluated as one weighted sum over
/// the pooled kernel matrix.
GroupMmd group_mmd(const Var& z, std::span<const int> labels, const KernelConfig& cfg);

/// Per-pair contrastive loss on squared distance d2 = |v_i - v_j|^2:
///   e * d2 / 2 + (1 - e) * max(0, alpha - d2) / 2
/// vi, vj: [batch x d]; similar: [batch] of 0/1. Returns [batch].
Var contrastive_loss(const Var& vi, const Var& vj, const Tensor& similar, const ContrastiveConfig& cfg);
double contrastive_loss(std::span<const double> vi, std::span<const double> vj, bool similar,
                        const ContrastiveConfig& cfg);

}  // namespace dcvae
