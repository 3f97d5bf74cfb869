#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dcvae/data.hpp"
#include "dcvae/tensor.hpp"

namespace dcvae {

/// Feature matrix tagged with the split it was extracted from.
struct FeatureSet {
  Tensor values;  ///< [n x dim]
  Split split = Split::train;
};

struct ProbeOptions {
  std::size_t max_iter = 2000;
  double tol = 1e-5;  ///< stop when the gradient norm falls below this
};

/// Multinomial logistic regression on standardised features. No hidden
/// layer and no regularisation.
struct LinearProbe {
  Tensor weight;  ///< [classes x dim]
  Tensor bias;    ///< [classes]
  Tensor feature_mean;
  Tensor feature_scale;
  std::vector<int> classes;  ///< label value of each output row
  std::size_t iterations = 0;
  double grad_norm = 0.0;

  std::vector<int> predict(const Tensor& features) const;
  double accuracy(const Tensor& features, std::span<const int> labels) const;
};

/// Full-batch gradient descent with step 1/L, L the curvature bound of the
/// softmax cross-entropy on the standardised design. Refuses test-split
/// features (ContractError) and single-class labels (ConfigError).
LinearProbe fit_probe(const FeatureSet& features, std::span<const int> labels, std::uint64_t seed,
                      const ProbeOptions& options = {});

}  // namespace dcvae
