#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dcvae {

struct GradSuiteOptions {
  double eps = 1e-5;
  /// Coordinates sampled per composite parameter check (0 = all).
  std::size_t composite_coords = 0;
  std::uint64_t seed = 0;
  double primitive_tolerance = 1e-6;
  double composite_tolerance = 1e-4;
};

struct GradSuiteEntry {
  std::string component;
  bool composite = false;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  bool passed = false;
};

/// Central-difference checks of every tape primitive, train-mode batch
/// normalisation, the conditional ELBO, mmd2, group MMD, the contrastive loss
/// (away from its hinge) and the full siamese batch objective, all on toy
/// dimensions.
std::vector<GradSuiteEntry> run_grad_suite(const GradSuiteOptions& options = {});

}  // namespace dcvae
