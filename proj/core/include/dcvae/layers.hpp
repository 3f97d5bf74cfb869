#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcvae/autodiff.hpp"

namespace dcvae {

enum class Mode { train, eval };

/// y = x W^T + b with W [out x in] and b [out].
class AffineLayer {
 public:
  AffineLayer() = default;
  /// He-initialised: W ~ N(0, 2/in), b = 0.
  AffineLayer(std::size_t in, std::size_t out, std::uint64_t seed, const std::string& name);
  AffineLayer(Tensor weight, Tensor bias, const std::string& name);

  Var forward(Tape& tape, const Var& x);

  std::size_t in_width() const { return weight.value.cols(); }
  std::size_t out_width() const { return weight.value.rows(); }

  Parameter weight;
  Parameter bias;
};

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;

  friend bool operator==(const BatchNormOptions&, const BatchNormOptions&) = default;
};

/// Per-feature batch normalisation with learned scale (gamma) and shift.
/// Train mode normalises by batch statistics and updates the running
/// estimates (running_var uses the unbiased batch variance); eval mode is a
/// fixed affine map built from the running estimates.
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  BatchNormLayer(std::size_t width, BatchNormOptions options, const std::string& name);

  /// Throws ContractError in train mode when the batch has fewer than 2 rows.
  Var forward(Tape& tape, const Var& x, Mode mode);

  std::size_t width() const { return gamma.value.numel(); }

  Parameter gamma;
  Parameter shift;
  Tensor running_mean;
  Tensor running_var;
  BatchNormOptions options;
};

/// affine -> batchnorm -> relu for every hidden layer, then a final linear
/// affine layer. widths = {in, hidden..., out}; two widths give a single
/// affine layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> widths, std::uint64_t seed, BatchNormOptions bn = {},
      const std::string& name = "mlp");

  Var forward(Tape& tape, const Var& x, Mode mode);

  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t in_width() const { return widths_.front(); }
  std::size_t out_width() const { return widths_.back(); }

  /// Trainable parameters in declaration order (per layer: weight, bias,
  /// then gamma, shift of the following normalisation).
  std::vector<Parameter*> parameters();
  /// Running statistics in declaration order (mean, var per normalisation).
  std::vector<Tensor*> buffers();

  std::vector<AffineLayer>& affine() { return affine_; }
  std::vector<BatchNormLayer>& norms() { return norms_; }

 private:
  std::vector<std::size_t> widths_;
  std::vector<AffineLayer> affine_;
  std::vector<BatchNormLayer> norms_;
};

}  // namespace dcvae
