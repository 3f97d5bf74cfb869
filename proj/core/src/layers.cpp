#include "dcvae/layers.hpp"

#include <cmath>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

AffineLayer::AffineLayer(std::size_t in, std::size_t out, std::uint64_t seed, const std::string& name) {
  if (in == 0 || out == 0) throw DimensionError("affine layer widths must be positive");
  Rng rng(seed);
  weight = Parameter(name + ".weight", normal_tensor({out, in}, rng, std::sqrt(2.0 / static_cast<double>(in))));
  bias = Parameter(name + ".bias", Tensor({out}));
}

AffineLayer::AffineLayer(Tensor w, Tensor b, const std::string& name) {
  if (w.rank() != 2 || b.rank() != 1 || b.numel() != w.rows()) {
    throw DimensionError("affine layer: weight " + shape_str(w.shape()) + " incompatible with bias " +
                         shape_str(b.shape()));
  }
  weight = Parameter(name + ".weight", std::move(w));
  bias = Parameter(name + ".bias", std::move(b));
}

Var AffineLayer::forward(Tape& tape, const Var& x) {
  if (x.value().rank() != 2 || x.shape()[1] != in_width()) {
    throw DimensionError("affine layer " + weight.name + ": expected [batch x " + std::to_string(in_width()) +
                         "], got " + shape_str(x.shape()));
  }
  return add(matmul_bt(x, tape.param(weight)), tape.param(bias));
}

BatchNormLayer::BatchNormLayer(std::size_t w, BatchNormOptions opts, const std::string& name)
    : gamma(name + ".gamma", Tensor({w}, 1.0)),
      shift(name + ".shift", Tensor({w}, 0.0)),
      running_mean({w}, 0.0),
      running_var({w}, 1.0),
      options(opts) {
  if (!(opts.eps > 0.0)) throw ConfigError("batchnorm epsilon must be positive");
  if (!(opts.momentum > 0.0 && opts.momentum < 1.0)) throw ConfigError("batchnorm momentum must lie in (0, 1)");
}

Var BatchNormLayer::forward(Tape& tape, const Var& x, Mode mode) {
  if (x.value().rank() != 2 || x.shape()[1] != width()) {
    throw DimensionError("batchnorm " + gamma.name + ": expected [batch x " + std::to_string(width()) + "], got " +
                         shape_str(x.shape()));
  }
  const Var g = tape.param(gamma);
  const Var s = tape.param(shift);

  if (mode == Mode::eval) {
    Tensor inv_std(running_var.shape());
    for (std::size_t i = 0; i < inv_std.numel(); ++i) inv_std[i] = 1.0 / std::sqrt(running_var[i] + options.eps);
    const Var centred = sub(x, tape.constant(running_mean));
    return add(mul(mul(centred, tape.constant(std::move(inv_std))), g), s);
  }

  const std::size_t batch = x.shape()[0];
  if (batch < 2) throw ContractError("batchnorm in train mode needs a batch of at least 2 rows");

  const Var mu = mean(x, 0);
  const Var centred = sub(x, mu);
  const Var var = mean(square(centred), 0);
  const Var inv_std = exp(scale(log(add_scalar(var, options.eps)), -0.5));
  const Var out = add(mul(mul(centred, inv_std), g), s);

  const double m = options.momentum;
  const double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
  for (std::size_t i = 0; i < width(); ++i) {
    running_mean[i] = (1.0 - m) * running_mean[i] + m * mu.value()[i];
    running_var[i] = (1.0 - m) * running_var[i] + m * var.value()[i] * unbias;
  }
  return out;
}

Mlp::Mlp(std::vector<std::size_t> widths, std::uint64_t seed, BatchNormOptions bn, const std::string& name)
    : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("an MLP needs at least input and output widths");
  for (auto w : widths_) {
    if (w == 0) throw ConfigError("MLP widths must be positive");
  }
  const std::size_t layers = widths_.size() - 1;
  affine_.reserve(layers);
  norms_.reserve(layers - 1);
  for (std::size_t i = 0; i < layers; ++i) {
    affine_.emplace_back(widths_[i], widths_[i + 1], derive_seed(seed, Stream::init, i),
                         name + ".fc" + std::to_string(i));
    if (i + 1 < layers) norms_.emplace_back(widths_[i + 1], bn, name + ".bn" + std::to_string(i));
  }
}

Var Mlp::forward(Tape& tape, const Var& x, Mode mode) {
  Var h = x;
  for (std::size_t i = 0; i < affine_.size(); ++i) {
    h = affine_[i].forward(tape, h);
    if (i < norms_.size()) h = relu(norms_[i].forward(tape, h, mode));
  }
  return h;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t i = 0; i < affine_.size(); ++i) {
    out.push_back(&affine_[i].weight);
    out.push_back(&affine_[i].bias);
    if (i < norms_.size()) {
      out.push_back(&norms_[i].gamma);
      out.push_back(&norms_[i].shift);
    }
  }
  return out;
}

std::vector<Tensor*> Mlp::buffers() {
  std::vector<Tensor*> out;
  for (auto& bn : norms_) {
    out.push_back(&bn.running_mean);
    out.push_back(&bn.running_var);
  }
  return out;
}

}  // namespace dcvae
