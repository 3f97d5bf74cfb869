#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dcvae/layers.hpp"

namespace dcvae {

/// 12 leads x 100 time samples, flattened lead-major.
inline constexpr std::size_t kLeads = 12;
inline constexpr std::size_t kTimeSamples = 100;
inline constexpr std::size_t kSignalLength = kLeads * kTimeSamples;

struct ModelConfig {
  std::size_t input_dim = kSignalLength;
  std::size_t dim_v = 16;
  std::size_t dim_z = 16;
  std::vector<std::size_t> encoder_hidden{800, 600};
  std::vector<std::size_t> decoder_hidden{600, 800};
  BatchNormOptions batchnorm{};

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Output of the two encoders for one batch.
struct LatentPair {
  Var v;
  Var mu;
  Var logvar;
  Var z;
};

/// The three networks of the conditional generative model:
///   enc_v : x       -> v            (deterministic task encoder)
///   enc_z : [x, v]  -> [mu, logvar] (diagonal Gaussian posterior over z)
///   dec   : [z, v]  -> x_hat        (unit-variance Gaussian likelihood mean)
class Model {
 public:
  Model() = default;
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  Var encode_v(Tape& tape, const Var& x, Mode mode);
  std::pair<Var, Var> encode_z(Tape& tape, const Var& x, const Var& v, Mode mode);
  Var decode(Tape& tape, const Var& z, const Var& v, Mode mode);

  /// enc_v, enc_z, dec parameters in declaration order.
  std::vector<Parameter*> parameters();
  std::vector<Tensor*> buffers();
  std::size_t parameter_count();

  Mlp enc_v;
  Mlp enc_z;
  Mlp dec;

 private:
  ModelConfig config_;
};

/// z = mu + exp(logvar / 2) * noise. `noise` is normally a tape constant.
Var reparameterize(const Var& mu, const Var& logvar, const Var& noise);

/// Closed-form KL(N(mu, diag exp(logvar)) || N(0, I)) per row: [batch].
Var kl_divergence(const Var& mu, const Var& logvar);

/// Negative unit-variance Gaussian log-likelihood up to constants,
/// 0.5 * |x - x_hat|^2 per row: [batch].
Var reconstruction_loss(const Var& x, const Var& x_hat);

struct ElboTerms {
  Var neg_elbo;  ///< batch mean of recon + kl (scalar)
  Var recon;     ///< batch mean reconstruction term (scalar)
  Var kl;        ///< batch mean KL term (scalar)
  LatentPair latents;
  Var x_hat;
};

/// Negative conditional evidence lower bound for one batch, using one noise
/// draw per example (noise: [batch x dim_z]).
ElboTerms conditional_elbo(Model& model, Tape& tape, const Var& x, const Tensor& noise, Mode mode);

}  // namespace dcvae
