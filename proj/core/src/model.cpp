#include "dcvae/model.hpp"

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

namespace {

std::vector<std::size_t> chain(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

void require_width(const Var& x, std::size_t width, const char* what) {
  if (x.value().rank() != 2 || x.shape()[1] != width) {
    throw DimensionError(std::string(what) + ": expected [batch x " + std::to_string(width) + "], got " +
                         shape_str(x.shape()));
  }
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  if (config_.input_dim == 0 || config_.dim_v == 0 || config_.dim_z == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  const auto& c = config_;
  enc_v = Mlp(chain(c.input_dim, c.encoder_hidden, c.dim_v), derive_seed(seed, Stream::init, 1), c.batchnorm, "enc_v");
  enc_z = Mlp(chain(c.input_dim + c.dim_v, c.encoder_hidden, 2 * c.dim_z), derive_seed(seed, Stream::init, 2),
              c.batchnorm, "enc_z");
  dec = Mlp(chain(c.dim_z + c.dim_v, c.decoder_hidden, c.input_dim), derive_seed(seed, Stream::init, 3), c.batchnorm,
            "dec");
}

Var Model::encode_v(Tape& tape, const Var& x, Mode mode) {
  require_width(x, config_.input_dim, "encode_v");
  return enc_v.forward(tape, x, mode);
}

std::pair<Var, Var> Model::encode_z(Tape& tape, const Var& x, const Var& v, Mode mode) {
  require_width(x, config_.input_dim, "encode_z");
  require_width(v, config_.dim_v, "encode_z (v)");
  const Var stats = enc_z.forward(tape, concat_cols(x, v), mode);
  return {slice_cols(stats, 0, config_.dim_z), slice_cols(stats, config_.dim_z, 2 * config_.dim_z)};
}

Var Model::decode(Tape& tape, const Var& z, const Var& v, Mode mode) {
  require_width(z, config_.dim_z, "decode (z)");
  require_width(v, config_.dim_v, "decode (v)");
  return dec.forward(tape, concat_cols(z, v), mode);
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out = enc_v.parameters();
  for (auto* p : enc_z.parameters()) out.push_back(p);
  for (auto* p : dec.parameters()) out.push_back(p);
  return out;
}

std::vector<Tensor*> Model::buffers() {
  std::vector<Tensor*> out = enc_v.buffers();
  for (auto* b : enc_z.buffers()) out.push_back(b);
  for (auto* b : dec.buffers()) out.push_back(b);
  return out;
}

std::size_t Model::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += p->value.numel();
  return n;
}

Var reparameterize(const Var& mu, const Var& logvar, const Var& noise) {
  if (mu.shape() != logvar.shape() || mu.shape() != noise.shape()) {
    throw DimensionError("reparameterize: shapes " + shape_str(mu.shape()) + ", " + shape_str(logvar.shape()) +
                         ", " + shape_str(noise.shape()) + " must match");
  }
  return add(mu, mul(exp(scale(logvar, 0.5)), noise));
}

Var kl_divergence(const Var& mu, const Var& logvar) {
  if (mu.shape() != logvar.shape()) {
    throw DimensionError("kl_divergence: " + shape_str(mu.shape()) + " vs " + shape_str(logvar.shape()));
  }
  const Var terms = add_scalar(sub(add(square(mu), exp(logvar)), logvar), -1.0);
  return scale(mu.value().rank() == 2 ? sum(terms, 1) : sum(terms), 0.5);
}

Var reconstruction_loss(const Var& x, const Var& x_hat) {
  if (x.shape() != x_hat.shape()) {
    throw DimensionError("reconstruction_loss: " + shape_str(x.shape()) + " vs " + shape_str(x_hat.shape()));
  }
  const Var sq = square(sub(x, x_hat));
  return scale(x.value().rank() == 2 ? sum(sq, 1) : sum(sq), 0.5);
}

ElboTerms conditional_elbo(Model& model, Tape& tape, const Var& x, const Tensor& noise, Mode mode) {
  ElboTerms out;
  LatentPair& lat = out.latents;
  lat.v = model.encode_v(tape, x, mode);
  std::tie(lat.mu, lat.logvar) = model.encode_z(tape, x, lat.v, mode);
  lat.z = reparameterize(lat.mu, lat.logvar, tape.constant(noise));
  out.x_hat = model.decode(tape, lat.z, lat.v, mode);
  out.recon = mean(reconstruction_loss(x, out.x_hat));
  out.kl = mean(kl_divergence(lat.mu, lat.logvar));
  out.neg_elbo = add(out.recon, out.kl);
  return out;
}

}  // namespace dcvae
