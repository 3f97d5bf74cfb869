#include "dcvae/verify.hpp"

#include <cmath>
#include <functional>

#include "dcvae/autodiff.hpp"
#include "dcvae/gradcheck.hpp"
#include "dcvae/layers.hpp"
#include "dcvae/losses.hpp"
#include "dcvae/model.hpp"
#include "dcvae/pairing.hpp"
#include "dcvae/rng.hpp"
#include "dcvae/training.hpp"

namespace dcvae {

namespace {

// Keeps inputs away from the relu kink and the log domain boundary.
Tensor away_from_zero(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) {
    const double mag = uniform(rng, 0.2, 1.5);
    x = uniform(rng, 0.0, 1.0) < 0.5 ? -mag : mag;
  }
  return t;
}

Tensor positive(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = uniform(rng, 0.3, 2.0);
  return t;
}

// Contracts an arbitrary output with fixed weights so every output element
// contributes a distinct amount to the scalar.
Var project(const Var& y, std::uint64_t seed) {
  Rng rng(seed);
  return sum(mul(y, y.tape().constant(normal_tensor(y.shape(), rng))));
}

struct Suite {
  GradSuiteOptions opt;
  std::vector<GradSuiteEntry> out;

  void add(std::string name, bool composite, const GradCheckResult& r) {
    const double tol = composite ? opt.composite_tolerance : opt.primitive_tolerance;
    out.push_back({std::move(name), composite, r.max_rel_error, tol, r.checked,
                   std::isfinite(r.max_rel_error) && r.max_rel_error < tol});
  }

  void unary(const std::string& name, const std::function<Var(const Var&)>& op, const Tensor& x,
             std::uint64_t seed) {
    add(name, false, grad_check([&](Tape&, const Var& v) { return project(op(v), seed); }, x, {opt.eps, 0, 0}));
  }

  // Checks a binary op with respect to each operand in turn.
  void binary(const std::string& name, const std::function<Var(const Var&, const Var&)>& op, const Tensor& a,
              const Tensor& b, std::uint64_t seed) {
    add(name + "/lhs", false,
        grad_check([&](Tape& t, const Var& v) { return project(op(v, t.constant(b)), seed); }, a, {opt.eps, 0, 0}));
    add(name + "/rhs", false,
        grad_check([&](Tape& t, const Var& v) { return project(op(t.constant(a), v), seed); }, b, {opt.eps, 0, 0}));
  }
};

}  // namespace

std::vector<GradSuiteEntry> run_grad_suite(const GradSuiteOptions& options) {
  Suite s{options, {}};
  Rng rng(derive_seed(options.seed, Stream::gradcheck));
  auto pseed = [&] { return static_cast<std::uint64_t>(rng()); };

  const Tensor a34 = away_from_zero({3, 4}, rng);
  const Tensor b34 = away_from_zero({3, 4}, rng);
  const Tensor b45 = away_from_zero({4, 5}, rng);
  const Tensor b54 = away_from_zero({5, 4}, rng);
  const Tensor row4 = away_from_zero({4}, rng);
  const Tensor pos34 = positive({3, 4}, rng);
  const Tensor a32 = away_from_zero({3, 2}, rng);

  s.binary("matmul", [](const Var& a, const Var& b) { return matmul(a, b); }, a34, b45, pseed());
  s.binary("matmul_bt", [](const Var& a, const Var& b) { return matmul_bt(a, b); }, a34, b54, pseed());
  s.binary("add", [](const Var& a, const Var& b) { return add(a, b); }, a34, b34, pseed());
  s.binary("add_broadcast", [](const Var& a, const Var& b) { return add(a, b); }, a34, row4, pseed());
  s.binary("sub", [](const Var& a, const Var& b) { return sub(a, b); }, a34, b34, pseed());
  s.binary("sub_broadcast", [](const Var& a, const Var& b) { return sub(a, b); }, a34, row4, pseed());
  s.binary("mul", [](const Var& a, const Var& b) { return mul(a, b); }, a34, b34, pseed());
  s.binary("mul_broadcast", [](const Var& a, const Var& b) { return mul(a, b); }, a34, row4, pseed());
  s.unary("neg", [](const Var& a) { return neg(a); }, a34, pseed());
  s.unary("exp", [](const Var& a) { return exp(a); }, a34, pseed());
  s.unary("log", [](const Var& a) { return log(a); }, pos34, pseed());
  s.unary("square", [](const Var& a) { return square(a); }, a34, pseed());
  s.unary("relu", [](const Var& a) { return relu(a); }, a34, pseed());
  s.unary("scale", [](const Var& a) { return scale(a, -1.7); }, a34, pseed());
  s.unary("add_scalar", [](const Var& a) { return add_scalar(a, 0.3); }, a34, pseed());
  s.unary("sum", [](const Var& a) { return sum(a); }, a34, pseed());
  s.unary("mean", [](const Var& a) { return mean(a); }, a34, pseed());
  s.unary("sum_axis0", [](const Var& a) { return sum(a, 0); }, a34, pseed());
  s.unary("sum_axis1", [](const Var& a) { return sum(a, 1); }, a34, pseed());
  s.unary("mean_axis0", [](const Var& a) { return mean(a, 0); }, a34, pseed());
  s.unary("mean_axis1", [](const Var& a) { return mean(a, 1); }, a34, pseed());
  s.binary("concat_cols", [](const Var& a, const Var& b) { return concat_cols(a, b); }, a34, a32, pseed());
  s.binary("concat_rows", [](const Var& a, const Var& b) { return concat_rows(a, b); }, a34, b34, pseed());
  s.unary("slice_cols", [](const Var& a) { return slice_cols(a, 1, 3); }, a34, pseed());
  s.binary("sq_dist", [](const Var& a, const Var& b) { return sq_dist(a, b); }, a34, b34, pseed());

  // Batch normalisation in train mode, w.r.t. input and affine parameters.
  {
    BatchNormLayer bn(4, {}, "bn");
    bn.gamma.value = positive({4}, rng);
    bn.shift.value = away_from_zero({4}, rng);
    const Tensor x = away_from_zero({6, 4}, rng);
    const auto w = pseed();
    s.add("batchnorm_train/input", false,
          grad_check([&](Tape& t, const Var& v) { return project(bn.forward(t, v, Mode::train), w); }, x,
                     {options.eps, 0, 0}));
    std::vector<Parameter*> params{&bn.gamma, &bn.shift};
    s.add("batchnorm_train/params", false,
          grad_check_params([&](Tape& t) { return project(bn.forward(t, t.constant(x), Mode::train), w); }, params,
                            {options.eps, 0, 0}));
  }

  // Toy model for the composite objectives.
  ModelConfig cfg;
  cfg.input_dim = 12;
  cfg.dim_v = 3;
  cfg.dim_z = 2;
  cfg.encoder_hidden = {8, 6};
  cfg.decoder_hidden = {6, 8};
  Model model(cfg, pseed());
  const auto params = model.parameters();
  const std::size_t batch = 6;
  const Tensor x = normal_tensor({batch, cfg.input_dim}, rng);
  const Tensor noise = normal_tensor({batch, cfg.dim_z}, rng);
  const GradCheckOptions comp{options.eps, options.composite_coords, pseed()};

  s.add("kl_divergence", false,
        grad_check([&](Tape&, const Var& v) {
          return project(kl_divergence(slice_cols(v, 0, 2), slice_cols(v, 2, 4)), 11);
        }, away_from_zero({3, 4}, rng), {options.eps, 0, 0}));
  s.add("reconstruction_loss", false,
        grad_check([&](Tape& t, const Var& v) {
          return project(reconstruction_loss(t.constant(b34), v), 12);
        }, a34, {options.eps, 0, 0}));
  s.add("reparameterize", false,
        grad_check([&](Tape& t, const Var& v) {
          return project(reparameterize(slice_cols(v, 0, 2), slice_cols(v, 2, 4), t.constant(a32)), 13);
        }, a34, {options.eps, 0, 0}));

  s.add("conditional_elbo/input", true,
        grad_check([&](Tape& t, const Var& v) { return conditional_elbo(model, t, v, noise, Mode::train).neg_elbo; },
                   x, comp));
  s.add("conditional_elbo/params", true,
        grad_check_params([&](Tape& t) {
          return conditional_elbo(model, t, t.constant(x), noise, Mode::train).neg_elbo;
        }, params, comp));

  const KernelConfig kernel{0.5};
  const Tensor y = away_from_zero({4, 3}, rng);
  s.add("mmd2/x", true,
        grad_check([&](Tape& t, const Var& v) { return mmd2(v, t.constant(y), kernel); },
                   away_from_zero({5, 3}, rng), {options.eps, 0, 0}));
  s.add("mmd2/y", true,
        grad_check([&](Tape& t, const Var& v) { return mmd2(t.constant(a32), v, kernel); }, away_from_zero({4, 2}, rng),
                   {options.eps, 0, 0}));
  {
    const std::vector<int> labels{0, 1, 0, 2, 1, 1, 2, 0};
    s.add("group_mmd", true,
          grad_check([&](Tape&, const Var& v) { return group_mmd(v, labels, kernel).value; },
                     away_from_zero({8, 3}, rng), {options.eps, 0, 0}));
  }

  // Contrastive loss with distances placed clear of the hinge at alpha.
  {
    const ContrastiveConfig cc{4.0};
    Tensor vi({4, 3}, 0.0), vj({4, 3}, 0.0);
    const std::vector<double> offset{0.4, 1.1, 0.7, 1.6};  // d2 = 3 * offset^2
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 3; ++c) {
        vi.at(r, c) = uniform(rng, -1.0, 1.0);
        vj.at(r, c) = vi.at(r, c) + (c % 2 == 0 ? offset[r] : -offset[r]);
      }
    const Tensor similar = Tensor::vector({1.0, 0.0, 0.0, 1.0});
    s.add("contrastive/first", true,
          grad_check([&](Tape& t, const Var& v) { return sum(contrastive_loss(v, t.constant(vj), similar, cc)); }, vi,
                     {options.eps, 0, 0}));
    s.add("contrastive/second", true,
          grad_check([&](Tape& t, const Var& v) { return sum(contrastive_loss(t.constant(vi), v, similar, cc)); }, vj,
                     {options.eps, 0, 0}));
  }

  // Full siamese objective on a hand-built batch.
  {
    PairBatch pb;
    pb.first = x;
    pb.second = normal_tensor({batch, cfg.input_dim}, rng);
    pb.first_segment = {0, 1, 2, 0, 1, 2};
    pb.second_segment = {0, 2, 2, 1, 1, 0};
    pb.similar = Tensor::vector({1, 0, 1, 0, 1, 0});
    pb.members = {0, 1, 2, 3, 4, 5};
    HyperParams hp;
    hp.model = cfg;
    hp.alpha = 10.0;
    hp.beta = 0.5;
    const Tensor noise2 = normal_tensor({batch, cfg.dim_z}, rng);
    s.add("batch_objective/params", true,
          grad_check_params([&](Tape& t) { return batch_objective(model, t, pb, hp, noise, noise2).loss; }, params,
                            comp));
  }
  return s.out;
}

}  // namespace dcvae
