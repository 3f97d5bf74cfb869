#include "dcvae/probe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;

RowMat standardise(const Tensor& x, const Tensor& mean, const Tensor& scale) {
  RowMat out = MapC(x.data().data(), static_cast<Eigen::Index>(x.rows()), static_cast<Eigen::Index>(x.cols()));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - mean[static_cast<std::size_t>(c)]) / scale[static_cast<std::size_t>(c)];
  }
  return out;
}

// Row-wise softmax in place.
void softmax_rows(RowMat& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

}  // namespace

std::vector<int> LinearProbe::predict(const Tensor& features) const {
  if (features.rank() != 2 || features.cols() != weight.cols()) {
    throw DimensionError("probe expects [n x " + std::to_string(weight.cols()) + "] features, got " +
                         shape_str(features.shape()));
  }
  const RowMat x = standardise(features, feature_mean, feature_scale);
  const MapC w(weight.data().data(), static_cast<Eigen::Index>(weight.rows()), static_cast<Eigen::Index>(weight.cols()));
  RowMat logits = x * w.transpose();
  std::vector<int> out(features.rows());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    double best_score = -INFINITY;
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      const double score = logits(r, k) + bias[static_cast<std::size_t>(k)];
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    out[static_cast<std::size_t>(r)] = classes[static_cast<std::size_t>(best)];
  }
  return out;
}

double LinearProbe::accuracy(const Tensor& features, std::span<const int> labels) const {
  if (labels.size() != features.rows()) throw DimensionError("probe accuracy: label count differs from feature rows");
  const auto predicted = predict(features);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

LinearProbe fit_probe(const FeatureSet& features, std::span<const int> labels, std::uint64_t seed,
                      const ProbeOptions& options) {
  if (features.split == Split::test) throw ContractError("probe training must not see test-split features");
  const Tensor& x = features.values;
  if (x.rank() != 2 || x.rows() != labels.size()) {
    throw DimensionError("fit_probe: " + std::to_string(labels.size()) + " labels for features " + shape_str(x.shape()));
  }

  LinearProbe probe;
  std::map<int, std::size_t> index;
  for (int l : labels) index.emplace(l, 0);
  if (index.size() < 2) throw ConfigError("fit_probe needs at least two classes");
  for (auto& [label, k] : index) {
    k = probe.classes.size();
    probe.classes.push_back(label);
  }

  const std::size_t n = x.rows();
  const std::size_t dim = x.cols();
  const std::size_t k = probe.classes.size();
  probe.feature_mean = Tensor({dim});
  probe.feature_scale = Tensor({dim}, 1.0);
  for (std::size_t c = 0; c < dim; ++c) {
    double m = 0.0;
    for (std::size_t r = 0; r < n; ++r) m += x.at(r, c);
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t r = 0; r < n; ++r) v += (x.at(r, c) - m) * (x.at(r, c) - m);
    v /= static_cast<double>(n);
    probe.feature_mean[c] = m;
    probe.feature_scale[c] = v > 1e-24 ? std::sqrt(v) : 1.0;
  }
  const RowMat xs = standardise(x, probe.feature_mean, probe.feature_scale);

  RowMat onehot = RowMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r) onehot(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(index[labels[r]])) = 1.0;

  // Softmax cross-entropy Hessian <= 0.5 * cov([x, 1]) (x) I; largest
  // eigenvalue by power iteration.
  RowMat design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim + 1));
  design.leftCols(static_cast<Eigen::Index>(dim)) = xs;
  design.col(static_cast<Eigen::Index>(dim)).setOnes();
  const RowMat gram = design.transpose() * design / static_cast<double>(n);
  Eigen::VectorXd u = Eigen::VectorXd::Ones(gram.rows()).normalized();
  double lambda = 1.0;
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd next = gram * u;
    lambda = next.norm();
    if (lambda == 0.0) break;
    u = next / lambda;
  }
  const double step = 1.0 / (0.5 * std::max(lambda, 1e-12) * 1.01);

  Rng rng(derive_seed(seed, Stream::probe));
  std::normal_distribution<double> init(0.0, 0.01);
  RowMat w(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = init(rng);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(k));

  for (probe.iterations = 0; probe.iterations < options.max_iter; ++probe.iterations) {
    RowMat p = xs * w.transpose();
    p.rowwise() += b;
    softmax_rows(p);
    p -= onehot;
    const RowMat gw = p.transpose() * xs / static_cast<double>(n);
    const Eigen::RowVectorXd gb = p.colwise().sum() / static_cast<double>(n);
    probe.grad_norm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    if (probe.grad_norm < options.tol) break;
    w -= step * gw;
    b -= step * gb;
  }

  probe.weight = Tensor({k, dim}, std::vector<double>(w.data(), w.data() + w.size()));
  probe.bias = Tensor({k}, std::vector<double>(b.data(), b.data() + b.size()));
  return probe;
}

}  // namespace dcvae
