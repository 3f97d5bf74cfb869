#include "dcvae/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dcvae/data.hpp"
#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

void validate(const HyperParams& hp) {
  if (hp.lambda1 < 0.0 || hp.lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be non-negative");
  if (!(hp.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(hp.beta > 0.0)) throw ConfigError("beta must be positive");
  if (hp.batch_size < 2) throw ConfigError("batch_size must be at least 2");
  if (hp.n_pairs < hp.batch_size) throw ConfigError("n_pairs must be at least batch_size");
  if (!(hp.adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

BatchObjective batch_objective(Model& model, Tape& tape, const PairBatch& batch, const HyperParams& hp,
                               const Tensor& noise_first, const Tensor& noise_second, Mode mode) {
  const ElboTerms a = conditional_elbo(model, tape, tape.constant(batch.first), noise_first, mode);
  const ElboTerms b = conditional_elbo(model, tape, tape.constant(batch.second), noise_second, mode);

  BatchObjective out;
  out.first = a.latents;
  out.second = b.latents;
  BatchDiagnostics& d = out.diagnostics;

  Var loss = scale(add(a.neg_elbo, b.neg_elbo), 0.5);
  d.neg_elbo = loss.value().item();
  d.recon = 0.5 * (a.recon.value().item() + b.recon.value().item());
  d.kl = 0.5 * (a.kl.value().item() + b.kl.value().item());

  if (hp.lambda1 > 0.0) {
    std::vector<int> labels = batch.first_segment;
    labels.insert(labels.end(), batch.second_segment.begin(), batch.second_segment.end());
    const Var z = concat_rows(a.latents.z, b.latents.z);
    const GroupMmd mmd = group_mmd(z, labels, KernelConfig{hp.beta});
    d.mmd_degenerate = mmd.degenerate;
    const Var term = scale(mmd.value, hp.lambda1);
    d.mmd_term = term.value().item();
    loss = add(loss, term);
  }

  if (hp.lambda2 > 0.0) {
    const Var c = mean(contrastive_loss(a.latents.v, b.latents.v, batch.similar, ContrastiveConfig{hp.alpha}));
    const Var term = scale(c, hp.lambda2);
    d.contrastive_term = term.value().item();
    loss = add(loss, term);
  }

  d.total = loss.value().item();
  out.loss = loss;
  return out;
}

std::string metrics_row(const EpochMetrics& m) {
  std::string row = std::to_string(m.epoch);
  for (double x : {m.total_loss, m.neg_elbo, m.recon, m.kl, m.mmd_term, m.contrastive_term, m.wall_seconds}) {
    row += ',';
    row += format_double(x);
  }
  return row;
}

namespace {

void write_metrics(const std::filesystem::path& path, const std::vector<EpochMetrics>& metrics) {
  if (path.empty()) return;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << kMetricsHeader << '\n';
  for (const auto& m : metrics) out << metrics_row(m) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

// Rows of an existing log for epochs <= last, so a resumed run rewrites the
// same history.
std::vector<EpochMetrics> read_metrics_prefix(const std::filesystem::path& path, std::size_t last) {
  std::vector<EpochMetrics> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 8) continue;
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(std::stoul(f[0]));
    if (m.epoch > last) break;
    m.total_loss = parse_double(f[1]);
    m.neg_elbo = parse_double(f[2]);
    m.recon = parse_double(f[3]);
    m.kl = parse_double(f[4]);
    m.mmd_term = parse_double(f[5]);
    m.contrastive_term = parse_double(f[6]);
    m.wall_seconds = parse_double(f[7]);
    out.push_back(m);
  }
  return out;
}

bool grads_finite(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) return false;
  }
  return true;
}

void dump_failure(const std::filesystem::path& checkpoint, Model& last_good, const TrainingState& state,
                  const BatchDiagnostics& d, std::size_t epoch, std::size_t step) {
  if (checkpoint.empty()) return;
  save_checkpoint(checkpoint, last_good, &state);
  std::ofstream diag(checkpoint.string() + ".diag.txt");
  diag << "non-finite objective at epoch " << epoch << " step " << step << '\n'
       << "total=" << d.total << " neg_elbo=" << d.neg_elbo << " recon=" << d.recon << " kl=" << d.kl
       << " mmd_term=" << d.mmd_term << " contrastive_term=" << d.contrastive_term << '\n';
}

}  // namespace

TrainResult train(const Dataset& train_set, const HyperParams& hp, const TrainOptions& options,
                  const Checkpoint* resume) {
  validate(hp);
  if (train_set.signal_length() != hp.model.input_dim) {
    throw ConfigError("dataset signal length " + std::to_string(train_set.signal_length()) +
                      " does not match model input_dim " + std::to_string(hp.model.input_dim));
  }

  TrainResult result;
  result.pairs = generate_pairs(train_set, hp.n_pairs, hp.positive_fraction, derive_seed(hp.seed, Stream::pairs));
  if (resume) {
    if (!(resume->model.config() == hp.model)) throw ConfigError("checkpoint architecture differs from configuration");
    if (!resume->training) throw ConfigError("checkpoint has no optimizer state to resume from");
    result.model = resume->model;
    result.state = *resume->training;
    result.metrics = read_metrics_prefix(options.metrics_path, result.state.epochs_completed);
  } else {
    result.model = Model(hp.model, derive_seed(hp.seed, Stream::init));
  }
  Model& model = result.model;
  auto params = model.parameters();
  if (result.state.adam.m.empty()) result.state.adam = make_adam_state(params);

  const std::size_t last_epoch = options.stop_after_epoch ? std::min(options.stop_after_epoch, hp.epochs) : hp.epochs;
  const std::size_t first_epoch = result.state.epochs_completed;
  for (std::size_t epoch = first_epoch; epoch < last_epoch; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const auto batches = batch_indices(result.pairs.size(), hp.batch_size, hp.seed, epoch);
    EpochMetrics em;
    em.epoch = epoch + 1;

    for (std::size_t step = 0; step < batches.size(); ++step) {
      const PairBatch batch = make_batch(train_set, result.pairs, batches[step]);
      Rng rng(derive_seed(hp.seed, Stream::noise, epoch, step));
      const Tensor noise_a = normal_tensor({batch.first.rows(), hp.model.dim_z}, rng);
      const Tensor noise_b = normal_tensor({batch.second.rows(), hp.model.dim_z}, rng);

      // Batchnorm running statistics change during the forward pass; keep a
      // copy so a failing step can be reported against the last good state.
      std::vector<Tensor> saved_buffers;
      for (const Tensor* b : model.buffers()) saved_buffers.push_back(*b);

      Tape tape;
      const BatchObjective obj = batch_objective(model, tape, batch, hp, noise_a, noise_b, Mode::train);
      for (Parameter* p : params) p->zero_grad();
      bool finite = std::isfinite(obj.diagnostics.total);
      if (finite) {
        tape.backward(obj.loss);
        finite = grads_finite(params);
      }
      if (!finite) {
        auto buffers = model.buffers();
        for (std::size_t i = 0; i < buffers.size(); ++i) *buffers[i] = saved_buffers[i];
        dump_failure(options.checkpoint_path, model, result.state, obj.diagnostics, epoch + 1, step);
        throw NumericalError("non-finite objective at epoch " + std::to_string(epoch + 1) + ", step " +
                             std::to_string(step));
      }
      adam_step(params, result.state.adam, hp.adam);

      const BatchDiagnostics& d = obj.diagnostics;
      em.total_loss += d.total;
      em.neg_elbo += d.neg_elbo;
      em.recon += d.recon;
      em.kl += d.kl;
      em.mmd_term += d.mmd_term;
      em.contrastive_term += d.contrastive_term;
    }

    const double n = static_cast<double>(batches.size());
    em.total_loss /= n;
    em.neg_elbo /= n;
    em.recon /= n;
    em.kl /= n;
    em.mmd_term /= n;
    em.contrastive_term /= n;
    if (options.record_wall_time) {
      em.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    result.state.epochs_completed = epoch + 1;
    result.metrics.push_back(em);

    write_metrics(options.metrics_path, result.metrics);
    const bool final_epoch = epoch + 1 == last_epoch;
    if (!options.checkpoint_path.empty() && (final_epoch || options.checkpoint_every_epoch)) {
      save_checkpoint(options.checkpoint_path, model, &result.state);
    }
    if (options.on_epoch) options.on_epoch(em);
  }
  // Nothing left to run: still leave the usual artifacts behind.
  if (first_epoch >= last_epoch) {
    write_metrics(options.metrics_path, result.metrics);
    if (!options.checkpoint_path.empty()) {
      save_checkpoint(options.checkpoint_path, model, &result.state);
    }
  }
  return result;
}

}  // namespace dcvae
