#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "dcvae/adam.hpp"
#include "dcvae/checkpoint.hpp"
#include "dcvae/losses.hpp"
#include "dcvae/model.hpp"
#include "dcvae/pairing.hpp"

namespace dcvae {

struct HyperParams {
  ModelConfig model;
  double alpha = 10.0;  ///< contrastive margin on squared v distance
  double beta = 0.5;    ///< MMD kernel bandwidth
  double lambda1 = 1.0; ///< MMD weight
  double lambda2 = 1.0; ///< contrastive weight
  AdamConfig adam;
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  std::size_t n_pairs = 3000;
  double positive_fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Throws ConfigError for negative weights, non-positive alpha/beta, or a
/// batch size below 2.
void validate(const HyperParams& hp);

/// Objective terms for one batch. Penalty terms are reported already
/// weighted, so total == neg_elbo + mmd_term + contrastive_term.
struct BatchDiagnostics {
  double total = 0.0;
  double neg_elbo = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double mmd_term = 0.0;
  double contrastive_term = 0.0;
  bool mmd_degenerate = false;
};

struct BatchObjective {
  Var loss;
  BatchDiagnostics diagnostics;
  LatentPair first;
  LatentPair second;
};

/// Negated combined objective over one siamese batch: both branches run the
/// same model (one parameter set). loss = mean paired negative ELBO
/// + lambda1 * group MMD of the pooled z grouped by segment
/// + lambda2 * mean contrastive loss on (v_first, v_second). A zero weight
/// skips its term entirely.
BatchObjective batch_objective(Model& model, Tape& tape, const PairBatch& batch, const HyperParams& hp,
                               const Tensor& noise_first, const Tensor& noise_second, Mode mode = Mode::train);

struct EpochMetrics {
  std::size_t epoch = 0;  ///< 1-based
  double total_loss = 0.0;
  double neg_elbo = 0.0;
  double recon = 0.0;
  double kl = 0.0;
  double mmd_term = 0.0;
  double contrastive_term = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,total_loss,neg_elbo,recon,kl,mmd_term,contrastive_term,wall_seconds";
std::string metrics_row(const EpochMetrics& m);

struct TrainOptions {
  /// Written after the final epoch (and after each epoch when
  /// checkpoint_every_epoch). Empty = no checkpoint.
  std::filesystem::path checkpoint_path;
  bool checkpoint_every_epoch = false;
  /// CSV log, rewritten as epochs complete. Empty = no log.
  std::filesystem::path metrics_path;
  /// When false the wall_seconds column is written as 0 so logs are
  /// byte-comparable across runs.
  bool record_wall_time = true;
  /// Stop after this many total epochs (0 = hp.epochs). Used to interrupt a
  /// run that is later resumed.
  std::size_t stop_after_epoch = 0;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  Model model;
  TrainingState state;
  std::vector<EpochMetrics> metrics;
  std::vector<TrainingPair> pairs;
};

/// Generates hp.n_pairs pairs once, then runs shuffled epochs of Adam steps.
/// Every random draw (initialisation, pairs, shuffles, reparameterisation
/// noise) is derived from hp.seed, so a run resumed from a checkpoint
/// follows the uninterrupted trajectory exactly.
///
/// On a non-finite loss or gradient the parameters from before that step are
/// written to checkpoint_path (if set) together with a `.diag.txt` dump of
/// the batch diagnostics, and NumericalError is thrown.
TrainResult train(const Dataset& train_set, const HyperParams& hp, const TrainOptions& options = {},
                  const Checkpoint* resume = nullptr);

}  // namespace dcvae
