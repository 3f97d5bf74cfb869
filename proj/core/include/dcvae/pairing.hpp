#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dcvae/data.hpp"

namespace dcvae {

/// Indices into a Dataset plus the similarity label (same segment).
struct TrainingPair {
  std::size_t first = 0;
  std::size_t second = 0;
  bool similar = false;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

/// Draws `count` pairs. Each slot first decides similar/dissimilar with
/// probability positive_fraction, then rejection-samples a partner so that
/// the two beats come from different pacing sites and their segment equality
/// matches the decision. Every slot uses its own sub-seed.
///
/// Throws ConfigError when the constraints cannot be met (fewer than two
/// sites, a single segment, no segment recorded at two sites, or
/// positive_fraction outside (0, 1)).
std::vector<TrainingPair> generate_pairs(const Dataset& dataset, std::size_t count, double positive_fraction,
                                         std::uint64_t seed);

/// One siamese minibatch: both branch inputs, similarity labels, and each
/// branch sample's segment (the MMD grouping key).
struct PairBatch {
  Tensor first;
  Tensor second;
  Tensor similar;
  std::vector<int> first_segment;
  std::vector<int> second_segment;
  std::vector<std::size_t> members;  ///< indices into the pair list
};

/// Shuffled batch membership for one epoch; the trailing short batch is
/// dropped. Order depends only on (pair count, batch size, seed, epoch).
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n_pairs, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

PairBatch make_batch(const Dataset& dataset, std::span<const TrainingPair> pairs,
                     std::span<const std::size_t> members);

std::vector<PairBatch> batch_pairs(const Dataset& dataset, std::span<const TrainingPair> pairs,
                                   std::size_t batch_size, std::uint64_t seed, std::size_t epoch);

}  // namespace dcvae
