#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcvae/data.hpp"
#include "dcvae/model.hpp"
#include "dcvae/probe.hpp"

namespace dcvae {

/// Eval-mode encodings of a dataset, row-aligned with its samples. z is
/// summarised by the posterior mean.
struct Features {
  FeatureSet v;
  FeatureSet mu;
};

Features extract_features(Model& model, const Dataset& dataset, Split split, std::size_t batch_size = 256);

struct ProbeReport {
  std::string factor;  ///< "v" or "z"
  std::string target;  ///< "segment" or "patient"
  std::string split;   ///< split the accuracy was measured on
  double accuracy = 0.0;
  double chance = 0.0;  ///< 1 / number of classes

  friend bool operator==(const ProbeReport&, const ProbeReport&) = default;
};

/// v -> segment probes fitted on the training split and scored on each split
/// present (train, validation, test).
std::vector<ProbeReport> segment_accuracy(Model& model, const DatasetSplit& data, std::uint64_t seed,
                                          const ProbeOptions& options = {});

/// Fit/score partition of one set of subjects. Within each (patient,
/// segment) group, beats from sites of even rank (sorted site ids) go to the
/// fit half and odd ranks to the score half; a group with a single site
/// alternates its beats instead. Every patient and segment appears in both
/// halves.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> within_subject_halves(const Dataset& dataset);

/// The 2 x 2 factor/label table. v -> segment is fitted on train subjects and
/// scored on the held-out test subjects. The other three cells stay within
/// the training subjects (test patients are unseen classes): fitted on one half
/// of their beats and scored on the other half (see within_subject_halves).
std::vector<ProbeReport> cross_factor_table(Model& model, const Dataset& train_set, const Dataset& test_set,
                                            std::uint64_t seed, const ProbeOptions& options = {});

/// decode(z, encode_v(donors)) in eval mode. donors must share one segment;
/// z is [donors x dim_z].
Tensor factor_swap(Model& model, const Dataset& donors, const Tensor& z);
/// Same with z drawn from N(0, I).
Tensor factor_swap(Model& model, const Dataset& donors, std::uint64_t seed);

/// Mean pairwise correlation between factor-swap generations grouped by
/// donor segment.
struct SwapConsistency {
  Tensor mean_correlation;   ///< [segments x segments]; diagonal = within-segment
  std::vector<int> segments; ///< segment id of each row/column
  /// Per segment: within-segment mean exceeds the mean against every other
  /// segment.
  std::vector<bool> segment_ok;
  bool holds = false;
};

/// Picks `donors_per_segment` beats per segment from `pool` (spread over
/// subjects), generates with z ~ N(0, I), and compares correlations.
SwapConsistency swap_consistency(Model& model, const Dataset& pool, std::size_t donors_per_segment,
                                 std::uint64_t seed);

}  // namespace dcvae
