#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcvae/tensor.hpp"

namespace dcvae {

inline constexpr int kSegments = 10;

/// One QRS beat: 12 leads x 100 samples flattened lead-major
/// (signal[lead * 100 + t]).
struct BeatSample {
  std::vector<double> signal;
  int segment = 0;
  int patient_id = 0;
  int site_id = 0;
};

struct Dataset {
  std::vector<BeatSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t signal_length() const { return samples.empty() ? 0 : samples.front().signal.size(); }

  /// [n x signal_length] matrix of the listed samples (all when empty).
  Tensor signals(std::span<const std::size_t> indices = {}) const;
  std::vector<int> segments() const;
  std::vector<int> patients() const;
  /// Sorted distinct patient ids.
  std::vector<int> patient_ids() const;
  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Checks finite signals of equal length and segment labels in [0, 9].
/// Throws ConfigError naming the first offending row.
void validate(const Dataset& dataset);

/// CSV with header `patient_id,site_id,segment,s0000,...`, one beat per row,
/// values in shortest round-trip decimal form.
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

enum class Split { train, validation, test };
const char* split_name(Split split);

struct SplitConfig {
  double train_fraction = 0.6;
  double val_fraction = 0.15;
  std::uint64_t seed = 0;
};

/// Subject-disjoint partition. Patient ids are shuffled with the seed, then
/// round(train_fraction * n) go to train, round(val_fraction * n) to
/// validation and the rest to test.
struct DatasetSplit {
  Dataset train;
  Dataset validation;
  Dataset test;
};

DatasetSplit split_by_subject(const Dataset& dataset, const SplitConfig& config);

/// Shortest round-trip text for a double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace dcvae
