#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dcvae/data.hpp"
#include "dcvae/model.hpp"

namespace dcvae {

/// Two-factor beat generator: the segment picks a class template, the subject
/// applies one fixed transform to every beat it contributes.
struct SynthConfig {
  std::size_t n_subjects = 20;
  /// Site k of a subject paces segment k % 10.
  std::size_t sites_per_subject = 30;
  /// Each site sits uniformly within +-site_spread segment arcs of its
  /// segment centre (0.5 = the whole arc).
  double site_spread = 0.3;
  std::size_t beats_per_site = 10;
  double noise_std = 0.1;
  double amp_min = 0.5;
  double amp_max = 1.5;
  int shift_min = -10;
  int shift_max = 10;
  double baseline_min = -0.3;
  double baseline_max = 0.3;
  std::uint64_t seed = 1;
};

/// Per-lead amplitude, a circular time shift common to all leads, and a
/// per-lead baseline offset:
///   beat[l][t] = amplitude[l] * template[l][(t - shift) mod 100] + baseline[l]
struct SubjectTransform {
  std::array<double, kLeads> amplitude{};
  int shift = 0;
  std::array<double, kLeads> baseline{};

  static SubjectTransform identity();
};

struct GroundTruthRow {
  int segment = 0;
  int subject = 0;
  int site_id = 0;
  double site_offset = 0.0;  ///< in segment arcs
  SubjectTransform transform;
};

/// Ten smooth 12 x 100 templates (flattened lead-major), peak |value| 1,
/// pairwise Pearson correlation below 0.95.
std::vector<std::vector<double>> make_templates(std::uint64_t seed);

/// Noiseless, untransformed beat of a site `offset` segment arcs from the
/// centre of `segment`; offset 0 is the segment template.
std::vector<double> site_template(std::uint64_t seed, int segment, double offset);

std::vector<double> apply_subject_transform(std::span<const double> tmpl, const SubjectTransform& transform);

/// Pearson correlation of two equal-length vectors.
double correlation(std::span<const double> a, std::span<const double> b);

struct SynthOutput {
  Dataset dataset;
  std::vector<GroundTruthRow> truth;  ///< aligned with dataset.samples
  std::vector<SubjectTransform> subjects;
  std::vector<std::vector<double>> templates;
};

/// Throws ConfigError for empty ranges or negative noise.
SynthOutput generate(const SynthConfig& config);

/// patient_id,site_id,segment,site_offset,shift,amp_00..amp_11,base_00..base_11
void write_truth_csv(const std::vector<GroundTruthRow>& truth, const std::filesystem::path& path);

}  // namespace dcvae
