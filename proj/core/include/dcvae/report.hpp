#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dcvae/eval.hpp"

namespace dcvae {

struct NamedSignal {
  std::string id;
  std::vector<double> signal;  ///< 1200 values, lead-major
};

struct EvalReport {
  std::vector<ProbeReport> segment_accuracy;
  std::vector<ProbeReport> cross_factor;
};

/// Standard 12-lead order used for CSV headers and plot labels.
const std::vector<std::string>& lead_names();

/// factor,target,split,accuracy,chance
void write_probe_table(const std::filesystem::path& path, const std::vector<ProbeReport>& reports);
std::vector<ProbeReport> read_probe_table(const std::filesystem::path& path);

/// 100 rows of 12 lead columns.
void write_signal_csv(const std::filesystem::path& path, std::span<const double> signal);
/// One strip per lead, stacked vertically.
void write_signal_svg(const std::filesystem::path& path, std::span<const double> signal, const std::string& title);

/// Writes out_dir/tables/segment_accuracy.csv, out_dir/tables/cross_factor.csv
/// and, per signal, out_dir/figures/beat_<id>.svg plus beat_<id>.csv.
/// Throws IoError naming the path on failure.
void export_report(const EvalReport& report, const std::vector<NamedSignal>& signals,
                   const std::filesystem::path& out_dir);

}  // namespace dcvae
