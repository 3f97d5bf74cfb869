#include "dcvae/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dcvae/error.hpp"
#include "dcvae/model.hpp"

namespace dcvae {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void check_signal(std::span<const double> signal) {
  if (signal.size() != kSignalLength) {
    throw DimensionError("signal must have " + std::to_string(kSignalLength) + " values, got " +
                         std::to_string(signal.size()));
  }
}

}  // namespace

const std::vector<std::string>& lead_names() {
  static const std::vector<std::string> names{"I", "II", "III", "aVR", "aVL", "aVF",
                                              "V1", "V2", "V3", "V4", "V5", "V6"};
  return names;
}

void write_probe_table(const std::filesystem::path& path, const std::vector<ProbeReport>& reports) {
  auto out = open_out(path);
  out << "factor,target,split,accuracy,chance\n";
  for (const auto& r : reports) {
    out << r.factor << ',' << r.target << ',' << r.split << ',' << format_double(r.accuracy) << ','
        << format_double(r.chance) << '\n';
  }
  finish(out, path);
}

std::vector<ProbeReport> read_probe_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "factor,target,split,accuracy,chance") throw ConfigError(path.string() + ": unexpected header");
  std::vector<ProbeReport> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 5) throw ConfigError(path.string() + ": malformed row '" + line + "'");
    out.push_back({f[0], f[1], f[2], parse_double(f[3]), parse_double(f[4])});
  }
  return out;
}

void write_signal_csv(const std::filesystem::path& path, std::span<const double> signal) {
  check_signal(signal);
  auto out = open_out(path);
  const auto& names = lead_names();
  for (std::size_t l = 0; l < kLeads; ++l) out << (l ? "," : "") << names[l];
  out << '\n';
  for (std::size_t t = 0; t < kTimeSamples; ++t) {
    for (std::size_t l = 0; l < kLeads; ++l) out << (l ? "," : "") << format_double(signal[l * kTimeSamples + t]);
    out << '\n';
  }
  finish(out, path);
}

void write_signal_svg(const std::filesystem::path& path, std::span<const double> signal, const std::string& title) {
  check_signal(signal);
  constexpr double kWidth = 600.0;
  constexpr double kStrip = 60.0;
  constexpr double kLeft = 50.0;
  constexpr double kTop = 30.0;
  const double height = kTop + kStrip * static_cast<double>(kLeads) + 10.0;
  double peak = 0.0;
  for (double x : signal) peak = std::max(peak, std::abs(x));
  const double gain = peak > 0.0 ? 0.45 * kStrip / peak : 1.0;

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth + kLeft + 10 << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kLeft << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << title << "</text>\n";
  const auto& names = lead_names();
  char buf[64];
  for (std::size_t l = 0; l < kLeads; ++l) {
    const double mid = kTop + kStrip * (static_cast<double>(l) + 0.5);
    out << "<text x=\"5\" y=\"" << mid + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">" << names[l]
        << "</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << mid << "\" x2=\"" << kLeft + kWidth << "\" y2=\"" << mid
        << "\" stroke=\"#ddd\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (std::size_t t = 0; t < kTimeSamples; ++t) {
      const double x = kLeft + kWidth * static_cast<double>(t) / static_cast<double>(kTimeSamples - 1);
      const double y = mid - gain * signal[l * kTimeSamples + t];
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", t ? " " : "", x, y);
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  finish(out, path);
}

void export_report(const EvalReport& report, const std::vector<NamedSignal>& signals,
                   const std::filesystem::path& out_dir) {
  write_probe_table(out_dir / "tables" / "segment_accuracy.csv", report.segment_accuracy);
  write_probe_table(out_dir / "tables" / "cross_factor.csv", report.cross_factor);
  for (const auto& s : signals) {
    write_signal_svg(out_dir / "figures" / ("beat_" + s.id + ".svg"), s.signal, "beat " + s.id);
    write_signal_csv(out_dir / "figures" / ("beat_" + s.id + ".csv"), s.signal);
  }
}

}  // namespace dcvae
