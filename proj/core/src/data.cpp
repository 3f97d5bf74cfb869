#include "dcvae/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

Tensor Dataset::signals(std::span<const std::size_t> indices) const {
  const std::size_t n = indices.empty() ? samples.size() : indices.size();
  if (n == 0) throw ContractError("signals() on an empty dataset");
  const std::size_t len = signal_length();
  Tensor out({n, len});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[indices.empty() ? i : indices[i]].signal;
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return out;
}

std::vector<int> Dataset::segments() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.segment);
  return out;
}

std::vector<int> Dataset::patients() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.patient_id);
  return out;
}

std::vector<int> Dataset::patient_ids() const {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.patient_id);
  return {ids.begin(), ids.end()};
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.samples.reserve(indices.size());
  for (auto i : indices) out.samples.push_back(samples.at(i));
  return out;
}

void validate(const Dataset& dataset) {
  const std::size_t len = dataset.signal_length();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples[i];
    const std::string where = "row " + std::to_string(i);
    if (s.signal.size() != len || len == 0) throw ConfigError(where + ": signal length differs from the first row");
    if (s.segment < 0 || s.segment >= kSegments) {
      throw ConfigError(where + ": segment " + std::to_string(s.segment) + " outside [0, 9]");
    }
    for (double x : s.signal) {
      if (!std::isfinite(x)) throw ConfigError(where + ": non-finite signal value");
    }
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw IoError("cannot format value");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError("not a number: '" + std::string(text) + "'");
  return value;
}

namespace {

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string signal_column(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%04zu", i);
  return buf;
}

}  // namespace

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::size_t len = dataset.signal_length();
  out << "patient_id,site_id,segment";
  for (std::size_t i = 0; i < len; ++i) out << ',' << signal_column(i);
  out << '\n';
  std::string line;
  for (const auto& s : dataset.samples) {
    line = std::to_string(s.patient_id) + ',' + std::to_string(s.site_id) + ',' + std::to_string(s.segment);
    for (double x : s.signal) {
      line += ',';
      line += format_double(x);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  if (header.size() < 4 || header[0] != "patient_id" || header[1] != "site_id" || header[2] != "segment") {
    throw ConfigError(path.string() + ": header must start with patient_id,site_id,segment");
  }
  const std::size_t len = header.size() - 3;
  for (std::size_t i = 0; i < len; ++i) {
    if (header[3 + i] != signal_column(i)) {
      throw ConfigError(path.string() + ": expected column " + signal_column(i) + ", found " +
                        std::string(header[3 + i]));
    }
  }

  Dataset dataset;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    BeatSample s;
    try {
      s.patient_id = parse_int(fields[0]);
      s.site_id = parse_int(fields[1]);
      s.segment = parse_int(fields[2]);
      s.signal.reserve(len);
      for (std::size_t i = 0; i < len; ++i) s.signal.push_back(parse_double(fields[3 + i]));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    dataset.samples.push_back(std::move(s));
  }
  validate(dataset);
  return dataset;
}

const char* split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "?";
}

DatasetSplit split_by_subject(const Dataset& dataset, const SplitConfig& config) {
  if (config.train_fraction <= 0.0 || config.val_fraction < 0.0 || config.train_fraction + config.val_fraction >= 1.0) {
    throw ConfigError("split fractions must satisfy train > 0, val >= 0, train + val < 1");
  }
  std::vector<int> ids = dataset.patient_ids();
  const auto n = static_cast<double>(ids.size());
  const auto n_train = static_cast<std::size_t>(std::lround(config.train_fraction * n));
  const auto n_val = static_cast<std::size_t>(std::lround(config.val_fraction * n));
  if (n_train == 0 || n_train + n_val >= ids.size()) {
    throw ConfigError("cannot split " + std::to_string(ids.size()) + " subjects into non-empty train and test sets");
  }
  Rng rng(derive_seed(config.seed, Stream::split));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::set<int> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::set<int> val(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                    ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));

  DatasetSplit out;
  for (const auto& s : dataset.samples) {
    if (train.count(s.patient_id)) {
      out.train.samples.push_back(s);
    } else if (val.count(s.patient_id)) {
      out.validation.samples.push_back(s);
    } else {
      out.test.samples.push_back(s);
    }
  }
  return out;
}

}  // namespace dcvae
