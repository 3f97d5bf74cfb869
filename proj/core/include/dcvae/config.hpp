#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dcvae/data.hpp"
#include "dcvae/probe.hpp"
#include "dcvae/synth.hpp"
#include "dcvae/training.hpp"

namespace dcvae {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Flat key=value run configuration covering every hyperparameter, synthetic
/// data setting, path and command option. Unknown keys are rejected.
/// Values are stored as text and converted on access; a bad value raises
/// ConfigError naming the key.
class RunConfig {
 public:
  RunConfig();

  static const std::vector<ConfigKey>& keys();
  static bool known(const std::string& key);

  void set(const std::string& key, const std::string& value);
  /// One `key = value` per line; `#` starts a comment; blank lines ignored.
  void load_file(const std::filesystem::path& path);
  void load_text(const std::string& text, const std::string& source = "<text>");

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> widths(const std::string& key) const;

  /// Every key in declaration order as `key=value` lines.
  std::string dump() const;

  HyperParams hyper_params() const;
  SynthConfig synth_config() const;
  SplitConfig split_config() const;
  ProbeOptions probe_options() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace dcvae
