#include "dcvae/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dcvae/error.hpp"

namespace dcvae {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> k{
      // synthetic data
      {"n_subjects", "20", "synthetic subjects"},
      {"sites_per_subject", "30", "pacing sites per subject (site k paces segment k % 10)"},
      {"site_spread", "0.3", "site position jitter within its segment, in segment arcs (max 0.5)"},
      {"beats_per_site", "10", "beats per site"},
      {"noise_std", "0.1", "additive Gaussian noise"},
      {"amp_min", "0.5", "subject per-lead amplitude lower bound"},
      {"amp_max", "1.5", "subject per-lead amplitude upper bound"},
      {"shift_min", "-5", "subject circular time shift lower bound (samples)"},
      {"shift_max", "5", "subject circular time shift upper bound (samples)"},
      {"baseline_min", "-0.3", "subject per-lead baseline lower bound"},
      {"baseline_max", "0.3", "subject per-lead baseline upper bound"},
      {"data_seed", "1", "seed for synthetic data"},
      // split
      {"train_fraction", "0.6", "fraction of subjects used for training"},
      {"val_fraction", "0.15", "fraction of subjects used for validation"},
      {"split_seed", "1", "seed for the subject split"},
      // model
      {"input_dim", "1200", "signal length"},
      {"dim_v", "3", "task factor width"},
      {"dim_z", "8", "subject factor width"},
      {"encoder_hidden", "800,600", "encoder hidden widths"},
      {"decoder_hidden", "600,800", "decoder hidden widths"},
      {"bn_momentum", "0.1", "batchnorm running-statistics momentum"},
      {"bn_eps", "1e-5", "batchnorm epsilon"},
      // objective and optimiser
      {"alpha", "10", "contrastive margin on squared distance"},
      {"beta", "0.1", "MMD Gaussian kernel bandwidth"},
      {"lambda1", "1", "MMD weight"},
      {"lambda2", "1", "contrastive weight"},
      {"learning_rate", "0.002", "Adam step size"},
      {"adam_beta1", "0.9", "Adam first-moment decay"},
      {"adam_beta2", "0.999", "Adam second-moment decay"},
      {"adam_eps", "1e-8", "Adam epsilon"},
      {"batch_size", "64", "pairs per minibatch"},
      {"epochs", "12", "training epochs"},
      {"n_pairs", "3000", "training pairs generated once per run"},
      {"positive_fraction", "0.5", "target fraction of same-segment pairs"},
      {"seed", "0", "training seed"},
      // paths
      {"data_in", "", "dataset CSV to read"},
      {"data_out", "data/beats.csv", "dataset CSV written by synth"},
      {"truth_out", "data/truth.csv", "ground-truth CSV written by synth"},
      {"checkpoint", "run/model.ckpt", "checkpoint path"},
      {"resume", "", "checkpoint to resume training from"},
      {"out_dir", "run", "report directory"},
      {"metrics_log", "", "training log CSV (default out_dir/metrics/train_log.csv)"},
      {"checkpoint_every_epoch", "false", "also checkpoint after every epoch"},
      {"record_wall_time", "true", "write measured wall_seconds (false writes 0)"},
      // evaluation
      {"probe_max_iter", "2000", "linear probe gradient-descent iterations"},
      {"probe_tol", "1e-5", "linear probe gradient-norm tolerance"},
      {"n_plot_beats", "4", "reconstructed beats plotted by eval"},
      {"swap_segment", "0", "donor segment for swap"},
      {"swap_n", "3", "number of donors for swap"},
      {"swap_check_n", "20", "donors per segment for the swap consistency check"},
      // gradcheck
      {"gradcheck_eps", "1e-5", "finite-difference step"},
      {"gradcheck_coords", "0", "parameter coordinates sampled per composite check (0 = all)"},
  };
  return k;
}

bool RunConfig::known(const std::string& key) {
  const auto& k = keys();
  return std::any_of(k.begin(), k.end(), [&](const ConfigKey& c) { return c.name == key; });
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!known(key)) throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

void RunConfig::load_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected key=value, got '" + body + "'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!known(key)) throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown configuration key '" + key + "'");
    values_[key] = trim(std::string_view(body).substr(eq + 1));
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  try {
    return parse_double(text(key));
  } catch (const ConfigError&) {
    throw ConfigError("configuration key '" + key + "': expected a number, got '" + text(key) + "'");
  }
}

std::int64_t RunConfig::integer(const std::string& key) const {
  const std::string& s = text(key);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("configuration key '" + key + "': expected an integer, got '" + s + "'");
  }
  return v;
}

std::size_t RunConfig::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("configuration key '" + key + "': must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t RunConfig::seed(const std::string& key) const {
  const std::string& s = text(key);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("configuration key '" + key + "': expected an unsigned integer, got '" + s + "'");
  }
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("configuration key '" + key + "': expected true/false, got '" + s + "'");
}

std::vector<std::size_t> RunConfig::widths(const std::string& key) const {
  std::vector<std::size_t> out;
  const std::string& s = text(key);
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  for (std::string cell; std::getline(ss, cell, ',');) {
    const std::string t = trim(cell);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v == 0) {
      throw ConfigError("configuration key '" + key + "': expected comma-separated positive widths, got '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& k : keys()) out += k.name + "=" + values_.at(k.name) + "\n";
  return out;
}

HyperParams RunConfig::hyper_params() const {
  HyperParams hp;
  hp.model.input_dim = count("input_dim");
  hp.model.dim_v = count("dim_v");
  hp.model.dim_z = count("dim_z");
  hp.model.encoder_hidden = widths("encoder_hidden");
  hp.model.decoder_hidden = widths("decoder_hidden");
  hp.model.batchnorm.momentum = real("bn_momentum");
  hp.model.batchnorm.eps = real("bn_eps");
  hp.alpha = real("alpha");
  hp.beta = real("beta");
  hp.lambda1 = real("lambda1");
  hp.lambda2 = real("lambda2");
  hp.adam.learning_rate = real("learning_rate");
  hp.adam.beta1 = real("adam_beta1");
  hp.adam.beta2 = real("adam_beta2");
  hp.adam.eps = real("adam_eps");
  hp.batch_size = count("batch_size");
  hp.epochs = count("epochs");
  hp.n_pairs = count("n_pairs");
  hp.positive_fraction = real("positive_fraction");
  hp.seed = seed("seed");
  if (hp.model.dim_v == 0 || hp.model.dim_z == 0 || hp.model.input_dim == 0) {
    throw ConfigError("input_dim, dim_v and dim_z must be positive");
  }
  validate(hp);
  return hp;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig c;
  c.n_subjects = count("n_subjects");
  c.sites_per_subject = count("sites_per_subject");
  c.site_spread = real("site_spread");
  c.beats_per_site = count("beats_per_site");
  c.noise_std = real("noise_std");
  c.amp_min = real("amp_min");
  c.amp_max = real("amp_max");
  c.shift_min = static_cast<int>(integer("shift_min"));
  c.shift_max = static_cast<int>(integer("shift_max"));
  c.baseline_min = real("baseline_min");
  c.baseline_max = real("baseline_max");
  c.seed = seed("data_seed");
  return c;
}

SplitConfig RunConfig::split_config() const {
  return {real("train_fraction"), real("val_fraction"), seed("split_seed")};
}

ProbeOptions RunConfig::probe_options() const { return {count("probe_max_iter"), real("probe_tol")}; }

}  // namespace dcvae
