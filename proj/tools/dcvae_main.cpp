// dcvae: synth | train | eval | swap | gradcheck
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "dcvae/dcvae.hpp"

namespace fs = std::filesystem;
using namespace dcvae;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void print_config(const std::string& command, const RunConfig& cfg) {
  std::cout << "# dcvae " << command << " resolved configuration\n" << cfg.dump() << "# end configuration\n";
  std::cout.flush();
}

Dataset load_input(const RunConfig& cfg) {
  const std::string& path = cfg.text("data_in");
  if (path.empty()) throw ConfigError("data_in is required");
  if (!fs::is_regular_file(path)) throw ConfigError("data_in: no such dataset file '" + path + "'");
  Dataset d = read_dataset_csv(path);
  std::cout << "loaded " << d.size() << " beats from " << path << "\n";
  return d;
}

Model load_model(const RunConfig& cfg) {
  const std::string& path = cfg.text("checkpoint");
  if (!fs::is_regular_file(path)) throw ConfigError("checkpoint: no such file '" + path + "'");
  return load_checkpoint(path).model;
}

fs::path metrics_path(const RunConfig& cfg) {
  const std::string& m = cfg.text("metrics_log");
  return m.empty() ? fs::path(cfg.text("out_dir")) / "metrics" / "train_log.csv" : fs::path(m);
}

void print_reports(const std::string& title, const std::vector<ProbeReport>& reports) {
  std::cout << title << "\n";
  for (const auto& r : reports) {
    std::printf("  %s -> %-8s [%-10s] accuracy %.4f  chance %.4f\n", r.factor.c_str(), r.target.c_str(),
                r.split.c_str(), r.accuracy, r.chance);
  }
}

int cmd_synth(const RunConfig& cfg) {
  const SynthOutput out = generate(cfg.synth_config());
  write_dataset_csv(out.dataset, cfg.text("data_out"));
  if (!cfg.text("truth_out").empty()) write_truth_csv(out.truth, cfg.text("truth_out"));
  std::cout << "wrote " << out.dataset.size() << " beats to " << cfg.text("data_out") << "\n";
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  const HyperParams hp = cfg.hyper_params();
  const Dataset data = load_input(cfg);
  const DatasetSplit split = split_by_subject(data, cfg.split_config());
  std::cout << "subjects train/validation/test: " << split.train.patient_ids().size() << "/"
            << split.validation.patient_ids().size() << "/" << split.test.patient_ids().size() << "\n";

  TrainOptions opt;
  opt.checkpoint_path = cfg.text("checkpoint");
  opt.checkpoint_every_epoch = cfg.flag("checkpoint_every_epoch");
  opt.metrics_path = metrics_path(cfg);
  opt.record_wall_time = cfg.flag("record_wall_time");
  opt.on_epoch = [](const EpochMetrics& m) { std::cout << metrics_row(m) << std::endl; };

  std::optional<Checkpoint> resume;
  if (const std::string& r = cfg.text("resume"); !r.empty()) {
    if (!fs::is_regular_file(r)) throw ConfigError("resume: no such checkpoint '" + r + "'");
    resume = load_checkpoint(r);
  }
  std::cout << kMetricsHeader << "\n";
  const TrainResult result = train(split.train, hp, opt, resume ? &*resume : nullptr);
  std::cout << "trained " << result.state.epochs_completed << " epochs; checkpoint " << opt.checkpoint_path.string()
            << "; log " << opt.metrics_path.string() << "\n";
  return 0;
}

// Posterior-mean reconstruction in eval mode.
std::vector<double> reconstruct(Model& model, std::span<const double> signal) {
  Tape t;
  const Var x = t.constant(Tensor({1, signal.size()}, std::vector<double>(signal.begin(), signal.end())));
  const Var v = model.encode_v(t, x, Mode::eval);
  const auto [mu, logvar] = model.encode_z(t, x, v, Mode::eval);
  return model.decode(t, mu, v, Mode::eval).value().values();
}

int cmd_eval(const RunConfig& cfg) {
  Model model = load_model(cfg);
  const Dataset data = load_input(cfg);
  const DatasetSplit split = split_by_subject(data, cfg.split_config());
  const std::uint64_t seed = derive_seed(cfg.seed("seed"), Stream::probe);
  const ProbeOptions popt = cfg.probe_options();

  EvalReport report;
  report.segment_accuracy = segment_accuracy(model, split, seed, popt);
  report.cross_factor = cross_factor_table(model, split.train, split.test, seed, popt);
  print_reports("segment accuracy (v probe fitted on train subjects)", report.segment_accuracy);
  print_reports("cross-factor table", report.cross_factor);

  const Dataset& pool = split.test.empty() ? data : split.test;
  std::vector<NamedSignal> signals;
  const std::size_t n = std::min(cfg.count("n_plot_beats"), pool.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pool.samples[i * pool.size() / std::max<std::size_t>(n, 1)];
    char id[64];
    std::snprintf(id, sizeof id, "recon_p%d_seg%d_%03zu", s.patient_id, s.segment, i);
    signals.push_back({id, reconstruct(model, s.signal)});
  }
  export_report(report, signals, cfg.text("out_dir"));
  std::cout << "report written to " << cfg.text("out_dir") << "\n";
  return 0;
}

int cmd_swap(const RunConfig& cfg) {
  Model model = load_model(cfg);
  const Dataset data = load_input(cfg);
  const DatasetSplit split = split_by_subject(data, cfg.split_config());
  const Dataset& pool = split.test.empty() ? data : split.test;
  const int segment = static_cast<int>(cfg.integer("swap_segment"));
  const std::size_t n = cfg.count("swap_n");

  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pool.size() && idx.size() < n; ++i)
    if (pool.samples[i].segment == segment) idx.push_back(i);
  if (idx.empty()) throw ConfigError("swap_segment: no beats with segment " + std::to_string(segment));

  const std::uint64_t seed = derive_seed(cfg.seed("seed"), Stream::swap);
  const Tensor gen = factor_swap(model, pool.subset(idx), seed);
  const fs::path fig = fs::path(cfg.text("out_dir")) / "figures";
  fs::create_directories(fig);
  for (std::size_t i = 0; i < gen.rows(); ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "swap_seg%d_%03zu", segment, i);
    write_signal_csv(fig / (std::string(id) + ".csv"), gen.row(i));
    write_signal_svg(fig / (std::string(id) + ".svg"), gen.row(i), id);
  }
  std::cout << "wrote " << gen.rows() << " generated beats to " << fig.string() << "\n";

  const SwapConsistency sc = swap_consistency(model, pool, cfg.count("swap_check_n"), seed);
  for (std::size_t k = 0; k < sc.segments.size(); ++k) {
    std::printf("  segment %d within %.4f %s\n", sc.segments[k], sc.mean_correlation.at(k, k),
                sc.segment_ok[k] ? "ok" : "violated");
  }
  std::cout << "swap consistency " << (sc.holds ? "holds" : "violated") << "\n";
  return 0;
}

int cmd_gradcheck(const RunConfig& cfg) {
  GradSuiteOptions opt;
  opt.eps = cfg.real("gradcheck_eps");
  opt.composite_coords = cfg.count("gradcheck_coords");
  opt.seed = cfg.seed("seed");
  bool ok = true;
  for (const auto& e : run_grad_suite(opt)) {
    std::printf("%-4s %-28s %-9s max_rel_error %.3e  tol %.0e  coords %zu\n", e.passed ? "PASS" : "FAIL",
                e.component.c_str(), e.composite ? "composite" : "primitive", e.max_rel_error, e.tolerance, e.checked);
    ok = ok && e.passed;
  }
  std::cout << (ok ? "all gradient checks passed" : "gradient check failures") << "\n";
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disentangling conditional VAE for beat classification"};
  app.require_subcommand(1);

  std::map<std::string, std::string> flags;
  std::string config_file;
  const std::vector<std::pair<std::string, std::function<int(const RunConfig&)>>> commands{
      {"synth", cmd_synth}, {"train", cmd_train}, {"eval", cmd_eval}, {"swap", cmd_swap}, {"gradcheck", cmd_gradcheck}};
  const std::map<std::string, std::string> help{
      {"synth", "generate the synthetic benchmark dataset"},
      {"train", "train a model on the training subjects"},
      {"eval", "linear probes and report export"},
      {"swap", "factor-swap generation from same-segment donors"},
      {"gradcheck", "finite-difference gradient checks"}};

  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_file, "key=value configuration file");
    for (const auto& k : RunConfig::keys()) {
      sub->add_option_function<std::string>("--" + k.name, [&flags, key = k.name](const std::string& v) {
        flags[key] = v;
      }, k.help + " (default: " + (k.default_value.empty() ? "none" : k.default_value) + ")");
    }
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    const std::string& name = commands[i].first;
    try {
      RunConfig cfg;
      if (!config_file.empty()) cfg.load_file(config_file);
      for (const auto& [k, v] : flags) cfg.set(k, v);
      print_config(name, cfg);
      return commands[i].second(cfg);
    } catch (const ConfigError& e) {
      std::cerr << "dcvae " << name << ": configuration error: " << e.what() << "\n";
      return kExitUsage;
    } catch (const std::exception& e) {
      std::cerr << "dcvae " << name << ": " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  return kExitUsage;
}
