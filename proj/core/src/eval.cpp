#include "dcvae/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"
#include "dcvae/synth.hpp"

namespace dcvae {

namespace {

double chance_of(std::span<const int> labels) {
  std::set<int> distinct(labels.begin(), labels.end());
  return distinct.empty() ? 0.0 : 1.0 / static_cast<double>(distinct.size());
}

Tensor rows_of(const Tensor& m, const std::vector<std::size_t>& idx) { return select_rows(m, idx); }

std::vector<int> pick(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(labels[i]);
  return out;
}

}  // namespace

Features extract_features(Model& model, const Dataset& dataset, Split split, std::size_t batch_size) {
  if (dataset.empty()) throw ContractError("extract_features on an empty dataset");
  const std::size_t n = dataset.size();
  Features out;
  out.v = {Tensor({n, model.config().dim_v}), split};
  out.mu = {Tensor({n, model.config().dim_z}), split};
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    std::vector<std::size_t> idx(end - start);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = start + i;
    Tape tape;
    const Var x = tape.constant(dataset.signals(idx));
    const Var v = model.encode_v(tape, x, Mode::eval);
    const Var mu = model.encode_z(tape, x, v, Mode::eval).first;
    std::copy(v.value().data().begin(), v.value().data().end(), out.v.values.row(start).begin());
    std::copy(mu.value().data().begin(), mu.value().data().end(), out.mu.values.row(start).begin());
  }
  return out;
}

std::vector<ProbeReport> segment_accuracy(Model& model, const DatasetSplit& data, std::uint64_t seed,
                                          const ProbeOptions& options) {
  const Features train = extract_features(model, data.train, Split::train);
  const auto train_labels = data.train.segments();
  const LinearProbe probe = fit_probe(train.v, train_labels, seed, options);
  const double chance = chance_of(train_labels);

  std::vector<ProbeReport> out;
  out.push_back({"v", "segment", "train", probe.accuracy(train.v.values, train_labels), chance});
  for (auto [set, split] : {std::pair{&data.validation, Split::validation}, std::pair{&data.test, Split::test}}) {
    if (set->empty()) continue;
    const Features f = extract_features(model, *set, split);
    out.push_back({"v", "segment", split_name(split), probe.accuracy(f.v.values, set->segments()), chance});
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> within_subject_halves(const Dataset& dataset) {
  // (patient, segment) -> site ids in order of first appearance
  std::map<std::pair<int, int>, std::vector<int>> sites;
  for (const auto& s : dataset.samples) {
    auto& list = sites[{s.patient_id, s.segment}];
    if (std::find(list.begin(), list.end(), s.site_id) == list.end()) list.push_back(s.site_id);
  }
  for (auto& [key, list] : sites) std::sort(list.begin(), list.end());

  std::map<std::pair<int, int>, std::size_t> seen;
  std::vector<std::size_t> fit, score;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples[i];
    const auto& list = sites.at({s.patient_id, s.segment});
    std::size_t rank;
    if (list.size() > 1) {
      rank = static_cast<std::size_t>(std::find(list.begin(), list.end(), s.site_id) - list.begin());
    } else {
      rank = seen[{s.patient_id, s.segment}]++;
    }
    (rank % 2 == 0 ? fit : score).push_back(i);
  }
  if (fit.empty() || score.empty()) throw ConfigError("within-subject probe split needs at least two beats per group");
  return {std::move(fit), std::move(score)};
}

std::vector<ProbeReport> cross_factor_table(Model& model, const Dataset& train_set, const Dataset& test_set,
                                            std::uint64_t seed, const ProbeOptions& options) {
  const Features train = extract_features(model, train_set, Split::train);
  const Features test = extract_features(model, test_set, Split::test);
  const auto segments = train_set.segments();
  const auto patients = train_set.patients();

  const auto [fit_rows, score_rows] = within_subject_halves(train_set);

  auto within_train = [&](const FeatureSet& f, const std::vector<int>& labels, const char* factor, const char* target,
                          std::uint64_t salt) {
    const FeatureSet fit{rows_of(f.values, fit_rows), Split::train};
    const LinearProbe probe = fit_probe(fit, pick(labels, fit_rows), derive_seed(seed, Stream::probe, salt), options);
    return ProbeReport{factor, target, "train", probe.accuracy(rows_of(f.values, score_rows), pick(labels, score_rows)),
                       chance_of(labels)};
  };

  std::vector<ProbeReport> out;
  {
    const LinearProbe probe = fit_probe(train.v, segments, derive_seed(seed, Stream::probe, 0), options);
    out.push_back({"v", "segment", "test", probe.accuracy(test.v.values, test_set.segments()), chance_of(segments)});
  }
  out.push_back(within_train(train.v, patients, "v", "patient", 1));
  out.push_back(within_train(train.mu, segments, "z", "segment", 2));
  out.push_back(within_train(train.mu, patients, "z", "patient", 3));
  return out;
}

Tensor factor_swap(Model& model, const Dataset& donors, const Tensor& z) {
  if (donors.empty()) throw ContractError("factor_swap needs at least one donor");
  for (const auto& s : donors.samples) {
    if (s.segment != donors.samples.front().segment) throw ContractError("factor_swap donors must share a segment");
  }
  if (z.rank() != 2 || z.rows() != donors.size() || z.cols() != model.config().dim_z) {
    throw DimensionError("factor_swap: z must be [" + std::to_string(donors.size()) + " x " +
                         std::to_string(model.config().dim_z) + "], got " + shape_str(z.shape()));
  }
  Tape tape;
  const Var v = model.encode_v(tape, tape.constant(donors.signals()), Mode::eval);
  return model.decode(tape, tape.constant(z), v, Mode::eval).value();
}

Tensor factor_swap(Model& model, const Dataset& donors, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::swap));
  return factor_swap(model, donors, normal_tensor({donors.size(), model.config().dim_z}, rng));
}

SwapConsistency swap_consistency(Model& model, const Dataset& pool, std::size_t donors_per_segment,
                                 std::uint64_t seed) {
  if (donors_per_segment < 2) throw ConfigError("swap consistency needs at least two donors per segment");
  std::map<int, std::map<int, std::vector<std::size_t>>> by_segment;  // segment -> patient -> rows
  for (std::size_t i = 0; i < pool.size(); ++i) {
    by_segment[pool.samples[i].segment][pool.samples[i].patient_id].push_back(i);
  }

  SwapConsistency out;
  std::vector<Tensor> generated;
  Rng rng(derive_seed(seed, Stream::swap, 1));
  for (auto& [segment, patients] : by_segment) {
    // Round-robin over patients so donors come from different subjects.
    std::vector<std::vector<std::size_t>> queues;
    for (auto& [pid, rows] : patients) {
      std::shuffle(rows.begin(), rows.end(), rng);
      queues.push_back(rows);
    }
    std::shuffle(queues.begin(), queues.end(), rng);
    std::vector<std::size_t> chosen;
    for (std::size_t round = 0; chosen.size() < donors_per_segment; ++round) {
      bool any = false;
      for (const auto& q : queues) {
        if (round < q.size() && chosen.size() < donors_per_segment) {
          chosen.push_back(q[round]);
          any = true;
        }
      }
      if (!any) break;
    }
    if (chosen.size() < 2) continue;
    out.segments.push_back(segment);
    generated.push_back(factor_swap(model, pool.subset(chosen), derive_seed(seed, Stream::swap, 2, static_cast<std::uint64_t>(segment))));
  }

  const std::size_t s = generated.size();
  if (s < 2) throw ConfigError("swap consistency needs donors from at least two segments");
  out.mean_correlation = Tensor({s, s});
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a; b < s; ++b) {
      double total = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < generated[a].rows(); ++i) {
        for (std::size_t j = a == b ? i + 1 : 0; j < generated[b].rows(); ++j) {
          total += correlation(generated[a].row(i), generated[b].row(j));
          ++count;
        }
      }
      out.mean_correlation.at(a, b) = out.mean_correlation.at(b, a) = total / static_cast<double>(count);
    }
  }
  out.holds = true;
  for (std::size_t a = 0; a < s; ++a) {
    bool ok = true;
    for (std::size_t b = 0; b < s; ++b) {
      if (b != a && !(out.mean_correlation.at(a, a) > out.mean_correlation.at(a, b))) ok = false;
    }
    out.segment_ok.push_back(ok);
    out.holds = out.holds && ok;
  }
  return out;
}

}  // namespace dcvae
