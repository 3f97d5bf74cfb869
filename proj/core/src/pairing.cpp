#include "dcvae/pairing.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dcvae/error.hpp"
#include "dcvae/rng.hpp"

namespace dcvae {

namespace {

constexpr int kMaxTries = 100000;

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

}  // namespace

std::vector<TrainingPair> generate_pairs(const Dataset& dataset, std::size_t count, double positive_fraction,
                                         std::uint64_t seed) {
  if (!(positive_fraction > 0.0 && positive_fraction < 1.0)) {
    throw ConfigError("positive_fraction must lie strictly between 0 and 1");
  }
  std::set<int> sites;
  std::map<int, std::vector<std::size_t>> by_segment;
  std::map<int, std::set<int>> sites_by_segment;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples[i];
    sites.insert(s.site_id);
    by_segment[s.segment].push_back(i);
    sites_by_segment[s.segment].insert(s.site_id);
  }
  if (sites.size() < 2) throw ConfigError("pairing needs beats from at least two pacing sites");
  if (by_segment.size() < 2) throw ConfigError("pairing needs at least two segments for dissimilar pairs");

  // Similar pairs can only start from a segment recorded at two or more sites.
  std::vector<std::size_t> positive_anchor;
  for (const auto& [segment, members] : by_segment) {
    if (sites_by_segment[segment].size() >= 2) {
      positive_anchor.insert(positive_anchor.end(), members.begin(), members.end());
    }
  }
  if (positive_anchor.empty()) throw ConfigError("no segment is recorded at two different sites; no similar pairs possible");
  std::sort(positive_anchor.begin(), positive_anchor.end());

  std::vector<TrainingPair> pairs;
  pairs.reserve(count);
  for (std::size_t slot = 0; slot < count; ++slot) {
    Rng rng(derive_seed(seed, Stream::pairs, slot));
    const bool similar = std::bernoulli_distribution(positive_fraction)(rng);
    bool found = false;
    for (int tries = 0; tries < kMaxTries && !found; ++tries) {
      TrainingPair p;
      p.similar = similar;
      if (similar) {
        p.first = positive_anchor[pick(rng, positive_anchor.size())];
        const auto& same = by_segment[dataset.samples[p.first].segment];
        p.second = same[pick(rng, same.size())];
      } else {
        p.first = pick(rng, dataset.size());
        p.second = pick(rng, dataset.size());
      }
      const auto& a = dataset.samples[p.first];
      const auto& b = dataset.samples[p.second];
      if (a.site_id != b.site_id && (a.segment == b.segment) == similar) {
        pairs.push_back(p);
        found = true;
      }
    }
    if (!found) throw ConfigError("pair slot " + std::to_string(slot) + " could not satisfy the pairing constraint");
  }
  return pairs;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n_pairs, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch) {
  if (batch_size < 2) throw ConfigError("batch_size must be at least 2");
  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, Stream::shuffle, epoch));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start + batch_size <= n_pairs; start += batch_size) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(start + batch_size));
  }
  return batches;
}

PairBatch make_batch(const Dataset& dataset, std::span<const TrainingPair> pairs, std::span<const std::size_t> members) {
  std::vector<std::size_t> first;
  std::vector<std::size_t> second;
  PairBatch batch;
  batch.similar = Tensor({members.size()});
  for (std::size_t i = 0; i < members.size(); ++i) {
    const TrainingPair& p = pairs[members[i]];
    first.push_back(p.first);
    second.push_back(p.second);
    batch.similar[i] = p.similar ? 1.0 : 0.0;
    batch.first_segment.push_back(dataset.samples[p.first].segment);
    batch.second_segment.push_back(dataset.samples[p.second].segment);
  }
  batch.first = dataset.signals(first);
  batch.second = dataset.signals(second);
  batch.members.assign(members.begin(), members.end());
  return batch;
}

std::vector<PairBatch> batch_pairs(const Dataset& dataset, std::span<const TrainingPair> pairs, std::size_t batch_size,
                                   std::uint64_t seed, std::size_t epoch) {
  std::vector<PairBatch> out;
  for (const auto& members : batch_indices(pairs.size(), batch_size, seed, epoch)) {
    out.push_back(make_batch(dataset, pairs, members));
  }
  return out;
}

}  // namespace dcvae
