#pragma once

#include <cstdint>
#include <random>

#include "dcvae/tensor.hpp"

namespace dcvae {

using Rng = std::mt19937_64;

/// Stream identifiers mixed into derive_seed so that independent consumers of
/// one run seed never share a random stream.
enum class Stream : std::uint64_t {
  init = 1,
  pairs = 2,
  shuffle = 3,
  noise = 4,
  synth = 5,
  split = 6,
  probe = 7,
  swap = 8,
  gradcheck = 9,
};

/// Deterministic sub-seed from a base seed, a stream and up to two indices
/// (e.g. epoch and step). splitmix64 finalizer over the combined words.
std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t i = 0, std::uint64_t j = 0);

/// Standard normal draws scaled by stddev.
Tensor normal_tensor(Shape shape, Rng& rng, double stddev = 1.0);

/// Uniform draw in [lo, hi]; returns lo when the range is degenerate.
double uniform(Rng& rng, double lo, double hi);

}  // namespace dcvae
