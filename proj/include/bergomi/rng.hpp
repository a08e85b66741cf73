#pragma once

// Reproducible random streams. Every consumer derives an independent engine
// from (seed, stream) so batches, blocks of Monte Carlo paths and test sets can
// be generated in any order, or in parallel, with identical results.

#include <boost/random/mersenne_twister.hpp>

#include <cstdint>

namespace bergomi {

using Rng = boost::random::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of stream `stream` (and optional sub-stream) of a run seeded with `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0);

/// Uniform on [lo, hi] from the top 53 bits of one draw.
double uniform(Rng& rng, double lo, double hi);

/// Standard normal (ziggurat).
double std_normal(Rng& rng);

} // namespace bergomi
