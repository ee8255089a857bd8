#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pairtest {

// SplitMix64 finalizer; avalanches a 64-bit word.
std::uint64_t mix64(std::uint64_t x);

// Order-sensitive fold of a value into a running seed. Used to derive
// independent stream seeds from (master_seed, comparison, plan, replicate)
// tuples so that adding inputs never perturbs existing streams.
std::uint64_t combine_seed(std::uint64_t h, std::uint64_t v);

// FNV-1a over bytes; folds string identifiers into seeds and digests files.
std::uint64_t fnv1a(std::string_view bytes);

/// Deterministic random stream.
///
/// The engine (std::mt19937_64 with single-word seeding) is fully specified
/// by the standard, and every distribution below is implemented here rather
/// than taken from <random>, so a given seed produces the same sequence on
/// every platform and standard library.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on (0,1), strictly interior.
  double uniform_open();
  // Unbiased uniform integer on [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n);
  // Standard normal via inverse-CDF transform (one engine draw per variate).
  double normal();
  // Gamma(shape, scale) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double scale);

 private:
  std::mt19937_64 engine_;
};

}  // namespace pairtest
