#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace covacast {

// Distribution helpers are written out here because the std:: distributions
// are implementation-defined; these give identical streams on every platform.

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Mixes a base seed with a path of indices into an independent child seed.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

/// Unbiased integer in [0, n); n > 0.
[[nodiscard]] std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

/// Uniform real in [0, 1).
[[nodiscard]] double uniform_unit(std::mt19937_64& rng);

/// Standard normal via Box-Muller.
[[nodiscard]] double standard_normal(std::mt19937_64& rng);

/// `k` distinct indices drawn uniformly from [0, n), returned sorted.
[[nodiscard]] std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                                  std::uint64_t seed);

}  // namespace covacast
