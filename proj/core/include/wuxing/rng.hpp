#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>

namespace wuxing {

/// Every stochastic choice in the library draws from std::mt19937_64, whose
/// output sequence is fixed by the C++ standard. The helpers below avoid the
/// std:: distributions, whose algorithms are implementation-defined, so the
/// same seed reproduces the same graphs and splits on every platform.
using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling. n must be nonzero.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform_unit(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

/// Text round-trip of the full generator state.
std::string save_state(const Rng& rng);
Rng load_state(const std::string& text);

}  // namespace wuxing
