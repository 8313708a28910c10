#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>

namespace wuxing {

/// Number of elements (J, S, M, H, T) in one neuron.
inline constexpr std::size_t kElements = 5;

/// Maps any integer offset onto the cyclic element ring 0..4.
constexpr std::size_t wrap(long long i) noexcept {
  const long long n = static_cast<long long>(kElements);
  return static_cast<std::size_t>(((i % n) + n) % n);
}

/// Five reals indexed by cyclic element position. Offsets beyond 0..4 wrap,
/// so `shifted(-1)` is the "E^{-1}" relabelling {T, J, S, M, H}.
struct ElementVector {
  std::array<double, kElements> v{};

  static constexpr ElementVector filled(double x) noexcept {
    ElementVector e;
    e.v.fill(x);
    return e;
  }

  constexpr double& operator[](std::size_t i) noexcept { return v[i]; }
  constexpr double operator[](std::size_t i) const noexcept { return v[i]; }

  /// Value at element i + offset (mod 5).
  constexpr double at(long long i) const noexcept { return v[wrap(i)]; }

  /// Vector whose entry i is this vector's entry i + offset.
  constexpr ElementVector shifted(long long offset) const noexcept {
    ElementVector out;
    for (std::size_t i = 0; i < kElements; ++i) out.v[i] = at(static_cast<long long>(i) + offset);
    return out;
  }

  std::span<const double, kElements> span() const noexcept { return v; }
  std::span<double, kElements> span() noexcept { return v; }

  bool all_finite() const noexcept {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }

  double sum() const noexcept {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }

  friend constexpr ElementVector operator+(ElementVector a, const ElementVector& b) noexcept {
    for (std::size_t i = 0; i < kElements; ++i) a.v[i] += b.v[i];
    return a;
  }
  friend constexpr ElementVector operator-(ElementVector a, const ElementVector& b) noexcept {
    for (std::size_t i = 0; i < kElements; ++i) a.v[i] -= b.v[i];
    return a;
  }
  friend constexpr ElementVector operator*(double s, ElementVector a) noexcept {
    for (double& x : a.v) x *= s;
    return a;
  }
  friend constexpr bool operator==(const ElementVector&, const ElementVector&) = default;
};

}  // namespace wuxing
