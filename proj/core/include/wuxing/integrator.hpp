#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wuxing/element_vector.hpp"
#include "wuxing/errors.hpp"

namespace wuxing {

/// Scratch buffers for one classical RK4 step over an n-dimensional state.
class Rk4Workspace {
public:
  explicit Rk4Workspace(std::size_t n = 0) { resize(n); }

  void resize(std::size_t n) {
    k1_.assign(n, 0.0);
    k2_.assign(n, 0.0);
    k3_.assign(n, 0.0);
    k4_.assign(n, 0.0);
    tmp_.assign(n, 0.0);
  }
  std::size_t size() const noexcept { return tmp_.size(); }

  /// Advances `state` by h in place. `deriv(y, dy)` writes dy/dt at y.
  /// The first stage derivative is left in k1() for callers that need it.
  template <class Deriv>
  void step(Deriv&& deriv, std::span<double> state, double h) {
    const std::size_t n = state.size();
    deriv(std::span<const double>(state), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + 0.5 * h * k1_[i];
    deriv(std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + 0.5 * h * k2_[i];
    deriv(std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = state[i] + h * k3_[i];
    deriv(std::span<const double>(tmp_), std::span<double>(k4_));
    const double w = h / 6.0;
    for (std::size_t i = 0; i < n; ++i)
      state[i] += w * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  std::span<const double> k1() const noexcept { return k1_; }

private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step of a single 5-element system. Throws DivergenceError
/// (tagged with `neuron` and the step's start time) if the result is not finite.
template <class Deriv>
ElementVector integrate_step(Deriv&& deriv, const ElementVector& e, double h,
                             std::size_t neuron = DivergenceError::npos, double t = 0.0) {
  if (!(h > 0.0)) throw NumericDomainError("integration step must be positive");
  const auto stage = [&](const ElementVector& y) {
    if (!y.all_finite()) throw DivergenceError(neuron, t);
    return deriv(y);
  };
  const ElementVector a = stage(e);
  const ElementVector b = stage(e + (0.5 * h) * a);
  const ElementVector c = stage(e + (0.5 * h) * b);
  const ElementVector d = stage(e + h * c);
  ElementVector out = e + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d);
  if (!out.all_finite()) throw DivergenceError(neuron, t);
  return out;
}

}  // namespace wuxing
