#pragma once

#include <cstddef>

#include "wuxing/element_vector.hpp"

namespace wuxing {

/// The three trainable parameter sets of one neuron. Entry i of k1 couples
/// element i-1 into i, k2 is element i's self-attenuation and k3 the
/// inhibition of element i by element i-2.
struct NeuronParams {
  ElementVector k1;
  ElementVector k2;
  ElementVector k3;

  static constexpr NeuronParams uniform(double k1, double k2, double k3) noexcept {
    return {ElementVector::filled(k1), ElementVector::filled(k2), ElementVector::filled(k3)};
  }

  friend constexpr bool operator==(const NeuronParams&, const NeuronParams&) = default;
};

struct ClampBounds {
  double k_min = 1e-3;
  double k_max = 1e3;
};

/// Throws NumericDomainError unless every entry is finite, strictly positive
/// and within `bounds`.
void validate(const NeuronParams& p, const ClampBounds& bounds = {});

/// Which of the two mirror-image systems a neuron evolves under: the
/// forward equations, or the inverse equations used for the feedback pass.
enum class Dynamics { forward, inverse };

/// dE_i/dt = k1_i e_{i-1} - k2_i e_i - k3_i e_i e_{i-2} + input_i
ElementVector forward_derivative(const ElementVector& e, const NeuronParams& p,
                                 const ElementVector& input = {});

/// dE_i/dt = k1_{i+1} e_{i+1} - k2_i e_i - k3_{i+2} e_i e_{i+2} + input_i
ElementVector inverse_derivative(const ElementVector& e, const NeuronParams& p,
                                 const ElementVector& input = {});

ElementVector derivative(Dynamics dyn, const ElementVector& e, const NeuronParams& p,
                         const ElementVector& input = {});

/// Closed-form rest state (k1 - k2) / k3 of a neuron with uniform parameters.
/// Throws SingularParameterError when k3 == 0.
double analytic_fixed_point(double k1, double k2, double k3);

/// Per-element application of the closed form, aligned with `dyn`'s coupling.
/// Exact for uniform parameters; otherwise the seed for numeric_fixed_point.
ElementVector analytic_fixed_point_guess(const NeuronParams& p, Dynamics dyn = Dynamics::forward);

struct FixedPointOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100000;
};

struct FixedPoint {
  ElementVector b0;
  double residual = 0.0;  // max-norm of the unforced derivative at b0
  std::size_t iterations = 0;
  /// Largest real part among the Jacobian eigenvalues at b0; negative means
  /// the rest state is locally attracting.
  double spectral_abscissa = 0.0;
  bool stable() const noexcept { return spectral_abscissa < 0.0; }
};

/// Largest real part of the eigenvalues of the unforced Jacobian at e.
double spectral_abscissa(const ElementVector& e, const NeuronParams& p, Dynamics dyn);

/// Settles the unforced system by RK4 relaxation from the analytic guess,
/// handing over to Newton steps once close and polishing to round-off.
/// Relaxation picks out the attracting rest state; the trivial state e = 0
/// satisfies the same equations but repels, so a Newton result that is not
/// attracting sends the search back to relaxing with a tighter hand-over.
/// Throws FixedPointDivergenceError if `tol` is not reached within
/// `max_iter` relaxation and Newton steps combined.
FixedPoint numeric_fixed_point(const NeuronParams& p, Dynamics dyn = Dynamics::forward,
                               const FixedPointOptions& opts = {});

/// Deviation signal D = e - b0.
inline ElementVector deviation(const ElementVector& e, const ElementVector& b0) noexcept {
  return e - b0;
}

}  // namespace wuxing
