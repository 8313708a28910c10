#include "wuxing/neuron.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "wuxing/errors.hpp"
#include "wuxing/integrator.hpp"

namespace wuxing {
namespace {

using Matrix5 = std::array<std::array<double, kElements>, kElements>;

void require_finite(const ElementVector& e, const char* what) {
  if (!e.all_finite()) throw NumericDomainError(std::string("non-finite ") + what);
}

void require_finite(const NeuronParams& p) {
  require_finite(p.k1, "k1");
  require_finite(p.k2, "k2");
  require_finite(p.k3, "k3");
}

Matrix5 jacobian(Dynamics dyn, const ElementVector& e, const NeuronParams& p) {
  Matrix5 j{};
  for (std::size_t i = 0; i < kElements; ++i) {
    const auto ii = static_cast<long long>(i);
    if (dyn == Dynamics::forward) {
      const std::size_t prev = wrap(ii - 1), prev2 = wrap(ii - 2);
      j[i][prev] += p.k1[i];
      j[i][i] += -p.k2[i] - p.k3[i] * e[prev2];
      j[i][prev2] += -p.k3[i] * e[i];
    } else {
      const std::size_t next = wrap(ii + 1), next2 = wrap(ii + 2);
      j[i][next] += p.k1[next];
      j[i][i] += -p.k2[i] - p.k3[next2] * e[next2];
      j[i][next2] += -p.k3[next2] * e[i];
    }
  }
  return j;
}

// Solves a x = b by Gaussian elimination with partial pivoting.
bool solve(Matrix5 a, ElementVector b, ElementVector& x) {
  for (std::size_t col = 0; col < kElements; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < kElements; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < kElements; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < kElements; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = kElements; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < kElements; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x.all_finite();
}

}  // namespace

void validate(const NeuronParams& p, const ClampBounds& bounds) {
  require_finite(p);
  for (const ElementVector* set : {&p.k1, &p.k2, &p.k3})
    for (double k : set->v)
      if (!(k > 0.0) || k < bounds.k_min || k > bounds.k_max)
        throw NumericDomainError("parameter " + std::to_string(k) + " outside [" +
                                 std::to_string(bounds.k_min) + ", " +
                                 std::to_string(bounds.k_max) + "]");
}

ElementVector forward_derivative(const ElementVector& e, const NeuronParams& p,
                                 const ElementVector& input) {
  require_finite(e, "state");
  require_finite(input, "input");
  ElementVector d;
  for (std::size_t i = 0; i < kElements; ++i) {
    const auto ii = static_cast<long long>(i);
    d[i] = p.k1[i] * e.at(ii - 1) - p.k2[i] * e[i] - p.k3[i] * e[i] * e.at(ii - 2) + input[i];
  }
  return d;
}

ElementVector inverse_derivative(const ElementVector& e, const NeuronParams& p,
                                 const ElementVector& input) {
  require_finite(e, "state");
  require_finite(input, "input");
  ElementVector d;
  for (std::size_t i = 0; i < kElements; ++i) {
    const auto ii = static_cast<long long>(i);
    d[i] = p.k1.at(ii + 1) * e.at(ii + 1) - p.k2[i] * e[i] -
           p.k3.at(ii + 2) * e[i] * e.at(ii + 2) + input[i];
  }
  return d;
}

ElementVector derivative(Dynamics dyn, const ElementVector& e, const NeuronParams& p,
                         const ElementVector& input) {
  return dyn == Dynamics::forward ? forward_derivative(e, p, input)
                                  : inverse_derivative(e, p, input);
}

double analytic_fixed_point(double k1, double k2, double k3) {
  if (k3 == 0.0) throw SingularParameterError("k3 must be nonzero for a finite fixed point");
  return (k1 - k2) / k3;
}

ElementVector analytic_fixed_point_guess(const NeuronParams& p, Dynamics dyn) {
  ElementVector b;
  for (std::size_t i = 0; i < kElements; ++i) {
    const auto ii = static_cast<long long>(i);
    b[i] = dyn == Dynamics::forward
               ? analytic_fixed_point(p.k1[i], p.k2[i], p.k3[i])
               : analytic_fixed_point(p.k1.at(ii + 1), p.k2[i], p.k3.at(ii + 2));
  }
  return b;
}

double spectral_abscissa(const ElementVector& e, const NeuronParams& p, Dynamics dyn) {
  const Matrix5 j = jacobian(dyn, e, p);
  Eigen::Matrix<double, 5, 5> m;
  for (std::size_t r = 0; r < kElements; ++r)
    for (std::size_t c = 0; c < kElements; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c];
  const Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> solver(m, false);
  return solver.eigenvalues().real().maxCoeff();
}

FixedPoint numeric_fixed_point(const NeuronParams& p, Dynamics dyn, const FixedPointOptions& opts) {
  require_finite(p);
  if (!(opts.tol > 0.0)) throw NumericDomainError("fixed-point tolerance must be positive");

  const auto f = [&](const ElementVector& e) { return derivative(dyn, e, p); };
  const ElementVector guess = analytic_fixed_point_guess(p, dyn);

  // Relaxation step sized to a Gershgorin bound on the local Jacobian, so
  // RK4 stays inside its stability region as the state moves.
  const auto relax_h = [&](const ElementVector& e) {
    const Matrix5 j = jacobian(dyn, e, p);
    double rate = 0.0;
    for (const auto& row : j) {
      double r = 0.0;
      for (double v : row) r += std::abs(v);
      rate = std::max(rate, r);
    }
    return std::min(0.2, 1.0 / std::max(rate, 1e-12));
  };

  std::size_t iterations = 0;
  auto budget_left = [&] { return iterations < opts.max_iter; };

  ElementVector e = guess;
  double residual = f(e).max_abs();
  for (double handover : {1e-2, 1e-4, 1e-6, 0.0}) {
    const double target = std::max(handover, opts.tol);
    while (residual >= target && budget_left()) {
      try {
        e = integrate_step(f, e, relax_h(e));
      } catch (const DivergenceError&) {
        throw FixedPointDivergenceError("fixed-point relaxation diverged");
      }
      residual = f(e).max_abs();
      ++iterations;
    }

    ElementVector cand = e;
    double cand_res = residual;
    while (cand_res >= opts.tol && budget_left()) {
      ElementVector dx;
      if (!solve(jacobian(dyn, cand, p), f(cand), dx)) break;
      bool improved = false;
      for (double step = 1.0; step > 1e-4; step *= 0.5) {
        const ElementVector next = cand - step * dx;
        if (!next.all_finite()) continue;
        const double r = f(next).max_abs();
        if (r < cand_res) {
          cand = next;
          cand_res = r;
          improved = true;
          break;
        }
      }
      ++iterations;
      if (!improved) break;
    }
    if (cand_res < opts.tol && (spectral_abscissa(cand, p, dyn) < 0.0 || handover == 0.0)) {
      e = cand;
      residual = cand_res;
      break;
    }
    if (!budget_left()) break;
  }
  if (!(residual < opts.tol))
    throw FixedPointDivergenceError("fixed point not reached within " +
                                    std::to_string(opts.max_iter) +
                                    " iterations (residual " + std::to_string(residual) + ")");

  // Polish to round-off so an undriven neuron stays put over long horizons.
  for (int polish = 0; polish < 4 && residual > 0.0; ++polish) {
    ElementVector dx;
    if (!solve(jacobian(dyn, e, p), f(e), dx)) break;
    const ElementVector next = e - dx;
    const double r = next.all_finite() ? f(next).max_abs() : residual;
    if (!(r < residual)) break;
    e = next;
    residual = r;
  }

  FixedPoint fp;
  fp.b0 = e;
  fp.residual = residual;
  fp.iterations = iterations;
  fp.spectral_abscissa = spectral_abscissa(e, p, dyn);
  return fp;
}

}  // namespace wuxing
