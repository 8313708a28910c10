#include <doctest.h>

#include <cmath>

#include "oracles/frozen.hpp"
#include "wuxing/errors.hpp"
#include "wuxing/integrator.hpp"
#include "wuxing/neuron.hpp"

using namespace wuxing;

namespace {

ElementVector from(const std::array<double, 5>& a) { return ElementVector{a}; }

NeuronParams perturbed() { return {from(oracle::k1), from(oracle::k2), from(oracle::k3)}; }

ElementVector reversed(const ElementVector& v) {
  ElementVector r;
  for (std::size_t i = 0; i < kElements; ++i) r[i] = v.at(-static_cast<long long>(i));
  return r;
}

}  // namespace

TEST_SUITE("neuron") {
  TEST_CASE("rest state of the uniform neuron has zero derivative") {
    const auto p = NeuronParams::uniform(1.0, 0.5, 0.5);
    const ElementVector ones = ElementVector::filled(1.0);
    for (Dynamics dyn : {Dynamics::forward, Dynamics::inverse})
      CHECK(derivative(dyn, ones, p, {}).max_abs() == 0.0);
  }

  TEST_CASE("derivatives match reference values") {
    const auto e = from(oracle::probe_state);
    const auto u = from(oracle::probe_input);
    const auto df = forward_derivative(e, perturbed(), u);
    const auto di = inverse_derivative(e, perturbed(), u);
    for (std::size_t i = 0; i < kElements; ++i) {
      CHECK(df[i] == doctest::Approx(oracle::probe_forward_derivative[i]).epsilon(1e-14));
      CHECK(di[i] == doctest::Approx(oracle::probe_inverse_derivative[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("inverse system is the forward system under index reversal") {
    const auto e = from(oracle::probe_state);
    const auto u = from(oracle::probe_input);

    SUBCASE("uniform parameters") {
      const auto p = NeuronParams::uniform(1.3, 0.4, 0.7);
      const auto lhs = inverse_derivative(e, p, u);
      const auto rhs = reversed(forward_derivative(reversed(e), p, reversed(u)));
      for (std::size_t i = 0; i < kElements; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-14));
    }
    SUBCASE("non-uniform parameters, permuted") {
      const NeuronParams p = perturbed();
      NeuronParams q;
      for (std::size_t j = 0; j < kElements; ++j) {
        const auto jj = static_cast<long long>(j);
        q.k1[j] = p.k1.at(1 - jj);
        q.k2[j] = p.k2.at(-jj);
        q.k3[j] = p.k3.at(2 - jj);
      }
      const auto lhs = inverse_derivative(e, p, u);
      const auto rhs = reversed(forward_derivative(reversed(e), q, reversed(u)));
      for (std::size_t i = 0; i < kElements; ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-14));
    }
  }

  TEST_CASE("non-finite state or input is rejected") {
    const auto p = NeuronParams::uniform(1.0, 0.5, 0.5);
    ElementVector bad = ElementVector::filled(1.0);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(forward_derivative(bad, p, {}), NumericDomainError);
    CHECK_THROWS_AS(inverse_derivative(ElementVector::filled(1.0), p, bad), NumericDomainError);
  }

  TEST_CASE("one RK4 step of exponential decay") {
    const auto decay = [](const ElementVector& e) { return -1.0 * e; };
    const ElementVector one = ElementVector::filled(1.0);
    const ElementVector big = integrate_step(decay, one, 0.1);
    CHECK(std::abs(big[0] - std::exp(-0.1)) < 1e-7);
    // RK4 reproduces the degree-4 Taylor polynomial of exp(-h).
    CHECK(big[0] == doctest::Approx(1 - 0.1 + 0.005 - 0.1 * 0.1 * 0.1 / 6 + 1e-4 / 24).epsilon(1e-15));
    ElementVector e = one;
    for (int i = 0; i < 10; ++i) e = integrate_step(decay, e, 0.01);
    CHECK(std::abs(e[4] - std::exp(-0.1)) < 1e-11);
  }

  TEST_CASE("driven trajectory follows the reference solution") {
    const NeuronParams p = perturbed();
    const auto u = from(oracle::drive_input);
    const auto f = [&](const ElementVector& e) { return forward_derivative(e, p, u); };
    ElementVector e = from(oracle::rest_forward);
    const int steps = static_cast<int>(std::lround(oracle::drive_horizon / 0.01));
    for (int i = 0; i < steps; ++i) e = integrate_step(f, e, 0.01);
    for (std::size_t i = 0; i < kElements; ++i)
      CHECK(std::abs(e[i] - oracle::drive_state_at_horizon[i]) < 1e-9);
  }

  TEST_CASE("integrate_step reports divergence and rejects bad steps") {
    const auto blowup = [](const ElementVector& e) { return 1e300 * e; };
    CHECK_THROWS_AS(integrate_step(blowup, ElementVector::filled(1e10), 1.0, 7, 2.5), DivergenceError);
    try {
      integrate_step(blowup, ElementVector::filled(1e10), 1.0, 7, 2.5);
    } catch (const DivergenceError& err) {
      CHECK(err.neuron() == 7);
      CHECK(err.time() == 2.5);
    }
    const auto still = [](const ElementVector&) { return ElementVector{}; };
    CHECK_THROWS_AS(integrate_step(still, ElementVector{}, 0.0), NumericDomainError);
    CHECK_THROWS_AS(integrate_step(still, ElementVector{}, -0.1), NumericDomainError);
  }

  TEST_CASE("closed-form rest state") {
    CHECK(analytic_fixed_point(1.0, 0.5, 0.5) == 1.0);
    CHECK(analytic_fixed_point(0.7, 0.7, 2.0) == 0.0);
    CHECK_THROWS_AS(analytic_fixed_point(1.0, 0.5, 0.0), SingularParameterError);
  }

  TEST_CASE("numeric rest state of the uniform neuron") {
    const FixedPoint fp = numeric_fixed_point(NeuronParams::uniform(1.0, 0.5, 0.5));
    for (double b : fp.b0.v) CHECK(std::abs(b - 1.0) < 1e-8);
    CHECK(fp.residual < 1e-8);
    CHECK(fp.stable());
  }

  TEST_CASE("numeric rest states of a perturbed neuron match the reference") {
    const FixedPoint f = numeric_fixed_point(perturbed(), Dynamics::forward);
    const FixedPoint b = numeric_fixed_point(perturbed(), Dynamics::inverse);
    for (std::size_t i = 0; i < kElements; ++i) {
      CHECK(std::abs(f.b0[i] - oracle::rest_forward[i]) < 1e-10);
      CHECK(std::abs(b.b0[i] - oracle::rest_inverse[i]) < 1e-10);
    }
    CHECK(f.stable());
    CHECK(b.stable());
  }

  TEST_CASE("the origin is a rest state but never the one returned") {
    const auto p = NeuronParams::uniform(1.0, 0.5, 0.5);
    CHECK(forward_derivative(ElementVector{}, p, {}).max_abs() == 0.0);
    CHECK(spectral_abscissa(ElementVector{}, p, Dynamics::forward) > 0.0);
    NeuronParams skew = p;
    skew.k3 = ElementVector{{0.05, 3.0, 0.05, 3.0, 0.05}};
    const FixedPoint fp = numeric_fixed_point(skew);
    CHECK(fp.stable());
    CHECK(fp.b0.max_abs() > 0.1);
  }

  TEST_CASE("parameter validation") {
    CHECK_NOTHROW(validate(NeuronParams::uniform(1.0, 0.5, 0.5)));
    CHECK_THROWS_AS(validate(NeuronParams::uniform(1.0, -0.5, 0.5)), NumericDomainError);
    CHECK_THROWS_AS(validate(NeuronParams::uniform(1.0, 0.5, 2e3)), NumericDomainError);
    CHECK_THROWS_AS(validate(NeuronParams::uniform(std::nan(""), 0.5, 0.5)), NumericDomainError);
  }
}
