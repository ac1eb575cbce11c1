#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "kpkvb/geometry.hpp"

using namespace kpkvb;

TEST_SUITE("geometry") {

TEST_CASE("radius from N and nu") {
  CHECK(radius_R(200, 1.3) == doctest::Approx(2.0 * std::log(200.0 / 1.3)).epsilon(1e-15));
  CHECK(radius_R(200, 1.3) == doctest::Approx(10.0719062).epsilon(1e-8));
  CHECK(radius_R(1, std::exp(-1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(radius_R(100, 100.0), InvalidParameters);
  CHECK_THROWS_AS(radius_R(10, 0.0), InvalidParameters);
}

TEST_CASE("model parameters derive lambda") {
  ModelParams p(200, 0.8, 1.3);
  CHECK(p.lambda() == doctest::Approx(1.3 * 0.8 / kPi));
  CHECK(std::exp(p.radius() / 2.0) == doctest::Approx(200.0 / 1.3));
  CHECK(p.strip_width() / 2.0 == doctest::Approx(241.66097).epsilon(1e-7));
}

TEST_CASE("hyperbolic distance special cases") {
  PolarPoint p{5.0, 0.3};
  CHECK(hyperbolic_distance(p, p) == 0.0);
  for (double r : {0.5, 3.0, 12.0, 40.0}) {
    CHECK(hyperbolic_distance({0.0, 1.0}, {r, -2.0}) == doctest::Approx(r).epsilon(1e-12));
    const double expected = std::acosh(std::cosh(r) * std::cosh(r) + std::sinh(r) * std::sinh(r));
    if (std::isfinite(expected))
      CHECK(hyperbolic_distance({r, 0.0}, {r, kPi}) == doctest::Approx(expected).epsilon(1e-12));
  }
  // antipodal at large r: 2r exactly in the limit
  CHECK(hyperbolic_distance({400.0, 0.0}, {400.0, kPi}) == doctest::Approx(800.0).epsilon(1e-12));
}

TEST_CASE("hyperbolic distance agrees with the law of cosines") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    PolarPoint a{rng.uniform() * 8.0, kPi - 2 * kPi * rng.uniform()};
    PolarPoint b{rng.uniform() * 8.0, kPi - 2 * kPi * rng.uniform()};
    const double c = std::cosh(a.r) * std::cosh(b.r) - std::sinh(a.r) * std::sinh(b.r) * std::cos(a.theta - b.theta);
    CHECK(hyperbolic_distance(a, b) == doctest::Approx(std::acosh(std::max(1.0, c))).epsilon(1e-6));
  }
}

TEST_CASE("hyperbolic distance is a metric on samples") {
  Rng rng(3);
  double worst = 0.0;
  for (int i = 0; i < 20000; ++i) {
    PolarPoint a{rng.uniform() * 60.0, kPi - 2 * kPi * rng.uniform()};
    PolarPoint b{rng.uniform() * 60.0, kPi - 2 * kPi * rng.uniform()};
    PolarPoint c{rng.uniform() * 60.0, kPi - 2 * kPi * rng.uniform()};
    REQUIRE(hyperbolic_distance(a, b) == hyperbolic_distance(b, a));
    CHECK(hyperbolic_distance(a, b) >= 0.0);
    worst = std::max(worst, hyperbolic_distance(a, c) - hyperbolic_distance(a, b) - hyperbolic_distance(b, c));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("stable arcosh matches std::acosh and survives huge arguments") {
  for (double z : {1.0, 1.5, 10.0, 1e7, 1e9, 1e15})
    CHECK(stable_acosh(z) == doctest::Approx(std::acosh(z)).epsilon(1e-13));
  CHECK(acosh_of_exp(1000.0) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
  CHECK(std::isfinite(log_cosh_minus_one(5000.0)));
}

TEST_CASE("quasi-uniform inverse CDF") {
  const double R = radius_R(200, 1.3);
  CHECK(quasi_uniform_radius(0.0, 0.8, R) == 0.0);
  CHECK(quasi_uniform_radius(1.0, 0.8, R) == R);
  CHECK(quasi_uniform_radius(0.5, 1.0, R) == doctest::Approx(9.37884).epsilon(1e-5));
  CHECK(quasi_uniform_radius(0.5, 1.0, 10.07202) == doctest::Approx(9.379).epsilon(1e-4));
  // log-domain branch agrees with direct evaluation near the switch
  const double direct = std::acosh(1.0 + 0.3 * (std::cosh(29.0) - 1.0));
  CHECK(quasi_uniform_radius(0.3, 1.0, 29.0) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(quasi_uniform_radius(0.3, 1.0, 31.0) == doctest::Approx(std::acosh(1.0 + 0.3 * (std::cosh(31.0) - 1.0))).epsilon(1e-12));
}

TEST_CASE("radial law for alpha = 1 passes a KS check") {
  ModelParams p(200, 1.0, 1.3);
  const double R = p.radius();
  Rng rng(2024);
  std::vector<double> r(100000);
  for (auto& v : r) {
    const auto pt = sample_quasi_uniform(p, rng);
    CHECK_UNARY(pt.theta > -kPi);
    CHECK_UNARY(pt.theta <= kPi);
    v = pt.r;
  }
  std::sort(r.begin(), r.end());
  double ks = 0.0;
  const double n = static_cast<double>(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double F = (std::cosh(r[i]) - 1.0) / (std::cosh(R) - 1.0);
    ks = std::max({ks, std::fabs(F - i / n), std::fabs(F - (i + 1) / n)});
  }
  CHECK(ks < 0.01);
}

TEST_CASE("psi and its inverse") {
  const double R = radius_R(200, 1.3);
  CHECK(psi({R, 0.0}, R) == StripPoint{0.0, 0.0});
  const auto top = psi({0.0, 1.2}, R);
  CHECK(top.x == doctest::Approx(1.2 * std::exp(R / 2) / 2));
  CHECK(top.y == R);
  const auto edge = psi({3.0, kPi}, R);
  CHECK(edge.x == doctest::Approx(241.66).epsilon(1e-4));
  CHECK(edge.y == doctest::Approx(R - 3.0));
  CHECK_THROWS_AS(psi({R + 0.1, 0.0}, R), DomainError);

  const auto origin = psi_inverse({0.0, 0.0}, R);
  CHECK(origin.r == R);
  CHECK(origin.theta == 0.0);
  const auto back = psi_inverse({241.66, 0.0}, R);
  CHECK(back.r == doctest::Approx(R));
  CHECK(back.theta == doctest::Approx(kPi).epsilon(1e-4));
  CHECK_THROWS_AS(psi_inverse({0.0, R + 1.0}, R), DomainError);
  CHECK_THROWS_AS(psi_inverse({300.0, 1.0}, R), DomainError);

  Rng rng(5);
  ModelParams p(200, 0.8, 1.3);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto pt = sample_quasi_uniform(p, rng);
    const auto s = psi(pt, R);
    const auto s2 = psi(psi_inverse(s, R), R);
    worst = std::max({worst, std::fabs(s2.x - s.x), std::fabs(s2.y - s.y)});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("angle helpers") {
  CHECK(normalize_angle(-kPi) == kPi);
  CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(0.5) == 0.5);
  CHECK(angular_distance(kPi - 0.1, -kPi + 0.1) == doctest::Approx(0.2));
  CHECK(circular_distance(-9.9, 9.9, 20.0) == doctest::Approx(0.2));
}

TEST_CASE("seeded sources reproduce their streams") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.bits();
    CHECK(x == b.bits());
    differs = differs || x != c.bits();
  }
  CHECK(differs);
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("poisson draws have the right mean") {
  Rng rng(9);
  double sum = 0.0;
  const int runs = 10000;
  for (int i = 0; i < runs; ++i) sum += static_cast<double>(rng.poisson(100.0));
  CHECK(std::fabs(sum / runs - 100.0) < 3.0 * 10.0 / std::sqrt(runs));
  CHECK(rng.poisson(0.0) == 0);
}

}
