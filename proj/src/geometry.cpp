#include "kpkvb/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace kpkvb {

namespace {

// Relative slack accepted when checking strip/disk membership of values that
// were produced by floating-point maps.
constexpr double kDomainSlack = 1e-12;

}  // namespace

double radius_R(std::uint64_t n, double nu) {
  if (!(nu > 0.0)) throw InvalidParameters("nu must be positive");
  if (!(static_cast<double>(n) > nu))
    throw InvalidParameters("N must exceed nu (N <= nu gives R <= 0): N=" + std::to_string(n) +
                            ", nu=" + std::to_string(nu));
  return 2.0 * std::log(static_cast<double>(n) / nu);
}

ModelParams::ModelParams(std::uint64_t n_vertices, double alpha, double nu)
    : n_(n_vertices), alpha_(alpha), nu_(nu), radius_(0.0), lambda_(0.0) {
  if (n_vertices == 0) throw InvalidParameters("N must be positive");
  if (!(alpha > 0.0)) throw InvalidParameters("alpha must be positive");
  radius_ = radius_R(n_vertices, nu);
  lambda_ = nu * alpha / kPi;
}

double ModelParams::strip_width() const noexcept { return kPi * std::exp(radius_ / 2.0); }

double normalize_angle(double theta) noexcept {
  if (theta > -kPi && theta <= kPi) return theta;
  double t = std::remainder(theta, 2.0 * kPi);  // in [-pi, pi]
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

double angular_distance(double a, double b) noexcept {
  double d = std::fabs(a - b);
  if (d > kPi) d = 2.0 * kPi - d;
  return d;
}

double circular_distance(double a, double b, double period) noexcept {
  double d = std::fmod(std::fabs(a - b), period);
  return std::min(d, period - d);
}

double stable_acosh(double z) noexcept {
  if (z <= 1.0) return 0.0;
  if (z > 1e8) return std::log(2.0 * z) + std::log1p(std::sqrt(1.0 - 1.0 / (z * z))) - kLn2;
  return std::acosh(z);
}

double acosh_of_exp(double log_z) noexcept {
  if (log_z < 18.0) return stable_acosh(std::exp(log_z));
  // z > 6e7: arcosh z = ln(2z) + ln((1 + sqrt(1 - z^-2)) / 2).
  return log_z + std::log1p(std::sqrt(1.0 - std::exp(-2.0 * log_z)));
}

double log_cosh_minus_one(double x) noexcept {
  x = std::fabs(x);
  if (x < 1.0) return std::log(std::cosh(x) - 1.0);
  // cosh x - 1 = e^x (1 - e^{-x})^2 / 2
  return x - kLn2 + 2.0 * std::log1p(-std::exp(-x));
}

double hyperbolic_distance(const PolarPoint& p, const PolarPoint& q) noexcept {
  const double half_dr = std::fabs(p.r - q.r) / 2.0;
  const double s = std::sin(angular_distance(p.theta, q.theta) / 2.0);
  if (p.r + q.r < 700.0) {
    const double sh = std::sinh(half_dr);
    const double v = sh * sh + std::sinh(p.r) * std::sinh(q.r) * s * s;
    return 2.0 * std::asinh(std::sqrt(v));
  }
  // log-domain: sinh^2(d/2) = A + B with both terms possibly huge.
  auto log_sinh = [](double x) { return x - kLn2 + std::log1p(-std::exp(-2.0 * x)); };
  const double log_a = half_dr > 0.0 ? 2.0 * log_sinh(half_dr) : -INFINITY;
  const double log_b = (s > 0.0 && p.r > 0.0 && q.r > 0.0)
                           ? log_sinh(p.r) + log_sinh(q.r) + 2.0 * std::log(s)
                           : -INFINITY;
  const double hi = std::max(log_a, log_b);
  if (hi == -INFINITY) return 0.0;
  const double log_v = hi + std::log1p(std::exp(std::min(log_a, log_b) - hi));
  // asinh(sqrt(v)) = ln(sqrt(v)) + ln(1 + sqrt(1 + 1/v))
  return 2.0 * (log_v / 2.0 + std::log1p(std::sqrt(1.0 + std::exp(-log_v))));
}

double quasi_uniform_radius(double u, double alpha, double R) noexcept {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return R;
  const double ar = alpha * R;
  if (ar < 30.0) {
    return stable_acosh(1.0 + u * (std::cosh(ar) - 1.0)) / alpha;
  }
  // ln z with z = 1 + u (cosh(aR) - 1), evaluated without overflow
  const double log_term = std::log(u) + log_cosh_minus_one(ar);
  const double log_z = log_term + std::log1p(std::exp(-log_term));
  return std::min(R, acosh_of_exp(log_z) / alpha);
}

PolarPoint sample_quasi_uniform(const ModelParams& params, Rng& rng) {
  const double theta = kPi - 2.0 * kPi * rng.uniform();  // (-pi, pi]
  const double r = quasi_uniform_radius(rng.uniform(), params.alpha(), params.radius());
  return {r, theta};
}

StripPoint psi(const PolarPoint& p, double R) {
  if (p.r < 0.0 || p.r > R) throw DomainError("psi: point lies outside the disk D_R");
  return {p.theta * 0.5 * std::exp(R / 2.0), R - p.r};
}

PolarPoint psi_inverse(const StripPoint& s, double R) {
  const double half_width = kPi / 2.0 * std::exp(R / 2.0);
  const double slack = kDomainSlack * half_width;
  if (!(s.y >= 0.0 && s.y <= R) || !(s.x > -half_width - slack && s.x <= half_width + slack))
    throw DomainError("psi_inverse: point lies outside the strip E_R");
  const double theta = std::clamp(2.0 * s.x * std::exp(-R / 2.0), -kPi, kPi);
  return {R - s.y, theta == -kPi ? kPi : theta};
}

}  // namespace kpkvb
