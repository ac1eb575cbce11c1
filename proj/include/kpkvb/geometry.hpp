#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kpkvb/random.hpp"

namespace kpkvb {

struct InvalidParameters : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kLn2 = std::numbers::ln2;

/// R = 2 ln(n / nu). Throws InvalidParameters unless n > nu.
double radius_R(std::uint64_t n, double nu);

/// Model parameters (N, alpha, nu) with the derived disk radius and
/// idealized-model intensity constant.
class ModelParams {
 public:
  ModelParams(std::uint64_t n_vertices, double alpha, double nu);

  std::uint64_t n_vertices() const noexcept { return n_; }
  double alpha() const noexcept { return alpha_; }
  double nu() const noexcept { return nu_; }
  double radius() const noexcept { return radius_; }
  /// lambda = nu * alpha / pi.
  double lambda() const noexcept { return lambda_; }
  /// Strip width pi * e^{R/2}.
  double strip_width() const noexcept;

 private:
  std::uint64_t n_;
  double alpha_;
  double nu_;
  double radius_;
  double lambda_;
};

/// Hyperbolic polar coordinates; theta in (-pi, pi].
struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
  friend bool operator==(const PolarPoint&, const PolarPoint&) = default;
};

/// Point of the strip (-W/2, W/2] x [0, R], W = pi e^{R/2}.
struct StripPoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const StripPoint&, const StripPoint&) = default;
};

/// Maps an angle to (-pi, pi].
double normalize_angle(double theta) noexcept;

/// Absolute angular difference in [0, pi].
double angular_distance(double a, double b) noexcept;

/// Distance |a - b| modulo period, in [0, period/2].
double circular_distance(double a, double b, double period) noexcept;

/// arcosh(z) for z >= 1, switching to ln(2z) + ln((1 + sqrt(1 - z^-2)) / 2)
/// for large z.
double stable_acosh(double z) noexcept;

/// arcosh(exp(log_z)) without forming exp(log_z) when it would overflow.
double acosh_of_exp(double log_z) noexcept;

/// ln(cosh(x) - 1) for x > 0, finite for any x that fits in a double.
double log_cosh_minus_one(double x) noexcept;

/// Hyperbolic distance between two points given in polar coordinates.
///
/// Uses cosh d - 1 = 2 sinh^2((r-r')/2) + 2 sinh r sinh r' sin^2(dtheta/2), which is
/// accurate near d = 0 and symmetric bit-for-bit in its arguments. Falls back to
/// log-domain evaluation when sinh r sinh r' would overflow.
double hyperbolic_distance(const PolarPoint& p, const PolarPoint& q) noexcept;

/// Radius from the quasi-uniform inverse CDF at u in [0,1]:
/// (1/alpha) arcosh(1 + u (cosh(alpha R) - 1)).
double quasi_uniform_radius(double u, double alpha, double R) noexcept;

/// One point of the (alpha, R)-quasi-uniform distribution. Consumes exactly two
/// uniforms: the angle first, then the radius.
PolarPoint sample_quasi_uniform(const ModelParams& params, Rng& rng);

/// (r, theta) -> (theta e^{R/2} / 2, R - r). Throws DomainError if r is outside [0, R].
StripPoint psi(const PolarPoint& p, double R);

/// Inverse of psi. Throws DomainError outside the strip.
PolarPoint psi_inverse(const StripPoint& s, double R);

}  // namespace kpkvb
