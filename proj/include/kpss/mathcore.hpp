#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>

#include <Eigen/Core>

#include "kpss/rng.hpp"

namespace kpss {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Point = Eigen::VectorXd;

/// Euclidean norm that stays finite when squared coordinates overflow.
double radius_of(const Point& x);

/// A point on the unit sphere S^{d-1}.
class Direction {
 public:
  /// Normalizes `v`; throws DomainError for the zero vector.
  explicit Direction(Point v);

  [[nodiscard]] const Point& coords() const { return coords_; }
  [[nodiscard]] Eigen::Index dim() const { return coords_.size(); }
  [[nodiscard]] double operator[](Eigen::Index i) const { return coords_[i]; }

 private:
  Point coords_;
};

/// A strictly increasing, convex function phi on (0, kappa).
///
/// `inf()` and `sup()` are the limits of phi at 0 and at kappa. A closed-form
/// inverse is optional; without one, inversion falls back to bisection.
class PhiSpec {
 public:
  using Fn = std::function<double(double)>;

  PhiSpec(Fn eval, double kappa, double inf_phi, double sup_phi, Fn inverse = {});

  /// phi(r) = slope * r + offset.
  static PhiSpec linear(double slope, double offset = 0.0, double kappa = kInf);
  /// phi(r) = scale * r^exponent + offset, exponent >= 1.
  static PhiSpec power(double scale, double exponent, double offset = 0.0, double kappa = kInf);
  /// phi(r) = scale * (exp(rate * r) - 1) + offset.
  static PhiSpec exponential(double scale, double rate, double offset = 0.0, double kappa = kInf);

  double operator()(double r) const { return eval_(r); }

  [[nodiscard]] double kappa() const { return kappa_; }
  [[nodiscard]] double inf() const { return inf_; }
  [[nodiscard]] double sup() const { return sup_; }
  [[nodiscard]] bool has_closed_inverse() const { return static_cast<bool>(inverse_); }
  [[nodiscard]] const Fn& closed_inverse() const { return inverse_; }

  /// Slope when phi is affine; lets stationary draws use a Gamma law.
  [[nodiscard]] std::optional<double> linear_slope() const { return linear_slope_; }

 private:
  Fn eval_;
  Fn inverse_;
  double kappa_;
  double inf_;
  double sup_;
  std::optional<double> linear_slope_;
};

enum class InverseMethod { automatic, bisection };

/// phi^{-1}(s) for s in (inf phi, sup phi).
double phi_inverse(const PhiSpec& phi, double s, InverseMethod method = InverseMethod::automatic);

/// Extension of phi^{-1} to (inf phi, inf): returns kappa once s >= sup phi.
double phi_inverse_extended(const PhiSpec& phi, double s,
                            InverseMethod method = InverseMethod::automatic);

Direction sample_unit_sphere(int d, RngStream& rng);

/// omega_d = 2 pi^{d/2} / Gamma(d/2).
double surface_area(int d);
double log_surface_area(int d);

/// Radius u^{1/d} kappa of a uniform draw from the ball of radius kappa.
double ball_radius_from_uniform(int d, double kappa, double u);

/// Integral of u^{1/p} over (0, 1), i.e. p / (p + 1).
double power_integral(double p);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Unbiased estimate of the surface integral of f over S^{d-1}.
MonteCarloEstimate sphere_integral_mc(const std::function<double(const Direction&)>& f, int d,
                                      std::size_t n, RngStream& rng);

}  // namespace kpss
