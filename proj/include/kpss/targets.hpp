#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <variant>

#include <Eigen/Core>

#include "kpss/mathcore.hpp"

namespace kpss {

/// Positive angular scale chi on S^{d-1} with a uniform lower bound.
class AngularScale {
 public:
  using Fn = std::function<double(const Direction&)>;

  struct Quadratic {
    Eigen::MatrixXd precision;  // Sigma^{-1}
    double scale = 0.5;
    double power = 1.0;
    double log_det_sigma = 0.0;
  };

  AngularScale(Fn eval, double lower_bound);

  static AngularScale constant(double c);
  /// chi(theta) = scale * (theta^T Sigma^{-1} theta)^power for symmetric
  /// positive-definite Sigma. scale = 1/2, power = 1 gives N(0, Sigma) with m = 2.
  static AngularScale quadratic(const Eigen::MatrixXd& sigma, double scale = 0.5,
                                double power = 1.0);

  double operator()(const Direction& theta) const { return eval_(theta); }
  [[nodiscard]] double lower_bound() const { return lower_bound_; }
  [[nodiscard]] std::optional<double> constant_value() const { return constant_; }
  [[nodiscard]] const std::optional<Quadratic>& quadratic_form() const { return quadratic_; }

 private:
  Fn eval_;
  double lower_bound_;
  std::optional<double> constant_;
  std::optional<Quadratic> quadratic_;
};

/// ||x||^{k-d} exp(-phi(||x||)) on the open ball of radius kappa.
struct DkTarget {
  int d;
  double k;
  PhiSpec phi;
};

/// r^{k-d} exp(-phi(r^m)) with r^m < kappa and sup phi = infinity.
struct RotInvTarget {
  int d;
  double k;
  double m;
  PhiSpec phi;
};

/// r^{k-d} exp(-chi(theta) r^m).
struct RotAsymTarget {
  int d;
  double k;
  double m;
  AngularScale chi;
};

/// (1 + ||x||^2 / m)^{-(d+m)/2}, sampled with the uniform (k = d) factorization.
struct StdTTarget {
  int d;
  double m;
};

/// ||x||^{-(d+m)} for ||x|| >= eps.
struct ParetoShellTarget {
  int d;
  double k;
  double m;
  double eps;
};

/// Immutable target density together with its k-polar factorization.
class Target {
 public:
  using Variant =
      std::variant<DkTarget, RotInvTarget, RotAsymTarget, StdTTarget, ParetoShellTarget>;

  static Target dk(int d, double k, PhiSpec phi);
  static Target rot_inv(int d, double k, double m, PhiSpec phi);
  static Target rot_asym(int d, double k, double m, AngularScale chi);
  static Target std_t(int d, double m);
  static Target pareto_shell(int d, double k, double m, double eps);

  [[nodiscard]] const Variant& family() const { return family_; }
  [[nodiscard]] int dim() const;
  /// Exponent of the radial factor ||x||^{k-d}; equals d for StdT.
  [[nodiscard]] double k() const;
  [[nodiscard]] std::string_view name() const;
  [[nodiscard]] bool rotation_invariant() const;

  /// log sup of the factor eta_{k,1} (direction-wise it is the same for every family here).
  [[nodiscard]] double log_sup_factor1() const;

 private:
  explicit Target(Variant v) : family_(std::move(v)) {}
  Variant family_;
};

/// Half-open radial interval [lo, hi) of a slice along one direction; lo > 0
/// only for the Pareto shell.
struct RadialInterval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double r) const { return r >= lo && r < hi && r > 0.0; }
};

double log_density(const Target& target, const Point& x);
/// (k - d) log ||x||.
double log_factor0(const Target& target, const Point& x);
/// log eta_{k,1}(x); -infinity outside the support.
double log_factor1(const Target& target, const Point& x);
/// log eta_{k,1}(r theta).
double log_factor1_polar(const Target& target, double r, const Direction& theta);

RadialInterval slice_boundary(const Target& target, double log_t, const Direction& theta);

/// Normalized CDF of ||X|| under the target.
double radial_stationary_cdf(const Target& target, double r);

/// Exact draw from the target distribution.
Point draw_stationary(const Target& target, RngStream& rng);

}  // namespace kpss
