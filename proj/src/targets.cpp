#include "kpss/targets.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "kpss/errors.hpp"
#include "kpss/kernels.hpp"

namespace kpss {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dimension(int d) {
  if (d < 1) throw DomainError("target: dimension must be >= 1");
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string("target: ") + what + " must be positive and finite");
  }
}

/// CDF at r of the radial density s^{k-1} exp(-phi(s)) on (0, kappa).
double dk_radial_cdf(double k, const PhiSpec& phi, double r) {
  if (!(r > 0.0)) return 0.0;
  const double kappa = phi.kappa();
  if (r >= kappa) return 1.0;
  const double shift = phi.inf();
  auto integrand = [&](double s) {
    if (!(s > 0.0) || s >= kappa) return 0.0;
    const double v = (k - 1.0) * std::log(s) - (phi(s) - shift);
    return std::exp(v);
  };
  boost::math::quadrature::tanh_sinh<double> finite;
  const double lower = finite.integrate(integrand, 0.0, r, 1e-12);
  double upper = 0.0;
  if (std::isinf(kappa)) {
    boost::math::quadrature::exp_sinh<double> half_line;
    upper = half_line.integrate(integrand, r, kInf, 1e-12);
  } else {
    upper = finite.integrate(integrand, r, kappa, 1e-12);
  }
  const double total = lower + upper;
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NonFiniteError("radial_stationary_cdf: normalizing integral is not finite");
  }
  return lower / total;
}

double invert_cdf(const std::function<double(double)>& cdf, double u) {
  double lo = 0.0;
  double hi = 1.0;
  while (cdf(hi) < u) {
    lo = hi;
    hi *= 2.0;
    if (std::isinf(hi)) throw NonFiniteError("draw_stationary: radial quantile overflow");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double std_t_log_factor(const StdTTarget& t, double r) {
  const double half = 0.5 * (t.d + t.m);
  if (r > 1e150) return -half * (2.0 * std::log(r) - std::log(t.m));
  return -half * std::log1p(r * r / t.m);
}

}  // namespace

AngularScale::AngularScale(Fn eval, double lower_bound)
    : eval_(std::move(eval)), lower_bound_(lower_bound) {
  if (!eval_) throw DomainError("AngularScale: missing evaluation function");
  require_positive(lower_bound_, "chi lower bound");
}

AngularScale AngularScale::constant(double c) {
  require_positive(c, "constant chi");
  AngularScale chi([c](const Direction&) { return c; }, c);
  chi.constant_ = c;
  return chi;
}

AngularScale AngularScale::quadratic(const Eigen::MatrixXd& sigma, double scale, double power) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw DomainError("AngularScale::quadratic: Sigma must be square");
  }
  if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw DomainError("AngularScale::quadratic: Sigma must be symmetric");
  }
  require_positive(scale, "chi scale");
  require_positive(power, "chi power");
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw DomainError("AngularScale::quadratic: Sigma is not positive definite");
  }
  Quadratic q;
  q.precision = llt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
  q.precision = 0.5 * (q.precision + q.precision.transpose()).eval();
  q.scale = scale;
  q.power = power;
  q.log_det_sigma = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  const double bound = scale * std::pow(1.0 / lambda_max, power);

  const Eigen::MatrixXd precision = q.precision;
  AngularScale chi(
      [precision, scale, power](const Direction& theta) {
        const double form = theta.coords().dot(precision * theta.coords());
        return scale * std::pow(form, power);
      },
      // Shave a few ulps so rounding in the form never pushes chi below its bound.
      bound * (1.0 - 1e-12));
  chi.quadratic_ = std::move(q);
  return chi;
}

Target Target::dk(int d, double k, PhiSpec phi) {
  require_dimension(d);
  require_positive(k, "k");
  return Target(DkTarget{d, k, std::move(phi)});
}

Target Target::rot_inv(int d, double k, double m, PhiSpec phi) {
  require_dimension(d);
  require_positive(k, "k");
  require_positive(m, "m");
  if (std::isfinite(phi.sup())) {
    throw DomainError("Target::rot_inv: phi must diverge at kappa (sup phi = infinity)");
  }
  return Target(RotInvTarget{d, k, m, std::move(phi)});
}

Target Target::rot_asym(int d, double k, double m, AngularScale chi) {
  require_dimension(d);
  require_positive(k, "k");
  require_positive(m, "m");
  if (const auto& q = chi.quadratic_form(); q && q->precision.rows() != d) {
    throw DomainError("Target::rot_asym: Sigma dimension does not match d");
  }
  return Target(RotAsymTarget{d, k, m, std::move(chi)});
}

Target Target::std_t(int d, double m) {
  require_dimension(d);
  require_positive(m, "degrees of freedom m");
  return Target(StdTTarget{d, m});
}

Target Target::pareto_shell(int d, double k, double m, double eps) {
  require_dimension(d);
  require_positive(k, "k");
  require_positive(m, "m");
  require_positive(eps, "eps");
  return Target(ParetoShellTarget{d, k, m, eps});
}

int Target::dim() const {
  return std::visit([](const auto& t) { return t.d; }, family_);
}

double Target::k() const {
  return std::visit(overloaded{[](const StdTTarget& t) { return static_cast<double>(t.d); },
                               [](const auto& t) { return t.k; }},
                    family_);
}

std::string_view Target::name() const {
  return std::visit(overloaded{[](const DkTarget&) { return std::string_view("dk"); },
                               [](const RotInvTarget&) { return std::string_view("rot_inv"); },
                               [](const RotAsymTarget&) { return std::string_view("rot_asym"); },
                               [](const StdTTarget&) { return std::string_view("std_t"); },
                               [](const ParetoShellTarget&) {
                                 return std::string_view("pareto_shell");
                               }},
                    family_);
}

bool Target::rotation_invariant() const {
  return !std::holds_alternative<RotAsymTarget>(family_);
}

double Target::log_sup_factor1() const {
  return std::visit(
      overloaded{[](const DkTarget& t) { return -t.phi.inf(); },
                 [](const RotInvTarget& t) { return -t.phi.inf(); },
                 [](const RotAsymTarget&) { return 0.0; },
                 [](const StdTTarget&) { return 0.0; },
                 [](const ParetoShellTarget& t) { return -(t.k + t.m) * std::log(t.eps); }},
      family_);
}

double log_factor1_polar(const Target& target, double r, const Direction& theta) {
  if (!(r > 0.0)) throw OriginError("log_factor1: the factorization is undefined at the origin");
  return std::visit(
      overloaded{
          [&](const DkTarget& t) { return r < t.phi.kappa() ? -t.phi(r) : -kInf; },
          [&](const RotInvTarget& t) {
            const double u = std::pow(r, t.m);
            return u < t.phi.kappa() ? -t.phi(u) : -kInf;
          },
          [&](const RotAsymTarget& t) { return -t.chi(theta) * std::pow(r, t.m); },
          [&](const StdTTarget& t) { return std_t_log_factor(t, r); },
          [&](const ParetoShellTarget& t) {
            return r >= t.eps ? -(t.k + t.m) * std::log(r) : -kInf;
          }},
      target.family());
}

double log_factor1(const Target& target, const Point& x) {
  const double r = radius_of(x);
  if (r == 0.0) {
    if (const auto* t = std::get_if<StdTTarget>(&target.family())) return std_t_log_factor(*t, 0.0);
    throw OriginError("log_factor1: the factorization is undefined at the origin");
  }
  if (target.rotation_invariant()) {
    // The direction is not consulted; avoid normalizing.
    return std::visit(
        overloaded{[&](const DkTarget& t) { return r < t.phi.kappa() ? -t.phi(r) : -kInf; },
                   [&](const RotInvTarget& t) {
                     const double u = std::pow(r, t.m);
                     return u < t.phi.kappa() ? -t.phi(u) : -kInf;
                   },
                   [&](const StdTTarget& t) { return std_t_log_factor(t, r); },
                   [&](const ParetoShellTarget& t) {
                     return r >= t.eps ? -(t.k + t.m) * std::log(r) : -kInf;
                   },
                   [](const RotAsymTarget&) { return 0.0; }},
        target.family());
  }
  return log_factor1_polar(target, r, Direction(x));
}

double log_factor0(const Target& target, const Point& x) {
  const double exponent = target.k() - target.dim();
  if (exponent == 0.0) return 0.0;
  const double r = radius_of(x);
  if (r == 0.0) throw OriginError("log_factor0: ||x||^{k-d} is singular at the origin");
  return exponent * std::log(r);
}

double log_density(const Target& target, const Point& x) {
  const double r = radius_of(x);
  if (r == 0.0) {
    const double exponent = target.k() - target.dim();
    if (exponent < 0.0) throw OriginError("log_density: the density has a pole at the origin");
    if (exponent > 0.0) return -kInf;
    // k = d: the density is the limit of eta_{k,1} at the origin.
    return std::visit(overloaded{[](const DkTarget& t) { return -t.phi.inf(); },
                                 [](const RotInvTarget& t) { return -t.phi.inf(); },
                                 [](const RotAsymTarget&) { return 0.0; },
                                 [](const StdTTarget&) { return 0.0; },
                                 [](const ParetoShellTarget&) { return -kInf; }},
                      target.family());
  }
  const double f1 = log_factor1(target, x);
  if (f1 == -kInf) return -kInf;
  return log_factor0(target, x) + f1;
}

RadialInterval slice_boundary(const Target& target, double log_t, const Direction& theta) {
  if (std::isnan(log_t)) throw DomainError("slice_boundary: threshold is NaN");
  if (log_t >= target.log_sup_factor1()) {
    throw EmptySliceError("slice_boundary: threshold at or above sup eta_{k,1}");
  }
  const double level = -log_t;
  return std::visit(
      overloaded{
          [&](const DkTarget& t) { return RadialInterval{0.0, phi_inverse_extended(t.phi, level)}; },
          [&](const RotInvTarget& t) {
            return RadialInterval{0.0, std::pow(phi_inverse(t.phi, level), 1.0 / t.m)};
          },
          [&](const RotAsymTarget& t) {
            return RadialInterval{0.0, std::pow(level / t.chi(theta), 1.0 / t.m)};
          },
          [&](const StdTTarget& t) {
            return RadialInterval{0.0, std::sqrt(t.m * std::expm1(2.0 * level / (t.d + t.m)))};
          },
          [&](const ParetoShellTarget& t) {
            return RadialInterval{t.eps, std::exp(level / (t.k + t.m))};
          }},
      target.family());
}

double radial_stationary_cdf(const Target& target, double r) {
  if (std::isnan(r)) throw DomainError("radial_stationary_cdf: r is NaN");
  if (r <= 0.0) {
    if (std::holds_alternative<RotAsymTarget>(target.family())) {
      throw NotAvailableError("radial_stationary_cdf: not available for rotationally asymmetric targets");
    }
    return 0.0;
  }
  return std::visit(
      overloaded{
          [&](const DkTarget& t) { return dk_radial_cdf(t.k, t.phi, r); },
          [&](const RotInvTarget& t) {
            // u = r^m has radial density u^{k/m - 1} exp(-phi(u)).
            return dk_radial_cdf(t.k / t.m, t.phi, std::pow(r, t.m));
          },
          [&](const RotAsymTarget&) -> double {
            throw NotAvailableError(
                "radial_stationary_cdf: not available for rotationally asymmetric targets");
          },
          [&](const StdTTarget& t) {
            // ||X||^2 / (m + ||X||^2) ~ Beta(d/2, m/2).
            if (std::isinf(r)) return 1.0;
            const double denom = t.m + r * r;
            const double x = r * r / denom;
            if (x < 0.5) return boost::math::ibeta(0.5 * t.d, 0.5 * t.m, x);
            return boost::math::ibetac(0.5 * t.m, 0.5 * t.d, t.m / denom);
          },
          [&](const ParetoShellTarget& t) {
            if (r <= t.eps) return 0.0;
            return -std::expm1(t.m * std::log(t.eps / r));
          }},
      target.family());
}

Point draw_stationary(const Target& target, RngStream& rng) {
  const int d = target.dim();
  auto gamma = [&rng](double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(rng);
  };
  return std::visit(
      overloaded{
          [&](const DkTarget& t) -> Point {
            double r = 0.0;
            if (t.phi.linear_slope() && std::isinf(t.phi.kappa())) {
              r = gamma(t.k) / *t.phi.linear_slope();
            } else {
              const double u = rng.uniform_open();
              r = invert_cdf([&](double s) { return dk_radial_cdf(t.k, t.phi, s); }, u);
            }
            return r * sample_unit_sphere(d, rng).coords();
          },
          [&](const RotInvTarget& t) -> Point {
            double u = 0.0;
            if (t.phi.linear_slope() && std::isinf(t.phi.kappa())) {
              u = gamma(t.k / t.m) / *t.phi.linear_slope();
            } else {
              const double p = rng.uniform_open();
              u = invert_cdf([&](double s) { return dk_radial_cdf(t.k / t.m, t.phi, s); }, p);
            }
            return std::pow(u, 1.0 / t.m) * sample_unit_sphere(d, rng).coords();
          },
          [&](const RotAsymTarget& t) -> Point {
            const Direction theta = direction_update(target, rng);
            const double g = gamma(t.k / t.m);
            return std::pow(g / t.chi(theta), 1.0 / t.m) * theta.coords();
          },
          [&](const StdTTarget& t) -> Point {
            const double a = gamma(0.5 * t.d);
            const double b = gamma(0.5 * t.m);
            return std::sqrt(t.m * a / b) * sample_unit_sphere(d, rng).coords();
          },
          [&](const ParetoShellTarget& t) -> Point {
            const double r = t.eps * std::exp(-std::log(rng.uniform_open()) / t.m);
            return r * sample_unit_sphere(d, rng).coords();
          }},
      target.family());
}

}  // namespace kpss
