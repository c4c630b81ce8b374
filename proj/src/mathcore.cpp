#include "kpss/mathcore.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "kpss/errors.hpp"

namespace kpss {

double radius_of(const Point& x) {
  const double n = x.norm();
  if (std::isfinite(n) && (n > 0.0 || x.isZero(0.0))) return n;
  return x.stableNorm();
}

Direction::Direction(Point v) : coords_(std::move(v)) {
  const double n = radius_of(coords_);
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("Direction: cannot normalize vector");
  coords_ /= n;
}

PhiSpec::PhiSpec(Fn eval, double kappa, double inf_phi, double sup_phi, Fn inverse)
    : eval_(std::move(eval)),
      inverse_(std::move(inverse)),
      kappa_(kappa),
      inf_(inf_phi),
      sup_(sup_phi) {
  if (!eval_) throw DomainError("PhiSpec: missing evaluation function");
  if (!(kappa_ > 0.0)) throw DomainError("PhiSpec: kappa must be positive");
  if (!(inf_ < sup_)) throw DomainError("PhiSpec: need inf phi < sup phi");
  if (std::isinf(kappa_) && std::isfinite(sup_))
    throw DomainError("PhiSpec: a convex increasing phi on (0, inf) is unbounded");
}

PhiSpec PhiSpec::linear(double slope, double offset, double kappa) {
  if (!(slope > 0.0)) throw DomainError("PhiSpec::linear: slope must be positive");
  PhiSpec phi([=](double r) { return slope * r + offset; }, kappa, offset,
              std::isinf(kappa) ? kInf : slope * kappa + offset,
              [=](double s) { return (s - offset) / slope; });
  phi.linear_slope_ = slope;
  return phi;
}

PhiSpec PhiSpec::power(double scale, double exponent, double offset, double kappa) {
  if (!(scale > 0.0)) throw DomainError("PhiSpec::power: scale must be positive");
  if (!(exponent >= 1.0)) throw DomainError("PhiSpec::power: exponent must be >= 1");
  PhiSpec phi([=](double r) { return scale * std::pow(r, exponent) + offset; }, kappa, offset,
              std::isinf(kappa) ? kInf : scale * std::pow(kappa, exponent) + offset,
              [=](double s) { return std::pow((s - offset) / scale, 1.0 / exponent); });
  if (exponent == 1.0) phi.linear_slope_ = scale;
  return phi;
}

PhiSpec PhiSpec::exponential(double scale, double rate, double offset, double kappa) {
  if (!(scale > 0.0) || !(rate > 0.0))
    throw DomainError("PhiSpec::exponential: scale and rate must be positive");
  return PhiSpec([=](double r) { return scale * std::expm1(rate * r) + offset; }, kappa, offset,
                 std::isinf(kappa) ? kInf : scale * std::expm1(rate * kappa) + offset,
                 [=](double s) { return std::log1p((s - offset) / scale) / rate; });
}

namespace {

double bisect_inverse(const PhiSpec& phi, double s) {
  double lo = 0.0;
  double hi = phi.kappa();
  if (std::isinf(hi)) {
    hi = 1.0;
    while (phi(hi) < s) {
      lo = hi;
      hi *= 2.0;
      if (std::isinf(hi)) throw NonFiniteError("phi_inverse: bracket expansion overflowed");
    }
  }
  // Run until the bracket stops shrinking in floating point.
  for (int iter = 0; iter < 4096; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) < s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo == 0.0) return hi;
  if (std::isinf(phi.kappa()) || hi < phi.kappa()) {
    return std::abs(phi(lo) - s) <= std::abs(phi(hi) - s) ? lo : hi;
  }
  return lo;
}

}  // namespace

double phi_inverse(const PhiSpec& phi, double s, InverseMethod method) {
  if (!(s > phi.inf() && s < phi.sup())) {
    throw DomainError("phi_inverse: argument " + std::to_string(s) + " outside (inf phi, sup phi)");
  }
  if (method == InverseMethod::automatic && phi.has_closed_inverse()) {
    return phi.closed_inverse()(s);
  }
  return bisect_inverse(phi, s);
}

double phi_inverse_extended(const PhiSpec& phi, double s, InverseMethod method) {
  if (!(s > phi.inf())) throw DomainError("phi_inverse_extended: argument <= inf phi");
  if (s >= phi.sup()) return phi.kappa();
  return phi_inverse(phi, s, method);
}

Direction sample_unit_sphere(int d, RngStream& rng) {
  if (d < 1) throw DomainError("sample_unit_sphere: dimension must be >= 1");
  Point v(d);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < d; ++i) v[i] = rng.normal();
    norm2 = v.squaredNorm();
  } while (!(norm2 > 0.0));
  return Direction(std::move(v));
}

double log_surface_area(int d) {
  if (d < 1) throw DomainError("surface_area: dimension must be >= 1");
  const double half = 0.5 * d;
  return std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half);
}

double surface_area(int d) {
  if (d < 1) throw DomainError("surface_area: dimension must be >= 1");
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: return std::exp(log_surface_area(d));
  }
}

double ball_radius_from_uniform(int d, double kappa, double u) {
  if (d < 1) throw DomainError("ball_radius_from_uniform: dimension must be >= 1");
  if (!(kappa > 0.0)) throw DomainError("ball_radius_from_uniform: kappa must be positive");
  return std::pow(u, 1.0 / d) * kappa;
}

double power_integral(double p) {
  if (p == -1.0) throw DomainError("power_integral: p = -1 has no finite integral");
  return p / (p + 1.0);
}

MonteCarloEstimate sphere_integral_mc(const std::function<double(const Direction&)>& f, int d,
                                      std::size_t n, RngStream& rng) {
  if (n == 0) throw DomainError("sphere_integral_mc: need at least one sample");
  // Welford accumulation of the integrand.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = f(sample_unit_sphere(d, rng));
    if (!std::isfinite(v)) throw NonFiniteError("sphere_integral_mc: integrand is not finite");
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double omega = surface_area(d);
  const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {omega * mean, omega * std::sqrt(var / static_cast<double>(n))};
}

}  // namespace kpss
