#include "kpss/coupling.hpp"

#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kpss/errors.hpp"
#include "kpss/parallel.hpp"

namespace kpss {

ContractionRate theoretical_contraction_rate(const Target& target) {
  const auto& family = target.family();
  if (const auto* t = std::get_if<DkTarget>(&family)) {
    return {t->k / (t->k + 1.0), true};
  }
  if (const auto* t = std::get_if<StdTTarget>(&family)) {
    if (!(t->m > 1.0)) return {1.0, false};
    const double d = t->d;
    return {d * (d + t->m) / ((d + 1.0) * (d + t->m - 1.0)), true};
  }
  if (const auto* t = std::get_if<ParetoShellTarget>(&family)) {
    if (!(t->m > 1.0) || !(t->k >= 1.0)) return {1.0, false};
    return {t->k * (t->k + t->m) / ((t->k + 1.0) * (t->k + t->m - 1.0)), true};
  }
  throw UnsupportedFamilyError("theoretical_contraction_rate: no contraction result for " +
                              std::string(target.name()));
}

std::pair<Point, Point> coupled_update(const Target& target, const Point& x, const Point& y,
                                       const CouplingDraw& draw) {
  if (!target.rotation_invariant()) {
    throw UnsupportedFamilyError("coupled_update: coupling requires a rotationally invariant target");
  }
  const double rx = radial_update(target, threshold_from_uniform(target, x, draw.u1), draw.theta,
                                  draw.u2);
  const double ry = radial_update(target, threshold_from_uniform(target, y, draw.u1), draw.theta,
                                  draw.u2);
  return {rx * draw.theta.coords(), ry * draw.theta.coords()};
}

std::pair<Point, Point> coupled_step(const Target& target, const Point& x, const Point& y,
                                     RngStream& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform_open();
  return coupled_update(target, x, y, CouplingDraw{u1, u2, sample_unit_sphere(target.dim(), rng)});
}

ContractionEstimate contraction_ratio(const Target& target, const CoupledPair& pair,
                                      std::size_t n, RngStream& rng) {
  const double dist = radius_of(pair.x - pair.y);
  if (!(dist > 0.0)) throw DegeneratePairError("contraction_ratio: x and y coincide");
  if (n < 2) throw DomainError("contraction_ratio: need at least two coupled steps");
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [xn, yn] = coupled_step(target, pair.x, pair.y, rng);
    const double ratio = radius_of(xn - yn) / dist;
    const double delta = ratio - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (ratio - mean);
  }
  ContractionEstimate est;
  est.empirical_rate = mean;
  est.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  est.theoretical_rate = theoretical_contraction_rate(target).value;
  est.pair_grid = {pair};
  return est;
}

std::vector<CoupledPair> ray_pairs(const std::vector<double>& radii, const Direction& theta) {
  std::vector<CoupledPair> pairs;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    for (std::size_t j = i + 1; j < radii.size(); ++j) {
      if (radii[i] == radii[j]) continue;
      pairs.push_back({radii[i] * theta.coords(), radii[j] * theta.coords()});
    }
  }
  return pairs;
}

std::vector<ContractionEstimate> contraction_over_grid(const Target& target,
                                                       const std::vector<CoupledPair>& pairs,
                                                       std::size_t n, std::uint64_t seed,
                                                       unsigned threads) {
  std::vector<ContractionEstimate> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    out[i] = contraction_ratio(target, pairs[i], n, rng);
  });
  return out;
}

double std_t_sharpness_quadrature(const StdTTarget& target, double r) {
  if (!(r > 0.0)) throw DomainError("sharpness quadrature: r must be positive");
  const double d = target.d;
  const double m = target.m;
  const double a = r;
  const double b = 0.5 * r;
  // Integrand of the mean-norm difference, written to avoid cancellation:
  // sqrt(w^2 a^2 + m (w^2 - 1)) - sqrt(w^2 b^2 + m (w^2 - 1)) with w = u^{-1/(d+m)}.
  auto integrand = [&](double u) {
    if (!(u > 0.0)) return 0.0;
    const double log_w = -std::log(u) / (d + m);
    const double w2 = std::exp(2.0 * log_w);
    const double shift = m * std::expm1(2.0 * log_w);
    const double ga = std::sqrt(w2 * a * a + shift);
    const double gb = std::sqrt(w2 * b * b + shift);
    return w2 * (a * a - b * b) / (ga + gb);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double integral = integrator.integrate(integrand, 0.0, 1.0, 1e-13);
  return (d / (d + 1.0)) * integral / (0.5 * r);
}

SharpnessEstimate sharpness_probe(const Target& target, double r, const Direction& theta0,
                                  std::size_t n, RngStream& rng) {
  const auto* t_target = std::get_if<StdTTarget>(&target.family());
  const auto* pareto = std::get_if<ParetoShellTarget>(&target.family());
  if (t_target == nullptr && pareto == nullptr) {
    throw UnsupportedFamilyError("sharpness_probe: defined for the t and Pareto-shell targets");
  }
  if (n < 2) throw DomainError("sharpness_probe: need at least two draws");
  const Point x = r * theta0.coords();
  const Point y = 0.5 * r * theta0.coords();
  if (!std::isfinite(log_factor1(target, y))) {
    throw OutOfSupportError("sharpness_probe: r/2 lies outside the support");
  }
  // Both norms share (u1, u2); the direction does not affect ||X'||.
  const double log_x = log_factor1(target, x);
  const double log_y = log_factor1(target, y);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double log_u1 = std::log(rng.uniform_open());
    const double u2 = rng.uniform_open();
    const double rx = radial_update(target, log_u1 + log_x, theta0, u2);
    const double ry = radial_update(target, log_u1 + log_y, theta0, u2);
    const double v = (rx - ry) / (0.5 * r);
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  SharpnessEstimate est;
  est.r = r;
  est.value = std::abs(mean);
  est.std_error = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  est.theoretical_rate = theoretical_contraction_rate(target).value;
  if (t_target != nullptr) est.quadrature = std_t_sharpness_quadrature(*t_target, r);
  return est;
}

}  // namespace kpss
