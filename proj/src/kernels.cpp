#include "kpss/kernels.hpp"

#include <cmath>
#include <utility>

#include "kpss/errors.hpp"

namespace kpss {

namespace summaries {
double norm(const Point& x) { return radius_of(x); }
double log_norm(const Point& x) { return std::log(radius_of(x)); }
}  // namespace summaries

double threshold_from_uniform(const Target& target, const Point& x, double u1) {
  if (!(u1 > 0.0 && u1 <= 1.0)) throw DomainError("threshold: u1 must lie in (0, 1]");
  const double level = log_factor1(target, x);
  if (!std::isfinite(level)) throw OutOfSupportError("threshold: current state outside the support");
  return std::log(u1) + level;
}

double draw_threshold(const Target& target, const Point& x, RngStream& rng) {
  return threshold_from_uniform(target, x, rng.uniform_open());
}

double radial_update(const Target& target, double log_t, const Direction& theta, double u2) {
  if (!(u2 >= 0.0 && u2 <= 1.0)) throw DomainError("radial_update: u2 must lie in [0, 1]");
  if (const auto* p = std::get_if<ParetoShellTarget>(&target.family())) {
    if (log_t >= target.log_sup_factor1()) {
      throw EmptySliceError("radial_update: threshold at or above sup eta_{k,1}");
    }
    // F_t^{-1}(u) = (u t^{-k/(k+m)} + (1 - u) eps^k)^{1/k}
    const double upper = std::exp(-p->k * log_t / (p->k + p->m));
    const double lower = std::pow(p->eps, p->k);
    return std::pow(u2 * upper + (1.0 - u2) * lower, 1.0 / p->k);
  }
  const RadialInterval slice = slice_boundary(target, log_t, theta);
  // Radial density r^{k-1} on (0, hi): inverse CDF hi * u^{1/k}.
  return slice.hi * std::pow(u2, 1.0 / target.k());
}

Direction direction_update(const Target& target, RngStream& rng, std::size_t max_proposals,
                           std::size_t* proposals) {
  const int d = target.dim();
  const auto* asym = std::get_if<RotAsymTarget>(&target.family());
  if (asym == nullptr) {
    if (proposals != nullptr) *proposals += 1;
    return sample_unit_sphere(d, rng);
  }
  const double exponent = asym->k / asym->m;
  const double log_floor = std::log(asym->chi.lower_bound());
  for (std::size_t i = 0; i < max_proposals; ++i) {
    Direction theta = sample_unit_sphere(d, rng);
    const double log_accept = exponent * (log_floor - std::log(asym->chi(theta)));
    const double u = rng.uniform();
    if (proposals != nullptr) *proposals += 1;
    if (log_accept >= 0.0 || std::log(u) < log_accept) return theta;
  }
  throw RejectionBudgetError("direction_update: no acceptance within the proposal cap");
}

TransitionRecord step_with(const Target& target, const Point& x, double u1, double u2,
                           const Direction& theta) {
  if (theta.dim() != target.dim()) throw DomainError("step: direction dimension mismatch");
  const double log_t = threshold_from_uniform(target, x, u1);
  const double r = radial_update(target, log_t, theta, u2);
  if (!std::isfinite(r)) throw NonFiniteError("step: radial draw is not finite");
  Point x_new = r * theta.coords();
  return TransitionRecord{log_t, r, theta, std::move(x_new)};
}

TransitionRecord step(const Target& target, const Point& x, RngStream& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform_open();
  const Direction theta = direction_update(target, rng);
  return step_with(target, x, u1, u2, theta);
}

ChainResult run_chain(const Target& target, const ChainConfig& config, const Summary& summary,
                      RngStream& rng) {
  if (config.thinning == 0) throw DomainError("run_chain: thinning must be >= 1");
  if (config.n_steps > 0 && config.n_steps <= config.burn_in) {
    throw DomainError("run_chain: n_steps must exceed burn_in");
  }
  if (config.x0.size() != target.dim()) throw DomainError("run_chain: x0 has the wrong dimension");
  ChainResult result;
  if (config.n_steps == 0) return result;
  if (!std::isfinite(log_factor1(target, config.x0))) {
    throw OutOfSupportError("run_chain: x0 outside the support");
  }
  result.series.reserve((config.n_steps - config.burn_in + config.thinning - 1) / config.thinning);
  Point x = config.x0;
  for (std::size_t i = 1; i <= config.n_steps; ++i) {
    const double u1 = rng.uniform_open();
    const double u2 = rng.uniform_open();
    const Direction theta = direction_update(target, rng, kDefaultProposalCap,
                                             &result.direction_proposals);
    x = step_with(target, x, u1, u2, theta).x_new;
    if (i > config.burn_in && (i - config.burn_in - 1) % config.thinning == 0) {
      result.series.push_back(summary(x));
    }
  }
  result.steps = config.n_steps;
  return result;
}

}  // namespace kpss
