#include "kpss/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <string>

#include <boost/math/quadrature/trapezoidal.hpp>
#include <fftw3.h>

#include "kpss/errors.hpp"

namespace kpss {

LevelSetFn::LevelSetFn(Fn at_log, double sup_ell, double log_t_max, LevelSetProvenance provenance,
                       double relative_std_error)
    : at_log_(std::move(at_log)),
      sup_(sup_ell),
      log_t_max_(log_t_max),
      provenance_(provenance),
      relative_std_error_(relative_std_error) {
  if (!at_log_) throw DomainError("LevelSetFn: empty function");
  if (!(sup_ell > 0.0)) throw DomainError("LevelSetFn: sup ell must be positive");
}

double LevelSetFn::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("LevelSetFn: t must be positive");
  return at_log(std::log(t));
}

double LevelSetFn::at_log(double log_t) const {
  if (std::isnan(log_t)) throw NonFiniteError("LevelSetFn: log t is NaN");
  if (log_t >= log_t_max_) return 0.0;
  return at_log_(log_t);
}

double LevelSetFn::inverse_log(double value) const {
  if (!(value > 0.0 && value < sup_)) {
    throw DomainError("LevelSetFn::inverse_log: value outside (0, sup ell)");
  }
  double hi = log_t_max_;
  double width = 1.0;
  double lo = hi - width;
  int expansions = 0;
  while (!(at_log(lo) > value)) {
    hi = lo;
    width *= 2.0;
    lo = hi - width;
    if (++expansions > 2000 || std::isinf(lo)) {
      throw NonFiniteError("LevelSetFn::inverse_log: bracket expansion failed");
    }
  }
  for (int iter = 0; iter < 4096; ++iter) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (at_log(mid) > value) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(at_log(lo) - value) <= std::abs(at_log(hi) - value) ? lo : hi;
}

MonteCarloEstimate angular_constant(const RotAsymTarget& target) {
  const double exponent = target.k / target.m;
  if (const auto c = target.chi.constant_value()) {
    return {surface_area(target.d) * std::pow(*c, -exponent) / target.k, 0.0};
  }
  if (const auto& q = target.chi.quadratic_form()) {
    // int (theta^T P theta)^{-d/2} d sigma = omega_d sqrt(det Sigma).
    if (std::abs(q->power * exponent - 0.5 * target.d) <= 1e-12 * target.d) {
      const double log_c = -exponent * std::log(q->scale) + log_surface_area(target.d) +
                           0.5 * q->log_det_sigma - std::log(target.k);
      return {std::exp(log_c), 0.0};
    }
  }
  auto weight = [&](const Direction& theta) { return std::pow(target.chi(theta), -exponent); };
  if (target.d == 1) {
    Point plus(1);
    plus[0] = 1.0;
    Point minus(1);
    minus[0] = -1.0;
    return {(weight(Direction(plus)) + weight(Direction(minus))) / target.k, 0.0};
  }
  if (target.d == 2) {
    // Periodic integrand: the trapezoidal rule converges geometrically.
    auto integrand = [&](double a) {
      Point v(2);
      v << std::cos(a), std::sin(a);
      return weight(Direction(std::move(v)));
    };
    const double integral =
        boost::math::quadrature::trapezoidal(integrand, 0.0, 2.0 * std::numbers::pi, 1e-14);
    return {integral / target.k, 0.0};
  }
  RngStream rng(0x6b707373u, 0);
  const MonteCarloEstimate est = sphere_integral_mc(weight, target.d, 2'000'000, rng);
  return {est.value / target.k, est.std_error / target.k};
}

LevelSetFn level_set_closed_form(const Target& target) {
  const auto& family = target.family();
  if (const auto* t = std::get_if<DkTarget>(&family)) {
    const double log_pref = log_surface_area(t->d) - std::log(t->k);
    const PhiSpec phi = t->phi;
    const double k = t->k;
    const double sup = std::isinf(phi.kappa()) ? kInf : std::exp(log_pref + k * std::log(phi.kappa()));
    return LevelSetFn(
        [=](double log_t) {
          return std::exp(log_pref + k * std::log(phi_inverse_extended(phi, -log_t)));
        },
        sup, -phi.inf(), LevelSetProvenance::closed_form);
  }
  if (const auto* t = std::get_if<RotInvTarget>(&family)) {
    const double log_pref = log_surface_area(t->d) - std::log(t->k);
    const PhiSpec phi = t->phi;
    const double power = t->k / t->m;
    const double sup =
        std::isinf(phi.kappa()) ? kInf : std::exp(log_pref + power * std::log(phi.kappa()));
    return LevelSetFn(
        [=](double log_t) {
          return std::exp(log_pref + power * std::log(phi_inverse(phi, -log_t)));
        },
        sup, -phi.inf(), LevelSetProvenance::closed_form);
  }
  if (const auto* t = std::get_if<RotAsymTarget>(&family)) {
    const MonteCarloEstimate c = angular_constant(*t);
    const double power = t->k / t->m;
    const double log_c = std::log(c.value);
    const bool exact = c.std_error == 0.0;
    return LevelSetFn([=](double log_t) { return std::exp(log_c + power * std::log(-log_t)); },
                      kInf, 0.0,
                      exact ? LevelSetProvenance::closed_form : LevelSetProvenance::monte_carlo,
                      exact ? 0.0 : c.std_error / c.value);
  }
  if (const auto* t = std::get_if<StdTTarget>(&family)) {
    const double d = t->d;
    const double m = t->m;
    const double log_pref = log_surface_area(t->d) - std::log(d);
    return LevelSetFn(
        [=](double log_t) {
          const double r2 = m * std::expm1(-2.0 * log_t / (d + m));
          return std::exp(log_pref + 0.5 * d * std::log(r2));
        },
        kInf, 0.0, LevelSetProvenance::closed_form);
  }
  throw UnsupportedFamilyError("level_set_closed_form: no closed form for " +
                              std::string(target.name()));
}

MonteCarloEstimate level_set_mc(const Target& target, double log_t, std::size_t n, RngStream& rng) {
  if (n < 2) throw DomainError("level_set_mc: need at least two draws");
  if (std::isnan(log_t)) throw NonFiniteError("level_set_mc: log t is NaN");
  if (log_t >= target.log_sup_factor1()) return {0.0, 0.0};
  const double k = target.k();
  auto integrand = [&](const Direction& theta) {
    const RadialInterval slice = slice_boundary(target, log_t, theta);
    return (std::pow(slice.hi, k) - std::pow(slice.lo, k)) / k;
  };
  return sphere_integral_mc(integrand, target.dim(), n, rng);
}

std::string_view to_string(LambdaVerdict v) {
  switch (v) {
    case LambdaVerdict::member: return "member";
    case LambdaVerdict::not_member: return "not_member";
    case LambdaVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

LambdaVerdict lambda_k_check(const LevelSetFn& ell, double k, const LambdaGrid& grid) {
  if (!(k > 0.0)) throw DomainError("lambda_k_check: k must be positive");
  if (grid.points < 3) throw DomainError("lambda_k_check: grid needs at least three points");
  if (!(grid.lo_offset > 0.0) || !(grid.hi_offset > grid.lo_offset)) {
    throw DomainError("lambda_k_check: grid leaves the support of ell");
  }
  const double s0 = -ell.log_t_max();
  const double step = (grid.hi_offset - grid.lo_offset) / static_cast<double>(grid.points - 1);
  std::vector<double> h(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double s = s0 + grid.lo_offset + step * static_cast<double>(i);
    const double value = ell.at_log(-s);
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw DomainError("lambda_k_check: ell is not positive and finite on the grid");
    }
    h[i] = std::pow(value, 1.0 / k);
  }
  constexpr double kTol = 1e-9;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.points; ++i) {
    const double second = h[i - 1] - 2.0 * h[i] + h[i + 1];
    worst = std::max(worst, second / (kTol * (1.0 + std::abs(h[i]))));
  }
  if (worst <= 1.0) return LambdaVerdict::member;
  if (worst > 10.0) return LambdaVerdict::not_member;
  return LambdaVerdict::inconclusive;
}

double lambda_k_boundary(const LevelSetFn& ell, double k_lo, double k_hi, double tol,
                         const LambdaGrid& grid) {
  if (!(k_lo > 0.0 && k_hi > k_lo) || !(tol > 0.0)) {
    throw DomainError("lambda_k_boundary: need 0 < k_lo < k_hi and tol > 0");
  }
  if (lambda_k_check(ell, k_hi, grid) != LambdaVerdict::member) {
    throw DomainError("lambda_k_boundary: k_hi is not a member");
  }
  if (lambda_k_check(ell, k_lo, grid) == LambdaVerdict::member) {
    throw DomainError("lambda_k_boundary: k_lo is already a member");
  }
  while (k_hi - k_lo > tol) {
    const double mid = 0.5 * (k_lo + k_hi);
    if (lambda_k_check(ell, mid, grid) == LambdaVerdict::member) {
      k_hi = mid;
    } else {
      k_lo = mid;
    }
  }
  return 0.5 * (k_lo + k_hi);
}

Target construct_matching_dk(const LevelSetFn& ell, double k, const LambdaGrid& grid) {
  if (lambda_k_check(ell, k, grid) != LambdaVerdict::member) {
    throw NotInLambdaKError("construct_matching_dk: ell is not in Lambda_k for k = " +
                            std::to_string(k));
  }
  // In one dimension omega_1 = 2, so ell_D(t) = (2/k) phi^{-1}(-log t)^k.
  const double kappa = std::isinf(ell.sup()) ? kInf : std::pow(0.5 * k * ell.sup(), 1.0 / k);
  const LevelSetFn level = ell;
  auto eval = [level, k, kappa](double r) {
    if (!(r > 0.0)) return -level.log_t_max();
    if (r >= kappa) return kInf;
    const double target_value = (2.0 / k) * std::pow(r, k);
    if (!(target_value < level.sup())) return kInf;
    return -level.inverse_log(target_value);
  };
  auto inverse = [level, k](double s) { return std::pow(0.5 * k * level.at_log(-s), 1.0 / k); };
  return Target::dk(1, k, PhiSpec(eval, kappa, -ell.log_t_max(), kInf, inverse));
}

double matching_round_trip_error(const LevelSetFn& ell, const Target& matched,
                                 std::span<const double> log_t_grid) {
  const auto* dk = std::get_if<DkTarget>(&matched.family());
  if (dk == nullptr || dk->d != 1) {
    throw UnsupportedFamilyError("matching_round_trip_error: expects a one-dimensional D_k target");
  }
  double worst = 0.0;
  for (const double log_t : log_t_grid) {
    const double expected = ell.at_log(log_t);
    if (!(expected > 0.0)) throw DomainError("matching_round_trip_error: grid leaves the support");
    const double r = phi_inverse_extended(dk->phi, -log_t, InverseMethod::bisection);
    const double got = (2.0 / dk->k) * std::pow(r, dk->k);
    worst = std::max(worst, std::abs(got - expected) / expected);
  }
  return worst;
}

std::string_view to_string(GapKind kind) {
  switch (kind) {
    case GapKind::dk: return "dk";
    case GapKind::rot_inv: return "rot_inv";
    case GapKind::rot_asym: return "rot_asym";
    case GapKind::multiv_t: return "multiv_t";
  }
  return "unknown";
}

GapKind gap_kind_from_string(std::string_view name) {
  if (name == "dk") return GapKind::dk;
  if (name == "rot_inv") return GapKind::rot_inv;
  if (name == "rot_asym") return GapKind::rot_asym;
  if (name == "multiv_t") return GapKind::multiv_t;
  throw DomainError("unknown gap kind '" + std::string(name) + "'");
}

GapBound gap_lower_bound(GapKind kind, const GapParams& params) {
  switch (kind) {
    case GapKind::dk:
      if (!(params.k > 0.0)) throw DomainError("gap bound: k must be positive");
      return {kind, 1.0 / (params.k + 1.0), params};
    case GapKind::rot_inv:
    case GapKind::rot_asym:
      if (!(params.k > 0.0) || !(params.m > 0.0)) {
        throw DomainError("gap bound: k and m must be positive");
      }
      return {kind, params.m / (params.k + params.m), params};
    case GapKind::multiv_t: {
      if (params.d < 1) throw DomainError("gap bound: d must be >= 1");
      if (!(params.m > 2.0)) {
        throw HypothesisError("gap bound: the t bound needs m > 2 (finite second moment)");
      }
      const double d = params.d;
      const double m = params.m;
      return {kind, 1.0 - d * (d + m) / ((d + 1.0) * (d + m - 1.0)), params};
    }
  }
  throw DomainError("gap bound: unknown kind");
}

std::optional<GapBound> gap_bound_for(const Target& target) {
  const auto& family = target.family();
  if (const auto* t = std::get_if<DkTarget>(&family)) {
    return gap_lower_bound(GapKind::dk, {t->d, t->k, 0.0});
  }
  if (const auto* t = std::get_if<RotInvTarget>(&family)) {
    return gap_lower_bound(GapKind::rot_inv, {t->d, t->k, t->m});
  }
  if (const auto* t = std::get_if<RotAsymTarget>(&family)) {
    return gap_lower_bound(GapKind::rot_asym, {t->d, t->k, t->m});
  }
  if (const auto* t = std::get_if<StdTTarget>(&family)) {
    if (t->m > 2.0) return gap_lower_bound(GapKind::multiv_t, {t->d, double(t->d), t->m});
  }
  return std::nullopt;
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mutex;
  return mutex;
}

void check_series(std::span<const double> series) {
  for (const double v : series) {
    if (!std::isfinite(v)) throw NonFiniteError("series contains a non-finite value");
  }
}

}  // namespace

std::vector<double> autocovariance(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n == 0) throw DomainError("autocovariance: empty series");
  check_series(series);
  max_lag = std::min(max_lag, n - 1);
  double mean = 0.0;
  for (const double v : series) mean += v;
  mean /= static_cast<double>(n);

  std::size_t size = 1;
  while (size < 2 * n) size <<= 1;
  const std::size_t bins = size / 2 + 1;
  double* buffer = fftw_alloc_real(size);
  fftw_complex* spectrum = fftw_alloc_complex(bins);
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_1d(static_cast<int>(size), buffer, spectrum, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(static_cast<int>(size), spectrum, buffer, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) buffer[i] = series[i] - mean;
  std::fill(buffer + n, buffer + size, 0.0);
  fftw_execute(forward);
  for (std::size_t i = 0; i < bins; ++i) {
    spectrum[i][0] = spectrum[i][0] * spectrum[i][0] + spectrum[i][1] * spectrum[i][1];
    spectrum[i][1] = 0.0;
  }
  fftw_execute(backward);
  std::vector<double> gamma(max_lag + 1);
  const double scale = 1.0 / (static_cast<double>(size) * static_cast<double>(n));
  for (std::size_t l = 0; l <= max_lag; ++l) gamma[l] = buffer[l] * scale;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(buffer);
  fftw_free(spectrum);
  return gamma;
}

IatEstimate iat_estimate(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 100) throw SeriesTooShortError("iat_estimate: need at least 100 values");
  check_series(series);
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  if (*lo == *hi) throw DegenerateSeriesError("iat_estimate: series has zero variance");
  const std::vector<double> gamma = autocovariance(series, n - 1);
  if (!(gamma[0] > 0.0)) throw DegenerateSeriesError("iat_estimate: series has zero variance");

  double sum = 0.0;
  double previous = kInf;
  std::size_t last_lag = 0;
  for (std::size_t j = 0; 2 * j + 1 < n; ++j) {
    double pair = gamma[2 * j] + gamma[2 * j + 1];
    if (!(pair > 0.0)) break;
    pair = std::min(pair, previous);
    previous = pair;
    sum += pair;
    last_lag = 2 * j + 1;
  }
  const double tau = std::max(1.0, -1.0 + 2.0 * sum / gamma[0]);
  return {tau, n, last_lag};
}

double empirical_gap(std::span<const double> series) {
  return 2.0 / (iat_estimate(series).tau + 1.0);
}

}  // namespace kpss
