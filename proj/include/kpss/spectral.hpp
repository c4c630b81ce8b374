#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kpss/mathcore.hpp"
#include "kpss/rng.hpp"
#include "kpss/targets.hpp"

namespace kpss {

enum class LevelSetProvenance { closed_form, quadrature, monte_carlo };

/// Generalized level-set function t -> int rho_0(x) 1{rho_1(x) > t} dx,
/// evaluated through log t. Zero for log t >= log_t_max.
class LevelSetFn {
 public:
  using Fn = std::function<double(double log_t)>;

  LevelSetFn(Fn at_log, double sup_ell, double log_t_max, LevelSetProvenance provenance,
             double relative_std_error = 0.0);

  double operator()(double t) const;
  [[nodiscard]] double at_log(double log_t) const;

  /// The unique log t in the support with ell = value, for value in (0, sup ell).
  [[nodiscard]] double inverse_log(double value) const;

  [[nodiscard]] double sup() const { return sup_; }
  [[nodiscard]] double log_t_max() const { return log_t_max_; }
  [[nodiscard]] LevelSetProvenance provenance() const { return provenance_; }
  /// Relative standard error of a Monte Carlo constant, zero otherwise.
  [[nodiscard]] double relative_std_error() const { return relative_std_error_; }

 private:
  Fn at_log_;
  double sup_;
  double log_t_max_;
  LevelSetProvenance provenance_;
  double relative_std_error_;
};

/// C(k, chi, m) = (1/k) int chi^{-k/m} d sigma. Exact for constant chi, for
/// quadratic chi whose exponent reduces to -d/2, and for d <= 2; Monte Carlo otherwise.
MonteCarloEstimate angular_constant(const RotAsymTarget& target);

/// Closed-form level-set function for D_k, rotationally invariant,
/// rotationally asymmetric and t targets.
LevelSetFn level_set_closed_form(const Target& target);

/// Polar Monte Carlo estimate omega_d E[(R_t(theta)^k - lo^k) / k].
MonteCarloEstimate level_set_mc(const Target& target, double log_t, std::size_t n, RngStream& rng);

enum class LambdaVerdict { member, not_member, inconclusive };

std::string_view to_string(LambdaVerdict v);

/// Offsets of the concavity grid relative to the left end of its domain.
struct LambdaGrid {
  double lo_offset = 0.01;
  double hi_offset = 40.0;
  std::size_t points = 401;
};

/// Grid test of the concavity of s -> ell(exp(-s))^{1/k}.
LambdaVerdict lambda_k_check(const LevelSetFn& ell, double k, const LambdaGrid& grid = {});

/// Smallest k with a `member` verdict, localized by bisection on [k_lo, k_hi].
double lambda_k_boundary(const LevelSetFn& ell, double k_lo, double k_hi, double tol = 1e-3,
                         const LambdaGrid& grid = {});

/// One-dimensional D_k target whose k-polar level-set function equals `ell`.
Target construct_matching_dk(const LevelSetFn& ell, double k, const LambdaGrid& grid = {});

/// Max relative deviation of the constructed target's level-set function from
/// `ell` on the given log-t grid, with phi inverted by bisection.
double matching_round_trip_error(const LevelSetFn& ell, const Target& matched,
                                 std::span<const double> log_t_grid);

enum class GapKind { dk, rot_inv, rot_asym, multiv_t };

std::string_view to_string(GapKind kind);
GapKind gap_kind_from_string(std::string_view name);

struct GapParams {
  int d = 0;
  double k = 0.0;
  double m = 0.0;
};

struct GapBound {
  GapKind kind;
  double value;
  GapParams params;
};

GapBound gap_lower_bound(GapKind kind, const GapParams& params);

/// The spectral gap bound that applies to `target`, if any.
std::optional<GapBound> gap_bound_for(const Target& target);

struct IatEstimate {
  double tau;
  std::size_t n_used;
  std::size_t truncation_lag;
};

/// Autocovariances gamma(0..max_lag) with divisor n, computed by FFT.
std::vector<double> autocovariance(std::span<const double> series, std::size_t max_lag);

/// Integrated autocorrelation time with initial-monotone-positive-sequence truncation.
IatEstimate iat_estimate(std::span<const double> series);

/// 2 / (tau + 1).
double empirical_gap(std::span<const double> series);

inline constexpr double kHeuristicWarningLevel = 0.25;

/// The IAT-based gap heuristic is biased upward for large gaps.
inline bool heuristic_warning(double theory_bound) { return theory_bound > kHeuristicWarningLevel; }

}  // namespace kpss
