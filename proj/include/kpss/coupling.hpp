#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "kpss/kernels.hpp"

namespace kpss {

struct CoupledPair {
  Point x;
  Point y;
};

/// Randomness shared by both marginals of the coupling.
struct CouplingDraw {
  double u1;
  double u2;
  Direction theta;
};

struct ContractionRate {
  double value;
  /// False when the contraction theorem's hypotheses fail; `value` is then 1.
  bool hypotheses_hold;
};

struct ContractionEstimate {
  double empirical_rate = 0.0;
  double std_error = 0.0;
  double theoretical_rate = 1.0;
  std::vector<CoupledPair> pair_grid;
};

struct SharpnessEstimate {
  double r = 0.0;
  double value = 0.0;
  double std_error = 0.0;
  /// Closed-form mean-norm integral, available for the multivariate t target.
  std::optional<double> quadrature;
  double theoretical_rate = 1.0;
};

/// Wasserstein contraction rate of the exact sampler: k/(k+1) for D_k targets,
/// d(d+m)/((d+1)(d+m-1)) for the t target, k(k+m)/((k+1)(k+m-1)) for the Pareto shell.
ContractionRate theoretical_contraction_rate(const Target& target);

std::pair<Point, Point> coupled_update(const Target& target, const Point& x, const Point& y,
                                       const CouplingDraw& draw);

std::pair<Point, Point> coupled_step(const Target& target, const Point& x, const Point& y,
                                     RngStream& rng);

ContractionEstimate contraction_ratio(const Target& target, const CoupledPair& pair,
                                      std::size_t n, RngStream& rng);

/// All pairs (r_i theta, r_j theta), i < j, on the common ray through theta.
std::vector<CoupledPair> ray_pairs(const std::vector<double>& radii, const Direction& theta);

/// contraction_ratio over a pair grid; pair i uses stream i of `seed`.
std::vector<ContractionEstimate> contraction_over_grid(const Target& target,
                                                       const std::vector<CoupledPair>& pairs,
                                                       std::size_t n, std::uint64_t seed,
                                                       unsigned threads = 1);

/// |E||X'|| - E||Y'||| / (r/2) for x = r theta0, y = r theta0 / 2.
SharpnessEstimate sharpness_probe(const Target& target, double r, const Direction& theta0,
                                  std::size_t n, RngStream& rng);

/// Mean-norm difference ratio for the t target by 1-D quadrature.
double std_t_sharpness_quadrature(const StdTTarget& target, double r);

}  // namespace kpss
