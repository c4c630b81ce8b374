#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kpss/mathcore.hpp"
#include "kpss/rng.hpp"
#include "kpss/targets.hpp"

namespace kpss {

inline constexpr std::size_t kDefaultProposalCap = 1'000'000;

/// Internals of one exact k-PSS transition.
struct TransitionRecord {
  double log_t;
  double r_new;
  Direction theta_new;
  Point x_new;
};

struct ChainConfig {
  std::size_t n_steps = 0;
  std::size_t burn_in = 0;
  std::size_t thinning = 1;
  Point x0;
};

using Summary = std::function<double(const Point&)>;

namespace summaries {
double norm(const Point& x);
double log_norm(const Point& x);
}  // namespace summaries

struct ChainResult {
  std::vector<double> series;
  std::size_t steps = 0;
  /// Total direction proposals; exceeds `steps` only for rejection-sampled directions.
  std::size_t direction_proposals = 0;
};

/// log t = log u1 + log eta_{k,1}(x) for a given u1 in (0, 1].
double threshold_from_uniform(const Target& target, const Point& x, double u1);

/// Draws u1 from (0, 1) and returns the log threshold.
double draw_threshold(const Target& target, const Point& x, RngStream& rng);

/// Inverse-CDF draw of the new radius on the slice along `theta`.
double radial_update(const Target& target, double log_t, const Direction& theta, double u2);

/// Uniform direction, or for rotationally asymmetric targets a draw from the
/// density proportional to chi(theta)^{-k/m} by rejection against its lower bound.
Direction direction_update(const Target& target, RngStream& rng,
                           std::size_t max_proposals = kDefaultProposalCap,
                           std::size_t* proposals = nullptr);

/// One transition with the randomness supplied explicitly.
TransitionRecord step_with(const Target& target, const Point& x, double u1, double u2,
                           const Direction& theta);

TransitionRecord step(const Target& target, const Point& x, RngStream& rng);

/// Runs the chain and records summary(x_i) for steps i > burn_in at the given thinning.
ChainResult run_chain(const Target& target, const ChainConfig& config, const Summary& summary,
                      RngStream& rng);

}  // namespace kpss
