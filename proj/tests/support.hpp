#pragma once

// Shared oracles and generators for the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "kpss/mathcore.hpp"
#include "kpss/rng.hpp"

namespace kpss::testkit {

/// Plain bisection for an increasing f on [lo, hi], independent of the library.
inline double bisect_increasing(const std::function<double(double)>& f, double target, double lo,
                                double hi) {
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct RandomPhi {
  PhiSpec phi;
  std::string family;
  double r_max;  // sampling range for r when kappa is infinite
};

/// Draws a valid PhiSpec: linear, quadratic or exponential, with finite or infinite kappa.
inline RandomPhi random_phi(RngStream& rng) {
  const int family = static_cast<int>(rng.uniform() * 3.0);
  const bool finite = rng.uniform() < 0.5;
  const double kappa = finite ? 0.5 + 9.5 * rng.uniform() : kInf;
  const double offset = -5.0 + 10.0 * rng.uniform();
  const double scale = 0.1 + 9.9 * rng.uniform();
  switch (family) {
    case 0:
      return {PhiSpec::linear(scale, offset, kappa), "linear", 20.0};
    case 1:
      return {PhiSpec::power(scale, 2.0, offset, kappa), "quadratic", 20.0};
    default: {
      const double rate = 0.1 + 2.9 * rng.uniform();
      return {PhiSpec::exponential(scale, rate, offset, kappa), "exponential", 10.0};
    }
  }
}

/// Largest violation of |phi^-(phi(r)+v) - phi^-(phi(s)+v)| <= |r - s| over n random tuples.
inline double non_expansion_worst(std::size_t n, RngStream& rng) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const RandomPhi g = random_phi(rng);
    const double top = std::isinf(g.phi.kappa()) ? g.r_max : g.phi.kappa();
    const double r = top * rng.uniform_open();
    const double s = top * rng.uniform_open();
    const double fr = g.phi(r);
    const double fs = g.phi(s);
    // v spans the interior and, for finite kappa, values that saturate at kappa.
    const double span = std::isfinite(g.phi.sup()) ? g.phi.sup() - g.phi.inf() : 10.0;
    const double v = rng.uniform() < 0.1 ? 0.0 : 1.5 * span * rng.uniform();
    const double lhs = std::abs(phi_inverse_extended(g.phi, fr + v) -
                                phi_inverse_extended(g.phi, fs + v));
    worst = std::max(worst, lhs - std::abs(r - s));
  }
  return worst;
}

}  // namespace kpss::testkit
