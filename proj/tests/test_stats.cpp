#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kpss/rng.hpp"
#include "kpss/stats.hpp"

namespace {

using namespace kpss;

// Brute-force sup |F_n - F| evaluated on both sides of every jump.
double brute_ks(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    worst = std::max({worst, std::abs((i + 1) / n - f), std::abs(i / n - f)});
  }
  return worst;
}

TEST(Ks, MatchesBruteForce) {
  RngStream rng(1, 0);
  std::vector<double> xs(500);
  for (auto& x : xs) x = rng.uniform();
  auto cdf = [](double x) { return std::clamp(x * x, 0.0, 1.0); };
  EXPECT_NEAR(stats::ks_statistic(xs, cdf), brute_ks(xs, cdf), 1e-15);
}

TEST(Ks, SingleSample) {
  const std::vector<double> xs = {0.3};
  EXPECT_NEAR(stats::ks_statistic(xs, [](double x) { return x; }), 0.7, 1e-15);
}

TEST(Ks, TwoSampleKnownValue) {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {3.5, 5, 6, 7};
  // After 3: F_a = 3/4, F_b = 0.
  EXPECT_DOUBLE_EQ(stats::ks_statistic(a, b), 0.75);
  EXPECT_DOUBLE_EQ(stats::ks_statistic(a, a), 0.0);
}

TEST(Ks, TwoSampleTies) {
  const std::vector<double> a = {1, 1, 2};
  const std::vector<double> b = {1, 2, 2};
  EXPECT_NEAR(stats::ks_statistic(a, b), 1.0 / 3.0, 1e-15);
}

TEST(Kolmogorov, SurvivalKnownValues) {
  // Tabulated limiting distribution: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
  EXPECT_NEAR(stats::kolmogorov_survival(1.3581), 0.05, 2e-4);
  EXPECT_NEAR(stats::kolmogorov_survival(1.6276), 0.01, 2e-4);
  EXPECT_NEAR(stats::kolmogorov_survival(0.0), 1.0, 1e-12);
  EXPECT_LT(stats::kolmogorov_survival(5.0), 1e-20);
}

TEST(Kolmogorov, CriticalValues) {
  EXPECT_NEAR(stats::kolmogorov_critical(0.01), 1.6276, 1e-3);
  EXPECT_NEAR(stats::kolmogorov_critical(0.05), 1.3581, 1e-3);
}

TEST(Kolmogorov, TwoSampleScale) {
  EXPECT_DOUBLE_EQ(stats::two_sample_scale(100, 100), 50.0);
}

TEST(Ks, UniformDrawsPassAtOnePercent) {
  RngStream rng(2, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = rng.uniform();
  const double d = stats::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(std::sqrt(100000.0) * d, stats::kolmogorov_critical(0.01));
}

}  // namespace
