#pragma once

#include <functional>
#include <span>
#include <vector>

namespace kpss::stats {

/// Two-sided one-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sided two-sample Kolmogorov-Smirnov statistic sup |F_n - G_m|.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double lambda);

/// Asymptotic critical value c(alpha) = sqrt(-log(alpha / 2) / 2) of sqrt(n) D.
double kolmogorov_critical(double alpha);

/// Effective sample size factor n * m / (n + m) of a two-sample test.
double two_sample_scale(std::size_t n, std::size_t m);

}  // namespace kpss::stats
