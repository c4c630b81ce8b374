#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpss/config.hpp"
#include "kpss/kernels.hpp"
#include "kpss/targets.hpp"

namespace kpss {

/// Stream id reserved for draws that belong to no grid cell.
inline constexpr std::uint64_t kAuxStream = ~std::uint64_t{0};

const std::vector<std::string>& experiment_names();

/// Fixed CSV header line (without newline) of an experiment.
std::string_view csv_columns(std::string_view experiment);

/// Round-trip decimal with 17 significant digits.
std::string format_number(double value);

/// Target described by the [target] section.
Target parse_target(const Config& config);

/// Chain settings from the [chain] section; `length` counts recorded steps.
struct ChainSettings {
  std::size_t length = 200'000;
  std::size_t burn_in = 1'000;
  std::size_t thinning = 1;
  std::string summary = "norm";
  bool stationary_init = true;
  std::vector<double> x0;
};

ChainSettings parse_chain(const Config& config, const std::string& default_summary = "norm");

/// Runs one chain under `settings`; the initial state is drawn from `rng`
/// when the settings ask for a stationary start.
ChainResult run_configured_chain(const Target& target, const ChainSettings& settings,
                                 RngStream& rng);

struct KsCheck {
  std::size_t n;
  double statistic;
  double threshold;
  double iat;
  bool pass;
};

/// One-sample KS test of correlated draws against `cdf`, with the critical
/// value scaled to the effective sample size n / tau. tau is the largest IAT
/// of F(x_i) and of the indicators F(x_i) <= q for q in {0.1, 0.25, 0.5, 0.75, 0.9}.
KsCheck ks_stationarity(std::span<const double> draws, const std::function<double(double)>& cdf,
                        double alpha);

struct ExperimentOutcome {
  std::size_t cells = 0;
  std::size_t failed_cells = 0;
};

/// Checks sections, keys and family hypotheses; throws ConfigError.
void validate_experiment(const std::string& experiment, const Config& config);

/// Validates, runs and writes the CSV (header comments, column line, rows) to `csv`.
/// Seed and thread count come from [run]. Failed cells become comment lines.
ExperimentOutcome run_experiment(const std::string& experiment, const Config& config,
                                 std::ostream& csv);

}  // namespace kpss
