#include "kpss/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>

#include <Eigen/Dense>

#include "kpss/coupling.hpp"
#include "kpss/errors.hpp"
#include "kpss/parallel.hpp"
#include "kpss/spectral.hpp"
#include "kpss/stats.hpp"

namespace kpss {

namespace {

using Row = std::vector<std::string>;

struct Cell {
  std::string label;
  std::function<std::vector<Row>(RngStream&)> run;
};

struct Plan {
  std::vector<Cell> cells;
};

const std::map<std::string, std::string, std::less<>>& column_table() {
  static const std::map<std::string, std::string, std::less<>> table = {
      {"stationarity", "check,n,statistic,threshold,pass"},
      {"contraction", "norm_x,norm_y,empirical_rate,std_error,theoretical_rate,bound_holds"},
      {"sharpness", "r,mc_value,mc_std_error,quadrature_value,theoretical_rate"},
      {"empirical-gap", "n_used,iat,truncation_lag,empirical_gap,theory_bound,heuristic_warning"},
      {"levelset", "log_t,mc_value,mc_std_error,closed_form,z_score"},
      {"lambda-k", "kind,p,verdict"},
      {"gap-bound", "kind,d,k,m,value"},
      {"figure-appB-left", "m,empirical_gap,theory_bound"},
      {"figure-appB-right", "d,m,empirical_gap,theory_bound"},
  };
  return table;
}

const std::vector<std::string> kRunKeys = {"seed", "threads", "experiment"};
const std::vector<std::string> kTargetKeys = {
    "family", "d",       "k",        "m",          "eps",      "phi",       "phi_scale",
    "phi_exponent", "phi_rate", "phi_offset", "kappa", "chi", "chi_value", "sigma",
    "sigma_diag", "chi_scale", "chi_power"};
const std::vector<std::string> kChainKeys = {"length", "burn_in", "thinning",
                                             "summary", "init",    "x0"};

std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt_opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::size_t positive_count(const Config& c, const std::string& section, const std::string& key,
                           std::int64_t fallback, std::int64_t minimum = 1) {
  const std::int64_t v = c.get_int(section, key, fallback);
  if (v < minimum) {
    throw ConfigError(c.where(section, key) + ": must be >= " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(v);
}

int dimension(const Config& c, const std::string& section, const std::string& key) {
  const std::int64_t d = c.get_int(section, key);
  if (d < 1 || d > 1'000'000) throw ConfigError(c.where(section, key) + ": dimension out of range");
  return static_cast<int>(d);
}

PhiSpec parse_phi(const Config& c) {
  const std::string kind = c.get_string("target", "phi", "linear");
  const double offset = c.get_double("target", "phi_offset", 0.0);
  const double kappa = c.get_double("target", "kappa", kInf);
  const double scale = c.get_double("target", "phi_scale", 1.0);
  if (kind == "linear") return PhiSpec::linear(scale, offset, kappa);
  if (kind == "power") {
    return PhiSpec::power(scale, c.get_double("target", "phi_exponent", 2.0), offset, kappa);
  }
  if (kind == "exponential") {
    return PhiSpec::exponential(scale, c.get_double("target", "phi_rate", 1.0), offset, kappa);
  }
  throw ConfigError(c.where("target", "phi") + ": unknown phi '" + kind +
                    "' (linear, power, exponential)");
}

AngularScale parse_chi(const Config& c, int d) {
  const std::string kind = c.get_string("target", "chi", "constant");
  if (kind == "constant") return AngularScale::constant(c.get_double("target", "chi_value", 1.0));
  if (kind != "quadratic") {
    throw ConfigError(c.where("target", "chi") + ": unknown chi '" + kind +
                      "' (constant, quadratic)");
  }
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(d, d);
  if (c.has("target", "sigma")) {
    const auto values = c.get_list("target", "sigma");
    if (values.size() != static_cast<std::size_t>(d) * d) {
      throw ConfigError(c.where("target", "sigma") + ": expected d*d row-major entries");
    }
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) sigma(i, j) = values[static_cast<std::size_t>(i) * d + j];
    }
  } else if (c.has("target", "sigma_diag")) {
    const auto values = c.get_list("target", "sigma_diag");
    if (values.size() != static_cast<std::size_t>(d)) {
      throw ConfigError(c.where("target", "sigma_diag") + ": expected d entries");
    }
    for (int i = 0; i < d; ++i) sigma(i, i) = values[i];
  }
  return AngularScale::quadratic(sigma, c.get_double("target", "chi_scale", 0.5),
                                 c.get_double("target", "chi_power", 1.0));
}

Summary summary_by_name(const std::string& name) {
  if (name == "norm") return summaries::norm;
  if (name == "log_norm") return summaries::log_norm;
  throw ConfigError("unknown summary '" + name + "' (norm, log_norm)");
}

std::vector<Row> single_row(Row row) { return {std::move(row)}; }

// Relative error of covariance entry (i, j), measured on the scale sqrt(S_ii S_jj).
double covariance_error(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want, int i, int j) {
  return std::abs(got(i, j) - want(i, j)) / std::sqrt(want(i, i) * want(j, j));
}

std::optional<Eigen::MatrixXd> gaussian_covariance(const Target& target) {
  const auto* t = std::get_if<RotAsymTarget>(&target.family());
  if (t == nullptr || t->m != 2.0 || t->k != static_cast<double>(t->d)) return std::nullopt;
  const auto& q = t->chi.quadratic_form();
  if (!q || q->power != 1.0) return std::nullopt;
  // exp(-s x^T P x) is N(0, P^{-1} / (2 s)).
  return Eigen::MatrixXd(q->precision.inverse() / (2.0 * q->scale));
}

Plan plan_stationarity(const Config& c) {
  c.require_known_keys("stationarity", {"alpha", "cov_tol"});
  const Target target = parse_target(c);
  const ChainSettings chain = parse_chain(c);
  const double alpha = c.get_double("stationarity", "alpha", 0.01);
  const double cov_tol = c.get_double("stationarity", "cov_tol", 0.05);
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError(c.where("stationarity", "alpha") + ": must lie in (0, 1)");
  }
  if (!(cov_tol > 0.0)) throw ConfigError(c.where("stationarity", "cov_tol") + ": must be positive");
  Plan plan;
  plan.cells.push_back({"stationarity chain", [=](RngStream& rng) {
    const std::optional<Eigen::MatrixXd> cov = gaussian_covariance(target);
    bool has_cdf = true;
    try {
      (void)radial_stationary_cdf(target, 1.0);
    } catch (const NotAvailableError&) {
      has_cdf = false;
    }
    if (!has_cdf && !cov) {
      throw NotAvailableError("no stationarity check available for " + std::string(target.name()));
    }
    const int d = target.dim();
    std::vector<double> radii;
    radii.reserve(chain.length);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(d, d);
    ChainSettings settings = chain;
    const Summary record = [&](const Point& x) {
      radii.push_back(radius_of(x));
      if (cov) {
        sum += x;
        outer.noalias() += x * x.transpose();
      }
      return 0.0;
    };
    ChainConfig config;
    config.burn_in = settings.burn_in;
    config.thinning = settings.thinning;
    config.n_steps = settings.burn_in + settings.length * settings.thinning;
    config.x0 = settings.stationary_init ? draw_stationary(target, rng)
                                         : Eigen::Map<const Point>(settings.x0.data(), d);
    (void)run_chain(target, config, record, rng);

    std::vector<Row> rows;
    const std::size_t n = radii.size();
    if (has_cdf) {
      const KsCheck ks = ks_stationarity(
          radii, [&](double r) { return radial_stationary_cdf(target, r); }, alpha);
      rows.push_back({"ks_radius", fmt(n), format_number(ks.statistic),
                      format_number(ks.threshold), fmt(ks.pass)});
    }
    if (cov) {
      const double nn = static_cast<double>(n);
      const Eigen::VectorXd mean = sum / nn;
      const Eigen::MatrixXd sample = (outer - nn * mean * mean.transpose()) / (nn - 1.0);
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          const double err = covariance_error(sample, *cov, i, j);
          rows.push_back({"cov_" + std::to_string(i) + "_" + std::to_string(j), fmt(n),
                          format_number(err), format_number(cov_tol), fmt(err <= cov_tol)});
        }
      }
    }
    return rows;
  }});
  return plan;
}

Plan plan_contraction(const Config& c, std::uint64_t seed) {
  c.require_known_keys("contraction", {"radii", "n", "direction"});
  const Target target = parse_target(c);
  try {
    (void)theoretical_contraction_rate(target);
  } catch (const UnsupportedFamilyError& e) {
    throw ConfigError(c.where("target", "family") + ": " + e.what());
  }
  const auto radii = c.get_list("contraction", "radii", {0.5, 1.0, 2.0, 5.0});
  for (const double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigError(c.where("contraction", "radii") + ": radii must be positive");
    }
  }
  const std::size_t n = positive_count(c, "contraction", "n", 100'000, 2);
  std::optional<Direction> theta;
  if (c.has("contraction", "direction")) {
    const auto v = c.get_list("contraction", "direction");
    if (v.size() != static_cast<std::size_t>(target.dim())) {
      throw ConfigError(c.where("contraction", "direction") + ": expected d entries");
    }
    try {
      theta.emplace(Eigen::Map<const Point>(v.data(), target.dim()));
    } catch (const DomainError& e) {
      throw ConfigError(c.where("contraction", "direction") + ": " + e.what());
    }
  } else {
    RngStream aux(seed, kAuxStream);
    theta.emplace(sample_unit_sphere(target.dim(), aux));
  }
  Plan plan;
  for (const CoupledPair& pair : ray_pairs(radii, *theta)) {
    const double nx = radius_of(pair.x);
    const double ny = radius_of(pair.y);
    plan.cells.push_back(
        {"pair (" + format_number(nx) + ", " + format_number(ny) + ")",
         [=](RngStream& rng) {
           const ContractionEstimate est = contraction_ratio(target, pair, n, rng);
           const bool holds = est.empirical_rate <= est.theoretical_rate + 3.0 * est.std_error;
           return single_row({format_number(nx), format_number(ny),
                              format_number(est.empirical_rate), format_number(est.std_error),
                              format_number(est.theoretical_rate), fmt(holds)});
         }});
  }
  return plan;
}

Plan plan_sharpness(const Config& c) {
  c.require_known_keys("sharpness", {"r", "n"});
  const Target target = parse_target(c);
  if (!std::holds_alternative<StdTTarget>(target.family()) &&
      !std::holds_alternative<ParetoShellTarget>(target.family())) {
    throw ConfigError(c.where("target", "family") +
                      ": sharpness is defined for the std_t and pareto_shell families");
  }
  const auto rs = c.get_list("sharpness", "r", {1e4});
  const std::size_t n = positive_count(c, "sharpness", "n", 1'000'000, 2);
  Point e1 = Point::Zero(target.dim());
  e1[0] = 1.0;
  const Direction theta0(e1);
  Plan plan;
  for (const double r : rs) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ConfigError(c.where("sharpness", "r") + ": r must be positive");
    }
    plan.cells.push_back({"r = " + format_number(r), [=](RngStream& rng) {
      const SharpnessEstimate est = sharpness_probe(target, r, theta0, n, rng);
      return single_row({format_number(r), format_number(est.value), format_number(est.std_error),
                         fmt_opt(est.quadrature), format_number(est.theoretical_rate)});
    }});
  }
  return plan;
}

Plan plan_empirical_gap(const Config& c) {
  const Target target = parse_target(c);
  const ChainSettings chain = parse_chain(c);
  if (chain.length < 100) {
    throw ConfigError(c.where("chain", "length") + ": the IAT estimate needs at least 100 values");
  }
  Plan plan;
  plan.cells.push_back({"empirical-gap chain", [=](RngStream& rng) {
    const ChainResult result = run_configured_chain(target, chain, rng);
    const IatEstimate iat = iat_estimate(result.series);
    const std::optional<GapBound> bound = gap_bound_for(target);
    const bool warn = bound && heuristic_warning(bound->value);
    return single_row({fmt(iat.n_used), format_number(iat.tau), fmt(iat.truncation_lag),
                       format_number(2.0 / (iat.tau + 1.0)),
                       bound ? format_number(bound->value) : "", fmt(warn)});
  }});
  return plan;
}

LevelSetFn closed_form_or_config_error(const Config& c, const Target& target) {
  try {
    return level_set_closed_form(target);
  } catch (const UnsupportedFamilyError& e) {
    throw ConfigError(c.where("target", "family") + ": " + e.what());
  }
}

Plan plan_levelset(const Config& c) {
  c.require_known_keys("levelset", {"n", "points", "log_t_min", "log_t_max", "log_t"});
  const Target target = parse_target(c);
  const LevelSetFn ell = closed_form_or_config_error(c, target);
  const std::size_t n = positive_count(c, "levelset", "n", 1'000'000, 2);
  std::vector<double> grid;
  if (c.has("levelset", "log_t")) {
    grid = c.get_list("levelset", "log_t");
  } else {
    const double top = ell.log_t_max();
    const double lo = c.get_double("levelset", "log_t_min", top - 10.0);
    const double hi = c.get_double("levelset", "log_t_max", top - 0.1);
    const std::size_t points = positive_count(c, "levelset", "points", 20, 2);
    if (!(lo < hi)) throw ConfigError(c.where("levelset", "log_t_min") + ": must be < log_t_max");
    for (std::size_t i = 0; i < points; ++i) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
  }
  for (const double g : grid) {
    if (!(g < ell.log_t_max())) {
      throw ConfigError(c.where("levelset", c.has("levelset", "log_t") ? "log_t" : "log_t_max") +
                        ": grid point " + format_number(g) + " outside the support of ell");
    }
  }
  Plan plan;
  for (const double log_t : grid) {
    plan.cells.push_back({"log_t = " + format_number(log_t), [=](RngStream& rng) {
      const MonteCarloEstimate mc = level_set_mc(target, log_t, n, rng);
      const double closed = ell.at_log(log_t);
      // Zero-variance estimates are compared at the rounding level.
      const double se = std::max(std::hypot(mc.std_error, ell.relative_std_error() * closed),
                                 1e-12 * std::abs(closed));
      return single_row({format_number(log_t), format_number(mc.value),
                         format_number(mc.std_error), format_number(closed),
                         format_number((mc.value - closed) / se)});
    }});
  }
  return plan;
}

Plan plan_lambda_k(const Config& c) {
  c.require_known_keys("lambda_k",
                       {"p", "boundary", "p_lo", "p_hi", "tol", "grid_lo", "grid_hi", "grid_points"});
  const Target target = parse_target(c);
  const LevelSetFn ell = closed_form_or_config_error(c, target);
  const auto ps = c.get_list("lambda_k", "p", {1.2, 1.4, 1.5, 2.0, 3.0});
  for (const double p : ps) {
    if (!(p > 0.0)) throw ConfigError(c.where("lambda_k", "p") + ": exponents must be positive");
  }
  LambdaGrid grid;
  grid.lo_offset = c.get_double("lambda_k", "grid_lo", grid.lo_offset);
  grid.hi_offset = c.get_double("lambda_k", "grid_hi", grid.hi_offset);
  grid.points = positive_count(c, "lambda_k", "grid_points", 401, 3);
  if (!(grid.lo_offset > 0.0 && grid.hi_offset > grid.lo_offset)) {
    throw ConfigError(c.where("lambda_k", "grid_lo") + ": need 0 < grid_lo < grid_hi");
  }
  const bool boundary = c.get_bool("lambda_k", "boundary", true);
  const double p_lo = c.get_double("lambda_k", "p_lo", *std::min_element(ps.begin(), ps.end()));
  const double p_hi = c.get_double("lambda_k", "p_hi", *std::max_element(ps.begin(), ps.end()));
  const double tol = c.get_double("lambda_k", "tol", 1e-3);
  if (boundary && !(p_lo > 0.0 && p_hi > p_lo && tol > 0.0)) {
    throw ConfigError(c.where("lambda_k", "p_lo") + ": need 0 < p_lo < p_hi and tol > 0");
  }
  Plan plan;
  for (const double p : ps) {
    plan.cells.push_back({"p = " + format_number(p), [=](RngStream&) {
      return single_row({"check", format_number(p), std::string(to_string(lambda_k_check(ell, p, grid)))});
    }});
  }
  if (boundary) {
    plan.cells.push_back({"boundary search", [=](RngStream&) {
      return single_row(
          {"boundary", format_number(lambda_k_boundary(ell, p_lo, p_hi, tol, grid)), "boundary"});
    }});
  }
  return plan;
}

Plan plan_gap_bound(const Config& c) {
  c.require_known_keys("gap_bound", {"kind", "d", "k", "m"});
  GapKind kind{};
  try {
    kind = gap_kind_from_string(c.get_string("gap_bound", "kind"));
  } catch (const DomainError& e) {
    throw ConfigError(c.where("gap_bound", "kind") + ": " + e.what());
  }
  GapParams params;
  params.d = c.has("gap_bound", "d") ? dimension(c, "gap_bound", "d") : 0;
  params.k = c.get_double("gap_bound", "k", kind == GapKind::multiv_t ? params.d : 0.0);
  params.m = c.get_double("gap_bound", "m", 0.0);
  GapBound bound{};
  try {
    bound = gap_lower_bound(kind, params);
  } catch (const Error& e) {
    throw ConfigError(c.where("gap_bound", "kind") + ": " + e.what());
  }
  Plan plan;
  plan.cells.push_back({"gap bound", [=](RngStream&) {
    return single_row({std::string(to_string(bound.kind)), std::to_string(params.d),
                       format_number(params.k), format_number(params.m),
                       format_number(bound.value)});
  }});
  return plan;
}

std::vector<double> powers_of_two(const std::vector<double>& exponents) {
  std::vector<double> out;
  for (const double e : exponents) out.push_back(std::exp2(e));
  return out;
}

double gap_of(const Target& target, const ChainSettings& chain, RngStream& rng) {
  const ChainResult result = run_configured_chain(target, chain, rng);
  return empirical_gap(result.series);
}

ChainSettings figure_chain(const Config& c, const std::string& summary) {
  ChainSettings chain = parse_chain(c, summary);
  if (!chain.stationary_init) {
    throw ConfigError(c.where("chain", "init") + ": figure experiments start from stationarity");
  }
  if (chain.length < 100) {
    throw ConfigError(c.where("chain", "length") + ": the IAT estimate needs at least 100 values");
  }
  return chain;
}

Plan plan_figure_left(const Config& c) {
  c.require_known_keys("figure", {"d", "k", "m_log2"});
  const ChainSettings chain = figure_chain(c, "log_norm");
  const int d = c.has("figure", "d") ? dimension(c, "figure", "d") : 10;
  const double k = c.get_double("figure", "k", 1.0);
  if (!(k > 0.0)) throw ConfigError(c.where("figure", "k") + ": must be positive");
  std::vector<double> exps;
  for (int i = 0; i <= 14; ++i) exps.push_back(-0.5 * i);
  const auto ms = powers_of_two(c.get_list("figure", "m_log2", exps));
  Plan plan;
  for (const double m : ms) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError(c.where("figure", "m_log2") + ": m out of range");
    }
    const Target target = Target::rot_inv(d, k, m, PhiSpec::linear(1.0));
    plan.cells.push_back({"m = " + format_number(m), [=](RngStream& rng) {
      return single_row(
          {format_number(m), format_number(gap_of(target, chain, rng)), format_number(m / (k + m))});
    }});
  }
  return plan;
}

Plan plan_figure_right(const Config& c) {
  c.require_known_keys("figure", {"d_log2", "m_log2"});
  const ChainSettings chain = figure_chain(c, "norm");
  std::vector<double> d_exps;
  for (int i = 1; i <= 10; ++i) d_exps.push_back(i);
  const auto ds = powers_of_two(c.get_list("figure", "d_log2", d_exps));
  const auto ms = powers_of_two(c.get_list("figure", "m_log2", {0, 1, 2, 3, 4}));
  Plan plan;
  for (const double m : ms) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError(c.where("figure", "m_log2") + ": m out of range");
    }
    for (const double dd : ds) {
      if (dd != std::floor(dd) || dd < 1.0 || dd > 1e6) {
        throw ConfigError(c.where("figure", "d_log2") + ": d must be a positive integer");
      }
      const int d = static_cast<int>(dd);
      const Target target = Target::rot_inv(d, dd, m, PhiSpec::linear(1.0));
      plan.cells.push_back({"d = " + std::to_string(d) + ", m = " + format_number(m),
                            [=](RngStream& rng) {
        return single_row({std::to_string(d), format_number(m),
                           format_number(gap_of(target, chain, rng)),
                           format_number(m / (dd + m))});
      }});
    }
  }
  return plan;
}

std::vector<std::string> sections_for(const std::string& experiment) {
  if (experiment == "stationarity") return {"run", "target", "chain", "stationarity"};
  if (experiment == "contraction") return {"run", "target", "contraction"};
  if (experiment == "sharpness") return {"run", "target", "sharpness"};
  if (experiment == "empirical-gap") return {"run", "target", "chain"};
  if (experiment == "levelset") return {"run", "target", "levelset"};
  if (experiment == "lambda-k") return {"run", "target", "lambda_k"};
  if (experiment == "gap-bound") return {"run", "gap_bound"};
  return {"run", "chain", "figure"};
}

Plan make_plan(const std::string& experiment, const Config& c) {
  if (column_table().find(experiment) == column_table().end()) {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  c.require_known_sections(sections_for(experiment));
  c.require_known_keys("run", kRunKeys);
  c.require_known_keys("target", kTargetKeys);
  c.require_known_keys("chain", kChainKeys);
  if (c.has("run", "experiment") && c.get_string("run", "experiment") != experiment) {
    throw ConfigError(c.where("run", "experiment") + ": config is for experiment '" +
                      c.get_string("run", "experiment") + "'");
  }
  (void)positive_count(c, "run", "threads", 1);
  const std::uint64_t seed = c.get_uint("run", "seed", 0);
  if (experiment == "stationarity") return plan_stationarity(c);
  if (experiment == "contraction") return plan_contraction(c, seed);
  if (experiment == "sharpness") return plan_sharpness(c);
  if (experiment == "empirical-gap") return plan_empirical_gap(c);
  if (experiment == "levelset") return plan_levelset(c);
  if (experiment == "lambda-k") return plan_lambda_k(c);
  if (experiment == "gap-bound") return plan_gap_bound(c);
  if (experiment == "figure-appB-left") return plan_figure_left(c);
  return plan_figure_right(c);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "stationarity", "contraction", "sharpness",        "empirical-gap",    "levelset",
      "lambda-k",     "gap-bound",   "figure-appB-left", "figure-appB-right"};
  return names;
}

std::string_view csv_columns(std::string_view experiment) {
  const auto it = column_table().find(experiment);
  if (it == column_table().end()) throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  return it->second;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

Target parse_target(const Config& c) {
  const std::string family = c.get_string("target", "family");
  try {
    if (family == "dk") {
      return Target::dk(dimension(c, "target", "d"), c.get_double("target", "k"), parse_phi(c));
    }
    if (family == "rot_inv") {
      return Target::rot_inv(dimension(c, "target", "d"), c.get_double("target", "k"),
                             c.get_double("target", "m"), parse_phi(c));
    }
    if (family == "rot_asym") {
      const int d = dimension(c, "target", "d");
      return Target::rot_asym(d, c.get_double("target", "k"), c.get_double("target", "m"),
                              parse_chi(c, d));
    }
    if (family == "std_t") {
      return Target::std_t(dimension(c, "target", "d"), c.get_double("target", "m"));
    }
    if (family == "pareto_shell") {
      return Target::pareto_shell(dimension(c, "target", "d"), c.get_double("target", "k"),
                                  c.get_double("target", "m"), c.get_double("target", "eps", 1.0));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(c.where("target", "family") + ": " + e.what());
  }
  throw ConfigError(c.where("target", "family") + ": unknown family '" + family +
                    "' (dk, rot_inv, rot_asym, std_t, pareto_shell)");
}

ChainSettings parse_chain(const Config& c, const std::string& default_summary) {
  ChainSettings s;
  s.length = positive_count(c, "chain", "length", 200'000);
  s.burn_in = positive_count(c, "chain", "burn_in", 1'000, 0);
  s.thinning = positive_count(c, "chain", "thinning", 1);
  s.summary = c.get_string("chain", "summary", default_summary);
  try {
    (void)summary_by_name(s.summary);
  } catch (const ConfigError& e) {
    throw ConfigError(c.where("chain", "summary") + ": " + e.what());
  }
  const std::string init = c.get_string("chain", "init", "stationary");
  if (init == "stationary") {
    s.stationary_init = true;
  } else if (init == "point") {
    s.stationary_init = false;
    s.x0 = c.get_list("chain", "x0");
    if (c.has("target", "d") &&
        s.x0.size() != static_cast<std::size_t>(c.get_int("target", "d"))) {
      throw ConfigError(c.where("chain", "x0") + ": expected d entries");
    }
  } else {
    throw ConfigError(c.where("chain", "init") + ": expected stationary or point");
  }
  return s;
}

ChainResult run_configured_chain(const Target& target, const ChainSettings& settings,
                                 RngStream& rng) {
  ChainConfig config;
  config.burn_in = settings.burn_in;
  config.thinning = settings.thinning;
  config.n_steps = settings.burn_in + settings.length * settings.thinning;
  if (settings.stationary_init) {
    config.x0 = draw_stationary(target, rng);
  } else {
    if (settings.x0.size() != static_cast<std::size_t>(target.dim())) {
      throw DomainError("chain: x0 has the wrong dimension");
    }
    config.x0 = Eigen::Map<const Point>(settings.x0.data(), target.dim());
  }
  return run_chain(target, config, summary_by_name(settings.summary), rng);
}

KsCheck ks_stationarity(std::span<const double> draws, const std::function<double(double)>& cdf,
                        double alpha) {
  const std::size_t n = draws.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = cdf(draws[i]);
  double tau = iat_estimate(u).tau;
  std::vector<double> indicator(n);
  for (const double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (std::size_t i = 0; i < n; ++i) indicator[i] = u[i] <= q ? 1.0 : 0.0;
    try {
      tau = std::max(tau, iat_estimate(indicator).tau);
    } catch (const DegenerateSeriesError&) {
      // All draws on one side of the quantile; F(x) already carries the signal.
    }
  }
  const double statistic = stats::ks_statistic(draws, cdf);
  const double n_eff = static_cast<double>(n) / tau;
  const double threshold = stats::kolmogorov_critical(alpha) / std::sqrt(n_eff);
  return {n, statistic, threshold, tau, statistic <= threshold};
}

void validate_experiment(const std::string& experiment, const Config& config) {
  (void)make_plan(experiment, config);
}

ExperimentOutcome run_experiment(const std::string& experiment, const Config& config,
                                 std::ostream& csv) {
  const Plan plan = make_plan(experiment, config);
  const std::uint64_t seed = config.get_uint("run", "seed", 0);
  const auto threads = static_cast<unsigned>(config.get_int("run", "threads", 1));

  struct Output {
    std::vector<Row> rows;
    std::string error;
  };
  std::vector<Output> outputs(plan.cells.size());
  parallel_for(plan.cells.size(), threads, [&](std::size_t i) {
    RngStream rng(seed, i);
    try {
      outputs[i].rows = plan.cells[i].run(rng);
    } catch (const std::exception& e) {
      outputs[i].error = e.what();
    }
  });

  csv << "# kpss " << experiment << "\n";
  csv << "# seed = " << seed << "\n";
  config.write_comments(csv, {"run.threads", "run.seed"});
  csv << csv_columns(experiment) << "\n";
  ExperimentOutcome outcome;
  outcome.cells = plan.cells.size();
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!outputs[i].error.empty()) {
      ++outcome.failed_cells;
      std::string message = outputs[i].error;
      std::replace(message.begin(), message.end(), '\n', ' ');
      csv << "# error in cell " << i << " (" << plan.cells[i].label << "): " << message << "\n";
      continue;
    }
    for (const Row& row : outputs[i].rows) {
      for (std::size_t j = 0; j < row.size(); ++j) csv << (j ? "," : "") << row[j];
      csv << "\n";
    }
  }
  return outcome;
}

}  // namespace kpss
