#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <Eigen/Dense>

#include "kpss/errors.hpp"
#include "kpss/experiments.hpp"
#include "kpss/targets.hpp"

namespace {

using namespace kpss;

Point ray(int d, double r) {
  Point x = Point::Zero(d);
  x[0] = r;
  return x;
}

Point random_point(int d, double r_max, RngStream& rng) {
  return r_max * rng.uniform_open() * sample_unit_sphere(d, rng).coords();
}

std::vector<Target> sample_targets() {
  Eigen::MatrixXd sigma = Eigen::Vector3d(1.0, 4.0, 9.0).asDiagonal();
  return {Target::dk(3, 1.0, PhiSpec::linear(1.0)),
          Target::dk(2, 2.5, PhiSpec::power(1.0, 2.0, 0.0, 3.0)),
          Target::rot_inv(4, 1.0, 0.5, PhiSpec::linear(1.0)),
          Target::rot_inv(3, 2.0, 2.0, PhiSpec::exponential(1.0, 1.0)),
          Target::rot_asym(3, 3.0, 2.0, AngularScale::quadratic(sigma)),
          Target::rot_asym(2, 1.0, 1.5, AngularScale::constant(2.0)),
          Target::std_t(2, 2.0),
          Target::std_t(5, 3.5),
          Target::pareto_shell(3, 1.0, 2.0, 1.0),
          Target::pareto_shell(2, 2.0, 1.5, 0.5)};
}

TEST(LogDensity, SpecExamples) {
  EXPECT_DOUBLE_EQ(log_density(Target::std_t(2, 2.0), Point::Zero(2)), 0.0);
  EXPECT_NEAR(log_density(Target::pareto_shell(3, 1.0, 2.0, 1.0), ray(3, 2.0)),
              -5.0 * std::log(2.0), 1e-14);
  EXPECT_NEAR(log_density(Target::dk(2, 1.0, PhiSpec::linear(1.0)), ray(2, 1.0)), -1.0, 1e-15);
}

TEST(LogDensity, MatchesDirectFormulas) {
  RngStream rng(1, 0);
  const Target t = Target::std_t(4, 3.0);
  const Target p = Target::pareto_shell(3, 1.0, 2.0, 1.0);
  const Target g = Target::rot_asym(2, 2.0, 2.0,
                                    AngularScale::quadratic(Eigen::Vector2d(1.0, 4.0).asDiagonal()));
  for (int i = 0; i < 1000; ++i) {
    const Point x = random_point(4, 20.0, rng);
    const double r = x.norm();
    EXPECT_NEAR(log_density(t, x), -3.5 * std::log1p(r * r / 3.0), 1e-12);
    const Point y = random_point(3, 20.0, rng);
    const double ry = y.norm();
    if (ry >= 1.0) {
      EXPECT_NEAR(log_density(p, y), -5.0 * std::log(ry), 1e-12 * (1.0 + std::log(ry)));
    } else {
      EXPECT_EQ(log_density(p, y), -kInf);
    }
    const Point z = random_point(2, 5.0, rng);
    EXPECT_NEAR(log_density(g, z), -0.5 * (z[0] * z[0] + z[1] * z[1] / 4.0), 1e-12);
  }
}

TEST(LogFactor1, SpecExamples) {
  EXPECT_NEAR(log_factor1(Target::pareto_shell(3, 1.0, 2.0, 1.0), ray(3, 2.0)),
              -3.0 * std::log(2.0), 1e-14);
  const Target asym = Target::rot_asym(2, 1.0, 2.0, AngularScale::constant(3.0));
  EXPECT_NEAR(log_factor1(asym, ray(2, 1e-9)), 0.0, 1e-15);
  const Target ball = Target::dk(2, 1.0, PhiSpec::linear(1.0, 0.0, 2.0));
  EXPECT_EQ(log_factor1(ball, ray(2, 2.0)), -kInf);
  EXPECT_THROW(log_factor1(ball, Point::Zero(2)), OriginError);
}

TEST(Factorization, DensityIsProductOfFactors) {
  RngStream rng(2, 0);
  for (const Target& target : sample_targets()) {
    for (int i = 0; i < 1000; ++i) {
      const Point x = random_point(target.dim(), 10.0, rng);
      const double f1 = log_factor1(target, x);
      const double total = log_density(target, x);
      if (f1 == -kInf) {
        ASSERT_EQ(total, -kInf);
        continue;
      }
      ASSERT_NEAR(total, log_factor0(target, x) + f1, 1e-12 * (1.0 + std::abs(total)))
          << target.name();
    }
  }
}

TEST(SliceBoundary, SpecExamples) {
  const Point e1 = ray(2, 1.0);
  const Direction theta(e1);
  const Target t = Target::std_t(2, 2.0);
  const RadialInterval s = slice_boundary(t, std::log(0.25), theta);
  EXPECT_DOUBLE_EQ(s.lo, 0.0);
  EXPECT_NEAR(s.hi, std::sqrt(2.0), 1e-15);
  EXPECT_THROW(slice_boundary(t, 0.0, theta), EmptySliceError);
  const Target p = Target::pareto_shell(2, 1.0, 2.0, 1.0);
  EXPECT_THROW(slice_boundary(p, 0.0, theta), EmptySliceError);
  const RadialInterval ps = slice_boundary(p, -3.0 * std::log(2.0), theta);
  EXPECT_DOUBLE_EQ(ps.lo, 1.0);
  EXPECT_NEAR(ps.hi, 2.0, 1e-15);
}

TEST(SliceBoundary, IndicatorConsistency) {
  RngStream rng(3, 0);
  for (const Target& target : sample_targets()) {
    int inside = 0;
    for (int i = 0; i < 2000; ++i) {
      const Point x = random_point(target.dim(), 8.0, rng);
      const double log_t = target.log_sup_factor1() - 10.0 * rng.uniform_open();
      const double f1 = log_factor1(target, x);
      if (std::abs(f1 - log_t) < 1e-12) continue;
      const RadialInterval slice = slice_boundary(target, log_t, Direction(x));
      ASSERT_EQ(f1 > log_t, slice.contains(x.norm())) << target.name() << " " << f1 << " " << log_t;
      inside += f1 > log_t;
    }
    EXPECT_GT(inside, 0) << target.name();
  }
}

TEST(SliceBoundary, RotationInvariantFamiliesIgnoreDirection) {
  RngStream rng(4, 0);
  const Target t = Target::rot_inv(3, 1.0, 0.5, PhiSpec::linear(1.0));
  const double a = slice_boundary(t, -2.0, sample_unit_sphere(3, rng)).hi;
  const double b = slice_boundary(t, -2.0, sample_unit_sphere(3, rng)).hi;
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a, 4.0, 1e-12);
}

TEST(RadialCdf, SpecExamples) {
  const Target p = Target::pareto_shell(3, 1.0, 2.0, 1.0);
  EXPECT_DOUBLE_EQ(radial_stationary_cdf(p, 1.0), 0.0);
  EXPECT_NEAR(radial_stationary_cdf(p, 2.0), 0.75, 1e-15);
  const Target dk = Target::dk(3, 1.0, PhiSpec::linear(1.0));
  EXPECT_DOUBLE_EQ(radial_stationary_cdf(dk, kInf), 1.0);
  const Target asym = Target::rot_asym(2, 1.0, 1.0, AngularScale::constant(1.0));
  EXPECT_THROW(radial_stationary_cdf(asym, 1.0), NotAvailableError);
}

TEST(RadialCdf, DkMatchesRegularizedGamma) {
  for (const double k : {0.5, 1.0, 2.0, 5.0}) {
    const Target t = Target::dk(3, k, PhiSpec::linear(1.0));
    for (const double r : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0}) {
      EXPECT_NEAR(radial_stationary_cdf(t, r), boost::math::gamma_p(k, r), 1e-10) << k << " " << r;
    }
  }
}

TEST(RadialCdf, RotInvMatchesRegularizedGamma) {
  const Target t = Target::rot_inv(5, 1.0, 0.25, PhiSpec::linear(1.0));
  for (const double r : {1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    EXPECT_NEAR(radial_stationary_cdf(t, r), boost::math::gamma_p(4.0, std::pow(r, 0.25)), 1e-10);
  }
}

TEST(RadialCdf, StdTMatchesQuadrature) {
  for (const auto& [d, m] : std::vector<std::pair<int, double>>{{2, 2.0}, {3, 1.0}, {10, 4.5}}) {
    const Target t = Target::std_t(d, m);
    auto density = [d = d, m = m](double s) {
      return std::exp((d - 1) * std::log(s) - 0.5 * (d + m) * std::log1p(s * s / m));
    };
    using boost::math::quadrature::gauss_kronrod;
    const double total = gauss_kronrod<double, 61>::integrate(density, 0.0, kInf, 15, 1e-13);
    for (const double r : {0.1, 1.0, 2.0, 7.0, 50.0}) {
      const double lower = gauss_kronrod<double, 61>::integrate(density, 0.0, r, 15, 1e-13);
      EXPECT_NEAR(radial_stationary_cdf(t, r), lower / total, 1e-9) << d << " " << m << " " << r;
    }
  }
}

TEST(RadialCdf, MonotoneWithLimits) {
  for (const Target& target : sample_targets()) {
    if (std::holds_alternative<RotAsymTarget>(target.family())) continue;
    double previous = radial_stationary_cdf(target, 0.0);
    EXPECT_EQ(previous, 0.0) << target.name();
    for (int i = -30; i <= 60; ++i) {
      const double value = radial_stationary_cdf(target, std::pow(10.0, i / 10.0));
      ASSERT_GE(value, previous - 1e-14) << target.name();
      ASSERT_LE(value, 1.0 + 1e-14);
      previous = value;
    }
    EXPECT_NEAR(previous, 1.0, 1e-6) << target.name();
  }
}

TEST(AngularScale, QuadraticLowerBoundAndValidation) {
  const Eigen::MatrixXd sigma = Eigen::Vector3d(1.0, 4.0, 9.0).asDiagonal();
  const AngularScale chi = AngularScale::quadratic(sigma);
  EXPECT_NEAR(chi.lower_bound(), 0.5 / 9.0, 1e-12);
  RngStream rng(5, 0);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_GE(chi(sample_unit_sphere(3, rng)), chi.lower_bound());
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(AngularScale::quadratic(bad), DomainError);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(AngularScale::quadratic(asym), DomainError);
  EXPECT_THROW(AngularScale::constant(0.0), DomainError);
}

TEST(Target, ValidatesParameters) {
  EXPECT_THROW(Target::dk(0, 1.0, PhiSpec::linear(1.0)), DomainError);
  EXPECT_THROW(Target::dk(2, -1.0, PhiSpec::linear(1.0)), DomainError);
  EXPECT_THROW(Target::rot_inv(2, 1.0, 1.0, PhiSpec::linear(1.0, 0.0, 2.0)), DomainError);
  EXPECT_THROW(Target::std_t(2, 0.0), DomainError);
  EXPECT_THROW(Target::pareto_shell(2, 1.0, 2.0, 0.0), DomainError);
  EXPECT_THROW(Target::rot_asym(2, 1.0, 2.0,
                                AngularScale::quadratic(Eigen::Matrix3d::Identity())),
               DomainError);
}

TEST(DrawStationary, RadialLawMatchesCdf) {
  RngStream rng(6, 0);
  for (const Target& target : sample_targets()) {
    if (std::holds_alternative<RotAsymTarget>(target.family())) continue;
    const int n = 20000;
    std::vector<double> radii(n);
    for (auto& r : radii) r = draw_stationary(target, rng).norm();
    const KsCheck ks = ks_stationarity(
        radii, [&](double r) { return radial_stationary_cdf(target, r); }, 0.01);
    EXPECT_TRUE(ks.pass) << target.name() << " D=" << ks.statistic;
    EXPECT_LT(ks.iat, 1.3) << target.name();
  }
}

TEST(DrawStationary, GaussianCovariance) {
  const Eigen::MatrixXd sigma = Eigen::Vector3d(1.0, 4.0, 9.0).asDiagonal();
  const Target g = Target::rot_asym(3, 3.0, 2.0, AngularScale::quadratic(sigma));
  RngStream rng(7, 0);
  const int n = 200000;
  Eigen::Matrix3d outer = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Point x = draw_stationary(g, rng);
    outer += x * x.transpose();
  }
  outer /= n;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(outer(i, j), sigma(i, j), 0.02 * std::sqrt(sigma(i, i) * sigma(j, j)));
    }
  }
}

}  // namespace
