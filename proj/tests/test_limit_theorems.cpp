#include <gtest/gtest.h>

#include <cmath>

#include "ergotorus/degeneracy.hpp"
#include "ergotorus/limit_theorems.hpp"

using namespace ergotorus;

namespace {

const LatticeMatrix A{2, {2, 1, 1, 1}};
const LatticeMatrix C{2, {1, 1, 1, 2}};

GeneratorMeasure ac_measure() { return GeneratorMeasure({{A, Rational(1, 2)}, {C, Rational(1, 2)}}); }

TorusPoint diophantine_x() {
  return TorusPoint(std::vector<double>{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0});
}

}  // namespace

TEST(Martingale, DegenerateIncrementsVanish) {
  DegenerateExample ex = degenerate_example();
  Trajectory t = simulate_trajectory(ex.rho, diophantine_x(), 2000, 5);
  MartingaleDecomposition m = martingale_decompose(ex.rho, ex.g, t);
  ASSERT_EQ(m.increments.size(), 2000u);
  for (double v : m.increments) EXPECT_LE(std::abs(v), 1e-12);

  MartingaleDecomposition c =
      martingale_decompose(ac_measure(), [](std::span<const double>) { return 1.0; }, t);
  for (double v : c.increments) EXPECT_EQ(v, 0.0);
}

TEST(Martingale, MeanZero) {
  GeneratorMeasure rho = ac_measure();
  Evaluator g = [](std::span<const double> y) { return std::cos(2 * M_PI * y[0]); };
  const std::size_t trials = 2000, n = 20;
  double s = 0.0, s2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    auto m = martingale_decompose(rho, g, simulate_trajectory(rho, diophantine_x(), n, 21, t));
    double sum = 0.0;
    for (double v : m.increments) sum += v;
    s += sum;
    s2 += sum * sum;
  }
  double mean = s / trials, se = std::sqrt((s2 / trials - mean * mean) / trials);
  EXPECT_LE(std::abs(mean), 4.0 * se);
}

TEST(Lln, Examples) {
  GeneratorMeasure rho = ac_measure();
  LlnResult c = lln_check(rho, TestFunction::constant(2, 2.0), diophantine_x(), 100, 2, 1);
  EXPECT_EQ(c.gap, 0.0);
  TestFunction f = TestFunction::cosine({1, 1});
  LlnResult z = lln_check(rho, f, TorusPoint::origin(2), 100, 2, 1);
  EXPECT_EQ(z.birkhoff_mean, 1.0);
  EXPECT_EQ(z.target, 1.0);
  EXPECT_EQ(z.target_method, "rational_orbit");
  LlnResult d = lln_check(rho, TestFunction::cosine({1, 0}), diophantine_x(), 20000, 4, 1);
  EXPECT_LE(std::abs(d.gap), 0.02);
}

TEST(Ks, Basics) {
  EXPECT_EQ(ks_normal(std::vector<double>(50, 0.0), 0.0), 0.0);
  EXPECT_DOUBLE_EQ(ks_normal({0.0, 0.0, 1.0, 1.0}, 0.0), 0.5);
  // Standard normal quantiles at (i - 1/2)/N sit at distance 1/(2N).
  EXPECT_NEAR(ks_normal({-1.1503493803760079, -0.3186393639643752, 0.3186393639643752,
                         1.1503493803760079}, 1.0), 0.125, 1e-12);
  std::vector<double> wide;
  for (int i = 1; i < 1000; ++i) wide.push_back((i - 500) / 100.0);
  EXPECT_GT(ks_normal(wide, 1.0), 0.1);
}

TEST(Clt, ZeroFunction) {
  CltReport r = clt_experiment(ac_measure(), TestFunction::constant(2, 0.0), diophantine_x(), 50, 100, 0.0, 1);
  for (double v : r.normalized_samples) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(clt_experiment(ac_measure(), TestFunction::cosine({1, 0}), diophantine_x(), 50, 10, 0.5, 1), Error);
}

TEST(Clt, DegenerateExampleConcentrates) {
  DegenerateExample ex = degenerate_example();
  TestFunction f = TestFunction::callback(2, ex.f, 1.0, 4.0);
  CltReport r = clt_experiment(ex.rho, f, diophantine_x(), 3200, 100, 0.0, 2);
  double bound = 2.0 * std::sqrt(0.5) / std::sqrt(3200.0);
  for (double v : r.normalized_samples) EXPECT_LE(std::abs(v), bound + 1e-9);
  EXPECT_EQ(r.mass_within_005, 1.0);
}

TEST(Lil, DegenerateAndSymmetry) {
  EXPECT_THROW(lil_envelope(ac_measure(), TestFunction::cosine({1, 0}), diophantine_x(), 1000, 2, 0.0, 1), Error);
  LilReport p = lil_envelope(ac_measure(), TestFunction::cosine({1, 0}), diophantine_x(), 5000, 4, 0.5, 3);
  LilReport m = lil_envelope(ac_measure(), TestFunction::cosine({1, 0}, -1.0), diophantine_x(), 5000, 4, 0.5, 3);
  EXPECT_NEAR(p.envelope_max.back(), -m.envelope_min.back(), 1e-12);
  auto cps = lil_checkpoints(1000000);
  EXPECT_EQ(cps.front(), 100u);
  EXPECT_LE(cps.back(), 1000000u);
}

TEST(Lindeberg, BoundedVanishesAndMonotone) {
  GeneratorMeasure rho = ac_measure();
  Evaluator g = [](std::span<const double> y) { return std::cos(2 * M_PI * y[0]); };
  LindebergReport r = lindeberg_check(rho, g, diophantine_x(), {100, 400}, 0.5, 50, 1, 1.0);
  ASSERT_TRUE(r.cutoff_n.has_value());
  for (const auto& pt : r.points)
    if (pt.n >= *r.cutoff_n) EXPECT_EQ(pt.estimate, 0.0);
  double prev = 1e300;
  for (double eps : {0.01, 0.05, 0.1, 0.2}) {
    double v = lindeberg_check(rho, g, diophantine_x(), {64}, eps, 50, 1).points[0].estimate;
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(FourthMoment, ZeroAndControl) {
  auto z = fourth_moment_scan(ac_measure(), TestFunction::constant(2, 0.0), diophantine_x(), {10, 100}, 50, 1);
  for (const auto& row : z) {
    EXPECT_EQ(row.m2, 0.0);
    EXPECT_EQ(row.m4, 0.0);
  }
  GeneratorMeasure id({{LatticeMatrix::identity(2), Rational(1)}});
  auto c = fourth_moment_scan(id, TestFunction::cosine({1, 0}), diophantine_x(), {2000}, 2000, 1, 0.0, true);
  EXPECT_NEAR(c[0].kurtosis_ratio, 1.0, 0.1);
}
