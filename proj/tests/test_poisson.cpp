#include <gtest/gtest.h>

#include <cmath>

#include "ergotorus/degeneracy.hpp"
#include "ergotorus/diophantine.hpp"
#include "ergotorus/poisson.hpp"
#include "ergotorus/spectral.hpp"

using namespace ergotorus;

namespace {

const LatticeMatrix A{2, {2, 1, 1, 1}};
const LatticeMatrix B{2, {0, 1, -1, 0}};
const LatticeMatrix C{2, {1, 1, 1, 2}};

GeneratorMeasure twisted_measure() {
  return GeneratorMeasure({{A, Rational(1, 2)}, {B * A, Rational(1, 2)}});
}
GeneratorMeasure ac_measure() { return GeneratorMeasure({{A, Rational(1, 2)}, {C, Rational(1, 2)}}); }

TorusPoint diophantine_x() {
  return TorusPoint(std::vector<double>{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0});
}

}  // namespace

TEST(MeanLebesgue, Examples) {
  EXPECT_EQ(mean_lebesgue(TestFunction::cosine({1, 0})).value, 0.0);
  EXPECT_TRUE(mean_lebesgue(TestFunction::cosine({1, 0})).exact);
  EXPECT_DOUBLE_EQ(mean_lebesgue(TestFunction::constant(2, 4.0)).value, 4.0);
  // Sup distance to 0 on T^2: ∫ max(|x|,|y|) over [-1/2,1/2]^2 = 1/3.
  auto m = mean_lebesgue(TestFunction::dist_to_point(TorusPoint::origin(2), Metric::kSup),
                         std::size_t{1} << 18);
  EXPECT_NEAR(m.value, 1.0 / 3.0, 1e-3);
  EXPECT_LE(m.error, 1e-3);
}

TEST(Correlation, Examples) {
  GeneratorMeasure rho = twisted_measure();
  TestFunction f = TestFunction::cosine({1, 0});
  EXPECT_DOUBLE_EQ(correlation_exact(rho, f, 0), 0.5);
  EXPECT_EQ(correlation_exact(rho, f, 1), 0.0);
  EXPECT_DOUBLE_EQ(correlation_exact(rho, TestFunction::constant(2, 3.0), 4), 9.0);
  EXPECT_EQ(correlation_exact(rho, TestFunction::constant(2, 0.0), 2), 0.0);
}

TEST(Correlation, AdjointAgrees) {
  RationalCoeffs f = rational_cosine(Frequency{1, 0});
  RationalCoeffs g = rational_cosine(Frequency{1, 1}, Rational(1, 3));
  for (const auto& [a, c] : g) f[a] += c;
  for (const GeneratorMeasure& rho : {twisted_measure(), ac_measure()})
    for (int l = 0; l <= 8; ++l)
      EXPECT_EQ(correlation_rational(rho, f, l), correlation_rational_adjoint(rho, f, l));
}

TEST(VarianceSeries, RegressionConstant) {
  std::vector<Rational> terms;
  Rational v = variance_series_rational(twisted_measure(), rational_cosine(Frequency{1, 0}), 12, &terms);
  EXPECT_EQ(v, Rational(3003, 2048));
  EXPECT_EQ(terms.size(), 13u);
  VarianceReport r = variance_series(twisted_measure(), TestFunction::cosine({1, 0}), 12);
  EXPECT_DOUBLE_EQ(r.sigma2, 3003.0 / 2048.0);
  // The correlations of this measure decay slowly, so the tail is not small.
  EXPECT_GT(r.uncertainty, 1.0);
}

TEST(VarianceSeries, EvenInF) {
  GeneratorMeasure rho = ac_measure();
  TestFunction f = TestFunction::cosine({1, 2}, 0.7);
  EXPECT_DOUBLE_EQ(variance_series(rho, f, 8).sigma2, variance_series(rho, f.scaled(-1.0), 8).sigma2);
  EXPECT_DOUBLE_EQ(variance_series(rho, TestFunction::cosine({1, 0}), 12).sigma2, 0.5);
}

TEST(VarianceAlongWalk, Degenerate) {
  DegenerateExample ex = degenerate_example();
  VarianceReport r = variance_along_walk(ex.rho, ex.g, diophantine_x(), 5000, 3);
  EXPECT_LE(std::abs(r.sigma2), 1e-12);
  VarianceReport c = variance_along_walk(ac_measure(), [](std::span<const double>) { return 2.0; },
                                         diophantine_x(), 1000, 3);
  EXPECT_EQ(c.sigma2, 0.0);
}

TEST(VarianceAlongWalk, TruncatedCorrectionIsExact) {
  GeneratorMeasure rho = ac_measure();
  TruncatedPoisson tp = truncated_poisson(rho, TestFunction::cosine({1, 0}), 6);
  EXPECT_NEAR(tp.sigma2_truncated + tp.correction, 0.5, 1e-12);
  EXPECT_EQ(tp.tail_bound, 0.0);
}

TEST(PoissonSolve, ConstantAndTelescoping) {
  GeneratorMeasure rho = ac_measure();
  PoissonValue c = poisson_solve_at(rho, TestFunction::constant(2, 1.5), diophantine_x(), 6);
  EXPECT_EQ(c.g, 0.0);
  EXPECT_EQ(c.residual, 0.0);

  // g(x) − Pg(x) = f(x) − P^N f(x) for the truncated series.
  TestFunction f = TestFunction::cosine({1, 0});
  TorusPoint x = diophantine_x();
  PoissonValue gx = poisson_solve_at(rho, f, x, 8);
  double pg = 0.0;
  for (const Atom& at : rho.atoms())
    pg += at.weight.to_double() * poisson_solve_at(rho, f, step(at.matrix, x), 8).g;
  double pn = transfer_apply(rho, f, x, 8);
  EXPECT_NEAR(gx.g - pg, f(x) - pn, 1e-9);
  EXPECT_NEAR(gx.residual, std::abs(pn), 1e-12);
}

TEST(PoissonSolve, AutoTruncation) {
  PoissonOptions opt;
  opt.target = 0.05;
  PoissonValue v = poisson_solve_at(ac_measure(), TestFunction::cosine({1, 0}), diophantine_x(), 0, opt);
  EXPECT_GT(v.N, 0);
  EXPECT_LE(std::abs(v.terms.back()), 0.05 * certified_norm(TestFunction::cosine({1, 0}), 1.0));
}

TEST(TransferOnce, DegenerateIdentity) {
  DegenerateExample ex = degenerate_example();
  for (const auto& x : sample_uniform(2, 200, 4)) {
    std::vector<double> ax(2);
    A.apply_mod1(x.coords(), ax);
    EXPECT_NEAR(transfer_once(ex.rho, ex.g, x.coords()), ex.g(ax), 1e-12);
  }
}

TEST(DominationNorm, Examples) {
  Evaluator u = [](std::span<const double> y) { return u_delta(y, 0.3, Metric::kSup); };
  Evaluator root = [&](std::span<const double> y) { return std::cbrt(u(y)); };
  auto sample = sample_uniform(2, 100, 8);
  EXPECT_NEAR(domination_norm(root, u, 3.0, sample), 1.0, 1e-12);
  EXPECT_EQ(domination_norm([](std::span<const double>) { return 0.0; }, u, 3.0, sample), 0.0);
}

TEST(AbelCesaro, Bounds) {
  GeneratorMeasure rho = ac_measure();
  Evaluator u = [](std::span<const double> y) { return u_delta(y, 0.3, Metric::kSup); };
  TorusPoint x(std::vector<double>{0.01, 0.02});
  for (double alpha : {0.0, 0.5, 1.0}) {
    auto s = abel_partial_sums(rho, u, x, 10, alpha);
    for (double v : s) EXPECT_LE(v, u(x.coords()));
  }
  auto c = cesaro_damped(rho, [&](std::span<const double> y) { return std::sqrt(u(y)); }, x, 10);
  EXPECT_LT(c.back(), c.front());
}
