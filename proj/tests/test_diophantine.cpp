#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "ergotorus/diophantine.hpp"
#include "ergotorus/rng.hpp"

using namespace ergotorus;

namespace {

const LatticeMatrix A{2, {2, 1, 1, 1}};
const LatticeMatrix B{2, {0, 1, -1, 0}};

TorusPoint diophantine_x() {
  return TorusPoint(std::vector<double>{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0});
}

std::set<std::vector<Rational>> as_set(const std::vector<TorusPoint>& pts) {
  std::set<std::vector<Rational>> s;
  for (const auto& p : pts) s.insert(std::vector<Rational>(p.exact().begin(), p.exact().end()));
  return s;
}

}  // namespace

TEST(BestRationalApprox, Examples) {
  auto half = best_rational_approx(TorusPoint(std::vector<double>{0.5, 0.5}), 2, Metric::kSup);
  EXPECT_EQ(half[1].q, 2);
  EXPECT_EQ(half[1].dist, 0.0);
  EXPECT_EQ(half[1].p_over_q.exact()[0], Rational(1, 2));

  auto third = best_rational_approx(TorusPoint(std::vector<double>{1.0 / 3.0 + 1e-9, 0.0}), 3,
                                    Metric::kSup);
  EXPECT_EQ(third[2].p_over_q.exact()[0], Rational(1, 3));
  EXPECT_NEAR(third[2].dist, 1e-9, 1e-15);

  auto table = best_rational_approx(diophantine_x(), 100, Metric::kSup);
  ASSERT_EQ(table.size(), 100u);
  double best = 1e300;
  for (const auto& r : table) best = std::min(best, std::pow(double(r.q_scan), 1.5) * r.dist);
  EXPECT_LE(best, 1.0);
}

TEST(HeightPhi, Examples) {
  PhiSpec quartic = PhiSpec::power(4.0);
  EXPECT_TRUE(std::isinf(
      h_phi(TorusPoint::from_rationals({Rational(1, 3), Rational(2, 5)}), quartic, 20)));
  TorusPoint x = diophantine_x();
  double prev = 0.0;
  for (std::int64_t Q = 1; Q <= 40; ++Q) {
    double h = h_phi(x, quartic, Q);
    EXPECT_GE(h, prev);
    prev = h;
  }
  double brute = 0.0;
  for (const auto& r : best_rational_approx(x, 50, Metric::kSup))
    brute = std::max(brute, 1.0 / (std::pow(double(r.q_scan), 4.0) * r.dist));
  EXPECT_NEAR(h_phi(x, quartic, 50), brute, 1e-12 * brute);
}

TEST(PrimitivePoints, Examples) {
  auto x1 = primitive_points(1, 2);
  ASSERT_EQ(x1.size(), 1u);
  EXPECT_TRUE(x1[0] == TorusPoint::origin(2));
  auto x2 = as_set(primitive_points(2, 2));
  std::set<std::vector<Rational>> want{{Rational(1, 2), Rational(0)},
                                       {Rational(0), Rational(1, 2)},
                                       {Rational(1, 2), Rational(1, 2)}};
  EXPECT_EQ(x2, want);
}

TEST(PrimitivePoints, Invariant) {
  LatticeMatrix gs[] = {A, B, A * B * A, (B * A).inverse(), LatticeMatrix{2, {3, 2, 4, 3}}};
  for (std::int64_t Q : {3, 6, 10}) {
    auto pts = primitive_points(Q, 2);
    auto base = as_set(pts);
    for (const auto& g : gs) {
      std::vector<TorusPoint> moved;
      for (const auto& p : pts) moved.push_back(step(g, p));
      EXPECT_EQ(as_set(moved), base);
    }
  }
}

TEST(UDelta, Examples) {
  EXPECT_TRUE(std::isinf(u_delta(TorusPoint::origin(2), 0.3, Metric::kSup)));
  EXPECT_DOUBLE_EQ(u_delta(TorusPoint(std::vector<double>{0.5, 0.5}), 1.0, Metric::kSup), 2.0);
  EXPECT_NEAR(u_delta(TorusPoint(std::vector<double>{0.1, 0.0}), 2.0, Metric::kSup), 100.0, 1e-9);
}

TEST(UPhi, Examples) {
  DriftSpec spec;
  spec.Qmax = 12;
  UPhi u(spec, 2);
  EXPECT_TRUE(std::isinf(u(TorusPoint::from_rationals({Rational(2, 7), Rational(3, 7)}))));
  auto sample = sample_uniform(2, 50, 5);
  for (const auto& x : sample) EXPECT_GE(u(x), 1.0);
}

TEST(UPhi, LevelSumEquivariance) {
  DriftSpec spec;
  spec.Qmax = 8;
  UPhi u(spec, 2);
  for (const auto& x : sample_uniform(2, 20, 9)) {
    std::vector<double> gx(2);
    A.apply_mod1(x.coords(), gx);
    for (std::int64_t Q = 1; Q <= 8; ++Q) {
      double lhs = u.level_sum(gx, Q);
      double rhs = 0.0;
      for (const auto& p : primitive_points(Q, 2)) {
        std::vector<double> diff{x[0] - p[0], x[1] - p[1]}, gd(2);
        A.apply_mod1(diff, gd);
        rhs += u_delta(gd, spec.delta, spec.metric);
      }
      EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(rhs));
    }
  }
}

TEST(UPhi, DominatesHeight) {
  // h_φ(x)^δ ≤ C·u_φ(x) on random points with a constant fitted here.
  DriftSpec spec;
  spec.Qmax = 20;
  UPhi u(spec, 2);
  auto sample = sample_uniform(2, 100, 17);
  double c = 0.0;
  for (const auto& x : sample)
    c = std::max(c, std::pow(h_phi(x, spec.phi, spec.Qmax), spec.delta) / u(x));
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_LT(c, 10.0);
}

TEST(DriftFit, ConstantFunction) {
  GeneratorMeasure rho({{A, Rational(1, 2)}, {B * A, Rational(1, 2)}});
  auto fit = drift_fit(rho, [](std::span<const double>) { return 1.0; }, sample_uniform(2, 40, 1), 4);
  EXPECT_EQ(fit.a_hat, 0.0);
  EXPECT_DOUBLE_EQ(fit.b_hat, 1.0);
  EXPECT_EQ(fit.violations, 0u);
}

TEST(DriftFit, UDeltaContracts) {
  GeneratorMeasure rho({{A, Rational(1, 2)}, {B * A, Rational(1, 2)}});
  auto sample = sample_near_origin(2, 200, 1e-4, 0.5, Metric::kSup, 3);
  auto fit = drift_fit(
      rho, [](std::span<const double> y) { return u_delta(y, 0.3, Metric::kSup); }, sample, 8);
  EXPECT_LT(fit.a_hat, 1.0);
  EXPECT_GT(fit.near_size, 0u);
}

TEST(Lyapunov, Examples) {
  auto rot = lyapunov_estimate(GeneratorMeasure({{B, Rational(1)}}), 200, 8, 1);
  EXPECT_NEAR(rot.lambda1, 0.0, 1e-12);
  auto cat = lyapunov_estimate(GeneratorMeasure({{A, Rational(1)}}), 2000, 4, 1);
  EXPECT_NEAR(cat.lambda1, std::log((3.0 + std::sqrt(5.0)) / 2.0), 1e-3);
}

TEST(DiophantineCheck, Examples) {
  auto rat = diophantine_check(TorusPoint::from_rationals({Rational(1, 4), Rational(3, 4)}), 1.0,
                               0.5, 100, 2);
  EXPECT_FALSE(rat.pass);
  // Solutions of d ≤ exp(-q^0.5) stop at q = 41 for this point.
  auto good = diophantine_check(diophantine_x(), 1.0, 0.5, 10000, 64);
  EXPECT_TRUE(good.pass);
  EXPECT_FALSE(good.solutions.empty());
  EXPECT_TRUE(diophantine_check(diophantine_x(), 2.0, 0.5, 10000, 2).pass);
  // exp(-q^0.1) is still about 0.34 at q = 2, so every point has solutions.
  EXPECT_FALSE(diophantine_check(diophantine_x(), 1.0, 0.1, 100, 2).pass);
  auto loose = diophantine_check(diophantine_x(), 0.5, 0.5, 500, 2);
  auto strict = diophantine_check(diophantine_x(), 2.0, 0.5, 500, 2);
  EXPECT_LE(strict.solutions.size(), loose.solutions.size());
}

TEST(DiophantineCsv, Header) {
  std::ostringstream os;
  write_diophantine_csv(os, best_rational_approx(diophantine_x(), 5, Metric::kSup),
                        PhiSpec::power(2.0));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "q,p_1,p_2,dist,phi_q,height_term");
}
