#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ergotorus/rational.hpp"
#include "ergotorus/rng.hpp"
#include "ergotorus/test_function.hpp"
#include "ergotorus/torus.hpp"

using namespace ergotorus;

namespace {

const LatticeMatrix A{2, {2, 1, 1, 1}};
const LatticeMatrix B{2, {0, 1, -1, 0}};

std::vector<double> apply(const LatticeMatrix& g, std::vector<double> x) {
  std::vector<double> out(x.size());
  g.apply_mod1(x, out);
  return out;
}

}  // namespace

TEST(Rational, ArithmeticAndParse) {
  Rational a(1, 2), b(1, 3);
  EXPECT_EQ(a + b, Rational(5, 6));
  EXPECT_EQ(a * b, Rational(1, 6));
  EXPECT_EQ(Rational(2, -4), Rational(-1, 2));
  EXPECT_EQ(Rational(-7, 3).frac(), Rational(2, 3));
  EXPECT_EQ(Rational::parse("3/9"), Rational(1, 3));
  EXPECT_EQ(Rational::parse("-5"), Rational(-5));
  EXPECT_THROW(Rational::parse("0.25"), Error);
  EXPECT_THROW(Rational(1, 0), Error);
}

TEST(Philox, KnownAnswers) {
  auto z = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(z, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  auto f = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                      {0xffffffff, 0xffffffff});
  EXPECT_EQ(f, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  auto p = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0});
  EXPECT_EQ(p, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterStream, AddressableAndSeparated) {
  CounterStream s(42, RngPurpose::kWalk, 3);
  CounterStream t(42, RngPurpose::kWalk, 3);
  CounterStream u(42, RngPurpose::kSample, 3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(s.bits(i), t.bits(i));
    double v = s.uniform(i);
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_NE(s.bits(0), u.bits(0));
  EXPECT_EQ(s.pair(5)[1], s.bits(11));
}

TEST(LatticeMatrix, StepExamples) {
  auto y = apply(A, {0.2, 0.3});
  EXPECT_NEAR(y[0], 0.7, 1e-15);
  EXPECT_NEAR(y[1], 0.5, 1e-15);
  auto z = apply(B, {0.25, 0.5});
  EXPECT_NEAR(z[0], 0.5, 1e-15);
  EXPECT_NEAR(z[1], 0.75, 1e-15);
  auto w = apply(LatticeMatrix::identity(2), {0.123, 0.456});
  EXPECT_EQ(w[0], 0.123);
  EXPECT_EQ(w[1], 0.456);
  TorusPoint q = step(A, TorusPoint::from_rationals({Rational(1, 4), Rational(1, 4)}));
  ASSERT_TRUE(q.is_exact());
  EXPECT_EQ(q.exact()[0], Rational(3, 4));
  EXPECT_EQ(q.exact()[1], Rational(1, 2));
}

TEST(LatticeMatrix, Determinant) {
  EXPECT_EQ(determinant(2, A.entries()), 1);
  EXPECT_EQ(determinant(2, B.entries()), 1);
  EXPECT_THROW(LatticeMatrix(2, {2, 0, 0, 1}), Error);
  EXPECT_EQ(A * A.inverse(), LatticeMatrix::identity(2));
  EXPECT_EQ(LatticeMatrix::parse("1 1 -2 -1"), B * A);
  EXPECT_EQ(LatticeMatrix::parse(A.literal()), A);
}

TEST(Torus, Distances) {
  std::vector<double> x{0.9, 0.1}, o{0.0, 0.0}, h{0.5, 0.5};
  EXPECT_NEAR(torus_distance(x, o, Metric::kSup), 0.1, 1e-15);
  EXPECT_EQ(torus_distance(x, x, Metric::kSup), 0.0);
  EXPECT_NEAR(torus_distance(h, o, Metric::kEuclidean), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(torus_diameter(2, Metric::kEuclidean), std::sqrt(0.5), 1e-15);
}

TEST(Torus, FrequencyAction) {
  EXPECT_EQ(frequency_action(A, Frequency{1, 0}), (Frequency{2, 1}));
  EXPECT_EQ(frequency_action(B, Frequency{1, 0}), (Frequency{0, 1}));
  EXPECT_EQ(frequency_action(A, Frequency{0, 0}), (Frequency{0, 0}));
}

TEST(GeneratorMeasure, Validation) {
  EXPECT_THROW(GeneratorMeasure({{A, Rational(1, 2)}, {B, Rational(1, 3)}}), Error);
  GeneratorMeasure rho({{A, Rational(1, 2)}, {B * A, Rational(1, 2)}});
  EXPECT_EQ(rho.symmetrized()[0].matrix, A.inverse());
  EXPECT_NE(rho.content_hash(), rho.symmetrized().content_hash());
}

TEST(HolderEstimate, Examples) {
  auto c = holder_norm_estimate(TestFunction::constant(2, -3.0), 64);
  EXPECT_DOUBLE_EQ(c.sup_estimate, 3.0);
  EXPECT_DOUBLE_EQ(c.seminorm_estimate, 0.0);
  auto z = holder_norm_estimate(TestFunction::constant(2, 0.0), 64);
  EXPECT_EQ(z.total(), 0.0);
  auto h = holder_norm_estimate(TestFunction::cosine({1, 0}), 256);
  EXPECT_NEAR(h.sup_estimate, 1.0, 1e-12);
  EXPECT_LE(h.seminorm_estimate, 2.0 * std::numbers::pi);
  EXPECT_GT(h.seminorm_estimate, 6.2);
  EXPECT_NEAR(h.total(), 7.28, 0.01);
}
