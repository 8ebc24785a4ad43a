#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergotorus/error.hpp"
#include "ergotorus/rational.hpp"

namespace ergotorus {

/// Norm used on R^d before passing to the quotient T^d = R^d / Z^d.
enum class Metric { kSup, kEuclidean };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

/// Reduce a real number modulo 1 into [0, 1).
inline double wrap_unit(double t) noexcept {
  double r = t - static_cast<double>(static_cast<std::int64_t>(t));
  if (r < 0.0) r += 1.0;
  return r >= 1.0 ? 0.0 : r;
}

/// A point of T^d stored in [0,1)^d, optionally with exact rational
/// coordinates that agree with the doubles.
class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::vector<double> coords);
  static TorusPoint from_rationals(std::vector<Rational> coords);
  static TorusPoint origin(std::size_t d);

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const { return coords_[i]; }

  bool is_exact() const noexcept { return !exact_.empty(); }
  std::span<const Rational> exact() const noexcept { return exact_; }
  /// Least common denominator of the exact coordinates.
  std::int64_t denominator() const;

  /// Exact comparison when both sides carry rationals, otherwise compares the
  /// doubles bitwise.
  friend bool operator==(const TorusPoint& a, const TorusPoint& b);

 private:
  std::vector<double> coords_;
  std::vector<Rational> exact_;
};

/// Element of SL_d(Z), stored row-major. Construction verifies det = 1 with
/// exact integer arithmetic.
class LatticeMatrix {
 public:
  LatticeMatrix(std::size_t d, std::vector<std::int64_t> entries);
  static LatticeMatrix identity(std::size_t d);
  /// Row-major whitespace-separated literal such as "2 1 1 1".
  static LatticeMatrix parse(std::string_view literal);

  std::size_t dim() const noexcept { return d_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const {
    return a_[i * d_ + j];
  }
  std::span<const std::int64_t> entries() const noexcept { return a_; }

  LatticeMatrix operator*(const LatticeMatrix& o) const;
  LatticeMatrix inverse() const;
  LatticeMatrix transpose() const;
  bool is_identity() const noexcept;
  /// Operator norm induced by the metric's norm on R^d: largest singular
  /// value for Euclidean, largest absolute row sum for sup.
  double operator_norm(Metric m = Metric::kEuclidean) const;
  std::string literal() const;

  /// out = this * x mod 1. `out` must not alias `x`.
  void apply_mod1(std::span<const double> x, std::span<double> out) const noexcept;
  /// Integer action on a column vector (no reduction).
  std::vector<std::int64_t> apply(std::span<const std::int64_t> v) const;

  friend auto operator<=>(const LatticeMatrix&, const LatticeMatrix&) = default;
  friend bool operator==(const LatticeMatrix&, const LatticeMatrix&) = default;

 private:
  struct Unchecked {};
  LatticeMatrix(Unchecked, std::size_t d, std::vector<std::int64_t> entries)
      : d_(d), a_(std::move(entries)) {}

  std::size_t d_ = 0;
  std::vector<std::int64_t> a_;
};

/// Exact determinant via fraction-free (Bareiss) elimination.
std::int64_t determinant(std::size_t d, std::span<const std::int64_t> entries);

struct Atom {
  LatticeMatrix matrix;
  Rational weight;
};

/// Finitely supported probability measure on SL_d(Z).
class GeneratorMeasure {
 public:
  explicit GeneratorMeasure(std::vector<Atom> atoms);

  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t dim() const noexcept { return d_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// The measure of g^{-1} for g ~ this measure.
  GeneratorMeasure symmetrized() const;
  /// FNV-1a digest of dimension, matrices and weights.
  std::uint64_t content_hash() const noexcept { return hash_; }
  /// Atom index for a uniform 64-bit draw, exact against the rational CDF.
  std::size_t pick(std::uint64_t r) const noexcept;
  double max_operator_norm(Metric m = Metric::kEuclidean) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> weights_;
  std::vector<std::uint64_t> thresholds_;
  std::size_t d_ = 0;
  std::uint64_t hash_ = 0;
};

/// Element of Z^d indexing characters e_a(x) = exp(2 pi i <a, x>).
struct Frequency {
  std::vector<std::int64_t> v;

  Frequency() = default;
  explicit Frequency(std::vector<std::int64_t> c) : v(std::move(c)) {}
  Frequency(std::initializer_list<std::int64_t> c) : v(c) {}

  std::size_t dim() const noexcept { return v.size(); }
  bool is_zero() const noexcept;
  Frequency operator-() const;
  std::int64_t sup_norm() const noexcept;
  double norm(Metric m) const noexcept;
  /// Dual norm of the given metric's norm (l1 for sup, l2 for Euclidean).
  double dual_norm(Metric m) const noexcept;

  friend auto operator<=>(const Frequency&, const Frequency&) = default;
  friend bool operator==(const Frequency&, const Frequency&) = default;
};

struct FrequencyHash {
  std::size_t operator()(const Frequency& a) const noexcept;
};

TorusPoint step(const LatticeMatrix& g, const TorusPoint& x);

double torus_distance(std::span<const double> x, std::span<const double> y,
                      Metric m) noexcept;
double torus_distance(const TorusPoint& x, const TorusPoint& y, Metric m);
/// d(x, 0).
double distance_to_origin(std::span<const double> x, Metric m) noexcept;
/// Diameter of T^d in the given metric.
double torus_diameter(std::size_t d, Metric m) noexcept;

/// g^T a, so that e_a(g x) = e_{g^T a}(x).
Frequency frequency_action(const LatticeMatrix& g, const Frequency& a);

/// <a, x> mod 1 in [0,1), exact when x carries rationals.
double phase(const Frequency& a, const TorusPoint& x);
double phase(const Frequency& a, std::span<const double> x) noexcept;

}  // namespace ergotorus
