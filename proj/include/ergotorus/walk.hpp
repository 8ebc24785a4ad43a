#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "ergotorus/rng.hpp"
#include "ergotorus/test_function.hpp"
#include "ergotorus/torus.hpp"

namespace ergotorus {

struct Trajectory {
  TorusPoint start;
  std::vector<TorusPoint> points;  // X_0..X_n
  std::vector<std::int32_t> word;  // word[k] produced points[k+1]
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t rho_id = 0;
};

/// Streaming walk on double coordinates. Step k uses draw k of the
/// (seed, kWalk, trial) stream.
class Walker {
 public:
  Walker(const GeneratorMeasure& rho, std::span<const double> x,
         std::uint64_t seed, std::uint64_t trial);

  std::span<const double> position() const noexcept { return pos_; }
  std::uint64_t steps() const noexcept { return step_; }
  /// Moves one step and returns the atom index used.
  std::size_t advance() noexcept;

 private:
  const GeneratorMeasure* rho_;
  std::vector<double> mats_;  // atom-major, row-major d×d doubles
  std::vector<double> pos_;
  std::vector<double> tmp_;
  CounterStream stream_;
  std::uint64_t step_ = 0;
  std::array<std::uint64_t, 2> cache_{};
  std::size_t d_;
};

/// Keeps exact coordinates when x has them.
Trajectory simulate_trajectory(const GeneratorMeasure& rho, const TorusPoint& x,
                               std::size_t n, std::uint64_t seed,
                               std::uint64_t trial = 0);

/// ρ^{*n} ∗ δ_x as a list of weighted points.
class AtomicDistribution {
 public:
  AtomicDistribution(std::size_t d, std::vector<double> coords,
                     std::vector<Rational> exact, std::vector<Rational> weights,
                     int generation);
  static AtomicDistribution dirac(const TorusPoint& x);

  std::size_t dim() const noexcept { return d_; }
  std::size_t size() const noexcept { return weights_.size(); }
  int generation() const noexcept { return generation_; }
  bool is_exact() const noexcept { return !exact_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * d_, d_};
  }
  std::span<const Rational> exact_point(std::size_t i) const {
    return {exact_.data() + i * d_, d_};
  }
  TorusPoint atom(std::size_t i) const;
  const Rational& weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> coords() const noexcept { return coords_; }
  std::span<const double> weights_double() const noexcept { return wd_; }

  double expect(const TestFunction& f) const;

 private:
  std::size_t d_;
  std::vector<double> coords_;
  std::vector<Rational> exact_;
  std::vector<Rational> weights_;
  std::vector<double> wd_;
  int generation_;
};

/// Throws kBudgetExceeded when support^n > max_atoms.
AtomicDistribution word_distribution_exact(const GeneratorMeasure& rho,
                                           const TorusPoint& x, int n,
                                           std::uint64_t max_atoms);

/// support^n, saturating at UINT64_MAX.
std::uint64_t word_count(std::size_t support, int n) noexcept;

/// Depth-first traversal of the word tree below x. visit(level, point,
/// weight) is called for level 0 (x itself) through `depth`; `weight` is the
/// product of atom weights along the word.
class WordTree {
 public:
  explicit WordTree(const GeneratorMeasure& rho);

  template <class Visit>
  void walk(std::span<const double> x, int depth, Visit&& visit) const {
    std::vector<double> buf((depth + 1) * d_);
    std::copy(x.begin(), x.end(), buf.begin());
    recurse(buf, 0, depth, 1.0, visit);
  }

 private:
  template <class Visit>
  void recurse(std::vector<double>& buf, int level, int depth, double w,
               Visit& visit) const {
    std::span<const double> here(buf.data() + level * d_, d_);
    visit(level, here, w);
    if (level == depth) return;
    double* next = buf.data() + (level + 1) * d_;
    for (std::size_t a = 0; a < weights_.size(); ++a) {
      const double* m = mats_.data() + a * d_ * d_;
      for (std::size_t i = 0; i < d_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d_; ++j) s += m[i * d_ + j] * here[j];
        s -= std::floor(s);
        next[i] = s >= 1.0 ? 0.0 : s;
      }
      recurse(buf, level + 1, depth, w * weights_[a], visit);
    }
  }

  std::size_t d_;
  std::vector<double> mats_;
  std::vector<double> weights_;
};

/// P^k f(x) for k = 0..kmax by exhaustive enumeration.
std::vector<double> transfer_powers(const GeneratorMeasure& rho,
                                    const TestFunction& f,
                                    std::span<const double> x, int kmax);
/// P^k f(x); k = 1 is the one-step operator.
double transfer_apply(const GeneratorMeasure& rho, const TestFunction& f,
                      const TorusPoint& x, int k = 1);

struct FrequencyDistribution {
  std::map<Frequency, Rational> atoms;
  int generation = 0;
};

/// Exact P^l e_a = Σ_b w_b e_b.
FrequencyDistribution character_propagate(const GeneratorMeasure& rho,
                                          const Frequency& a, int l,
                                          std::uint64_t max_atoms);

/// Coefficients of P^l f for a trig polynomial f (double coefficients).
CoeffMap propagate_coefficients(const GeneratorMeasure& rho,
                                const CoeffMap& coeffs, int l,
                                std::uint64_t max_atoms);

struct RationalOrbit {
  std::vector<TorusPoint> states;
  std::vector<std::vector<Rational>> transition;  // row-stochastic
  /// Mean of f under the uniform measure on the orbit.
  double mean(const TestFunction& f) const;
};

/// Orbit of an exact rational point under the support, with its induced
/// finite Markov chain.
RationalOrbit rational_orbit(const GeneratorMeasure& rho, const TorusPoint& x,
                             std::size_t max_states);

/// Doubles are written with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& t);
void write_distribution_csv(std::ostream& os, const AtomicDistribution& dist);

}  // namespace ergotorus
