#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergotorus/test_function.hpp"
#include "ergotorus/walk.hpp"

namespace ergotorus {

using Evaluator = std::function<double(std::span<const double>)>;

struct MeanEstimate {
  double value = 0.0;
  double error = 0.0;  // |grid(n) − grid(n/2)| for grid averages, 0 if exact
  bool exact = false;
};

/// ∫f dx. Trig polynomials use the zero coefficient; other functions use a
/// midpoint grid with at most `budget` points.
MeanEstimate mean_lebesgue(const TestFunction& f, std::size_t budget = std::size_t{1} << 22);

/// ∫ f·P^l f dx for a real trig polynomial, by character propagation.
double correlation_exact(const GeneratorMeasure& rho, const TestFunction& f, int l,
                         std::uint64_t max_atoms = std::uint64_t{1} << 24);

/// Real trig polynomial with rational coefficients, c_{-a} = c_a.
using RationalCoeffs = std::map<Frequency, Rational>;

/// Rational coefficients of amp·cos(2π⟨a,x⟩).
RationalCoeffs rational_cosine(const Frequency& a, Rational amp = Rational(1));

/// Exact ∫ f·P^l f dx.
Rational correlation_rational(const GeneratorMeasure& rho, const RationalCoeffs& f, int l,
                              std::uint64_t max_atoms = std::uint64_t{1} << 24);
/// The same value computed through the adjoint operator of the inverted measure.
Rational correlation_rational_adjoint(const GeneratorMeasure& rho, const RationalCoeffs& f,
                                      int l, std::uint64_t max_atoms = std::uint64_t{1} << 24);

struct VarianceReport {
  double sigma2 = 0.0;
  std::string method;               // "series" or "along_walk"
  std::vector<double> terms;        // per-lag or per-step contributions
  int truncation = 0;               // L, or the walk length n
  double uncertainty = 0.0;         // tail bound or standard error; +inf if unknown
  double decay_rate = 0.0;          // observed geometric ratio of |correlation|
  double raw_average = 0.0;         // along_walk: uncorrected running average
  double correction = 0.0;          // along_walk: exact truncation correction added
  std::vector<std::uint64_t> seeds;
};

/// σ² = −∫f² + 2Σ_{l=0}^{L} ∫f·P^l f for centered f.
VarianceReport variance_series(const GeneratorMeasure& rho, const TestFunction& f, int L,
                               std::uint64_t max_atoms = std::uint64_t{1} << 24);
/// Exact rational variant; `tail` receives nothing, terms are returned exactly.
Rational variance_series_rational(const GeneratorMeasure& rho, const RationalCoeffs& f, int L,
                                  std::vector<Rational>* terms = nullptr,
                                  std::uint64_t max_atoms = std::uint64_t{1} << 24);

/// Exact one-step Pg(x) = Σ w_i g(g_i x).
double transfer_once(const GeneratorMeasure& rho, const Evaluator& g, std::span<const double> x);

/// Running average of P(g²)(X_k) − (Pg(X_k))² along one trajectory. The
/// uncertainty combines the batch-means standard error with the spread of the
/// running average over the last quarter.
VarianceReport variance_along_walk(const GeneratorMeasure& rho, const Evaluator& g,
                                   const TorusPoint& x, std::size_t n, std::uint64_t seed);

/// g_N = Σ_{n<N} P^n f for a centered trig polynomial, as a trig polynomial,
/// with the quantities needed to account for truncation.
struct TruncatedPoisson {
  TestFunction g;
  int N = 0;
  /// ∫g² − (Pg)² for the truncated g, exact from coefficients.
  double sigma2_truncated = 0.0;
  /// σ²(f) − sigma2_truncated given the correlations up to lag N; exact.
  double correction = 0.0;
  /// Bound on the correlation tail beyond lag N from the observed decay.
  double tail_bound = 0.0;
};

TruncatedPoisson truncated_poisson(const GeneratorMeasure& rho, const TestFunction& f, int N,
                                   std::uint64_t max_atoms = std::uint64_t{1} << 24);

/// Along-walk estimate of σ²(f) through g_N, with the exact truncation
/// correction and its tail bound folded into the uncertainty.
VarianceReport variance_along_walk(const GeneratorMeasure& rho, const TruncatedPoisson& tp,
                                   const TorusPoint& x, std::size_t n, std::uint64_t seed);

struct PoissonOptions {
  int exact_depth = 16;           // P^n f(x) by enumeration up to this n
  std::size_t mc_trials = 1 << 14;
  std::uint64_t seed = 1;
  double target = 0.01;           // auto N: |P^N f(x)| ≤ target·‖f‖_γ
  int max_N = 64;
};

struct PoissonValue {
  double g = 0.0;
  double residual = 0.0;     // |f(x) − mean − (g(x) − Pg(x))| = |P^N f̃(x)|
  double mean = 0.0;
  int N = 0;
  int exact_upto = 0;        // terms with n ≤ exact_upto are exact
  double mc_stderr = 0.0;    // summed standard error of the Monte Carlo terms
  std::vector<double> terms; // P^n f̃(x), n = 0..N
};

/// g(x) = Σ_{n<N} P^n(f − ∫f)(x). N = 0 selects the smallest N whose term
/// falls below options.target·‖f‖_γ.
PoissonValue poisson_solve_at(const GeneratorMeasure& rho, const TestFunction& f,
                              const TorusPoint& x, int N, const PoissonOptions& options = {});

/// sup over the sample of |f(x)| / u(x)^{1/p}.
double domination_norm(const Evaluator& f, const Evaluator& u, double p,
                       const std::vector<TorusPoint>& sample);

/// Partial sums Σ_{k=0}^{m} P^k(u − Pu)(x)/(k+1)^α for m = 0..n, exact.
std::vector<double> abel_partial_sums(const GeneratorMeasure& rho, const Evaluator& u,
                                      const TorusPoint& x, int n, double alpha);

/// (1/m) Σ_{k<m} ψ(k)·P^k|f|(x) for m = 1..n with ψ(k) = (1+k)^{-1/2}, exact.
std::vector<double> cesaro_damped(const GeneratorMeasure& rho, const Evaluator& f,
                                  const TorusPoint& x, int n);

/// sqrt of the grid average of f² on (j/n)^d.
double l2_grid_norm(const Evaluator& f, std::size_t d, int n);

}  // namespace ergotorus
