#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "ergotorus/diophantine.hpp"
#include "ergotorus/test_function.hpp"
#include "ergotorus/walk.hpp"

namespace ergotorus {

/// Finite weighted point set; exact coordinates are kept when every point
/// has them.
struct WeightedSample {
  std::size_t d = 0;
  std::vector<double> coords;
  std::vector<double> weights;
  std::vector<Rational> exact;
  std::string id;

  static WeightedSample from(const AtomicDistribution& dist, std::string id = "exact");
  /// Equal weights on the given points.
  static WeightedSample empirical(std::size_t d, std::vector<double> coords,
                                  std::string id = "empirical");
  /// Uniform on the grid (k/N)^d, with exact coordinates.
  static WeightedSample uniform_grid(std::size_t d, std::int64_t N);
  static WeightedSample dirac(const TorusPoint& x);

  std::size_t size() const noexcept { return weights.size(); }
  std::span<const double> point(std::size_t i) const { return {coords.data() + i * d, d}; }
};

struct Lebesgue {
  std::size_t d = 0;
};

using Measure = std::variant<WeightedSample, Lebesgue>;

/// Σ w·exp(-2πi⟨a,p⟩), with exact phases when the sample carries rationals.
Complex empirical_fourier(const WeightedSample& dist, const Frequency& a);
Complex empirical_fourier(const AtomicDistribution& dist, const Frequency& a);
Complex fourier_coefficient(const Measure& mu, const Frequency& a);

struct FourierProfile {
  std::map<Frequency, Complex> entries;
  std::string normalizer;
  std::int64_t Amax = 0;
  double peak = 0.0;  // max |ϑ̂(a)| / ‖a‖ over 0 < ‖a‖_∞ ≤ Amax
  Frequency peak_at;
  double max_modulus = 0.0;  // max |ϑ̂(a)| over the same box
  Frequency max_modulus_at;
};

/// Scans the integer box ‖a‖_∞ ≤ Amax; ties go to the smallest frequency in
/// lexicographic order.
FourierProfile fourier_decay_profile(const Measure& mu, std::int64_t Amax,
                                     Metric m = Metric::kSup);

/// Nonzero frequencies with ‖a‖_∞ ≤ Amax in lexicographic order.
std::vector<Frequency> frequency_box(std::size_t d, std::int64_t Amax);

/// ρ^{*n}∗δ_x ̂(a) for n = 0..nmax and every a in `freqs`, by exhaustive
/// enumeration. Result is indexed [n][k].
std::vector<std::vector<Complex>> walk_fourier_exact(const GeneratorMeasure& rho,
                                                     const TorusPoint& x, int nmax,
                                                     const std::vector<Frequency>& freqs);
/// Monte Carlo version over `trials` independent walks, recorded at n = 0..nmax.
std::vector<std::vector<Complex>> walk_fourier_mc(const GeneratorMeasure& rho,
                                                  const TorusPoint& x, int nmax,
                                                  const std::vector<Frequency>& freqs,
                                                  std::size_t trials, std::uint64_t seed);

/// k_m(y) = (sin(2πmy)/sin(πy))^4 / I_m, expanded as Σ_k coeff(k) e(ky).
class JacksonKernel {
 public:
  explicit JacksonKernel(int m);

  int m() const noexcept { return m_; }
  int max_freq() const noexcept { return 4 * m_ - 2; }
  double coeff(std::int64_t k) const noexcept;
  /// Raw integer value of the central coefficient (the normalizer I_m).
  std::int64_t normalizer() const noexcept { return norm_; }
  double operator()(double y) const noexcept;
  /// (sin(2πmy)/sin(πy))^4 / I_m evaluated directly.
  double closed_form(double y) const noexcept;
  /// Π_i coeff(a_i).
  double product_coeff(const Frequency& a) const noexcept;

 private:
  int m_;
  std::vector<double> c_;  // index k + max_freq()
  std::int64_t norm_ = 1;
};

JacksonKernel jackson_kernel(int m);

/// Samples of a function on the grid (j/n)^d, row-major with the last
/// coordinate fastest.
struct GridFunction {
  std::size_t d = 0;
  int n = 0;
  std::vector<double> values;

  static GridFunction sample(const TestFunction& f, int n);
  double sup_distance(const GridFunction& o) const;
  double mean() const;
};

/// f ∗ K_m for a trig polynomial: coefficients multiplied by the kernel.
TestFunction smooth_approx(const TestFunction& f, int m);
/// f ∗ K_m from grid samples, returned as a trig polynomial. Requires n ≥ 16m.
TestFunction smooth_approx(const GridFunction& f, int m);
/// f ∗ K_m from grid samples, evaluated back on the same grid.
GridFunction smooth_on_grid(const GridFunction& f, int m);

struct WassersteinBound {
  double value = 0.0;
  std::size_t best_index = 0;
  std::vector<double> per_function;  // |∫f dμ1 − ∫f dμ2| / bound
};

/// Certified Hölder-norm bound of f for exponent gamma.
double certified_norm(const TestFunction& f, double gamma, Metric m = Metric::kSup);

/// max over the dictionary of |∫f dμ1 − ∫f dμ2| / ‖f‖_γ-bound.
WassersteinBound wasserstein_lower_bound(const Measure& mu1, const Measure& mu2,
                                         double gamma,
                                         const std::vector<TestFunction>& dictionary,
                                         Metric m = Metric::kSup);

/// cos and sin of 2π⟨a,x⟩ for every a with ‖a‖_∞ ≤ 4 up to sign, plus
/// `n_dist` distance functions to seeded random centers.
std::vector<TestFunction> default_dictionary(std::size_t d, std::uint64_t seed,
                                             std::int64_t Amax = 4,
                                             std::size_t n_dist = 32,
                                             Metric m = Metric::kSup);

/// ψ(t) = (φ^{-1}(e^{C1 t}))^{-C0}, with the argument of φ^{-1} clamped to
/// φ(1).
double psi(double t, double C0, double C1, const PhiSpec& phi);

/// (Σ |c_a|² (1+‖a‖)^{2r})^{1/2}.
double sobolev_norm(const CoeffMap& coeffs, double r);

/// Columns a_1..a_d, re, im, modulus.
void write_profile_csv(std::ostream& os, const FourierProfile& profile);

}  // namespace ergotorus
