#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "ergotorus/torus.hpp"

namespace ergotorus {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct RationalApprox {
  TorusPoint p_over_q;       // exact
  std::int64_t q = 1;        // reduced common denominator of p_over_q
  std::int64_t q_scan = 1;   // denominator of the grid it was found on
  double dist = 0.0;
};

/// For every q ≤ Qmax, the point of (1/q)Z^d nearest to x (coordinate-wise
/// rounding).
std::vector<RationalApprox> best_rational_approx(const TorusPoint& x,
                                                 std::int64_t Qmax, Metric m);

/// φ(q) = q^M or exp(B q^β).
class PhiSpec {
 public:
  enum class Family { kPower, kStretchedExp };

  static PhiSpec power(double M);
  static PhiSpec stretched_exp(double B, double beta);

  Family family() const noexcept { return family_; }
  double M() const noexcept { return M_; }
  double B() const noexcept { return B_; }
  double beta() const noexcept { return beta_; }

  double operator()(double q) const noexcept { return std::exp(log_value(q)); }
  double log_value(double q) const noexcept;
  /// φ^{-1}(y) for y ≥ φ(1).
  double inverse(double y) const;

 private:
  Family family_ = Family::kPower;
  double M_ = 1.0;
  double B_ = 1.0;
  double beta_ = 0.5;
};

/// sup over q ≤ Qmax of 1/(φ(q)·d(x, p/q)); +infinity when x is one of the
/// scanned rationals.
double h_phi(const TorusPoint& x, const PhiSpec& phi, std::int64_t Qmax,
             Metric m = Metric::kSup);

/// X_Q: points p/Q, p ∈ {0..Q-1}^d, whose reduced denominator is exactly Q.
std::vector<TorusPoint> primitive_points(std::int64_t Q, std::size_t d);

/// d(x,0)^{-δ}.
double u_delta(std::span<const double> x, double delta, Metric m) noexcept;
double u_delta(const TorusPoint& x, double delta, Metric m);

struct DriftSpec {
  double delta = 0.3;
  double a = 0.5;
  double b = 0.0;
  int n0 = 8;
  PhiSpec phi = PhiSpec::stretched_exp(1.0, 0.2);
  std::int64_t Qmax = 50;
  Metric metric = Metric::kSup;
};

/// u_φ(x) = 1 + Σ_{Q ≤ Qmax} φ(Q)^{-δ} Σ_{p ∈ X_Q} u_δ(x − p).
class UPhi {
 public:
  UPhi(const DriftSpec& spec, std::size_t d);

  double operator()(std::span<const double> x) const;
  double operator()(const TorusPoint& x) const;
  /// Σ_{p ∈ X_Q} u_δ(x − p) for a single level Q.
  double level_sum(std::span<const double> x, std::int64_t Q) const;

  const DriftSpec& spec() const noexcept { return spec_; }

 private:
  DriftSpec spec_;
  std::size_t d_;
  std::vector<double> level_weight_;                // φ(Q)^{-δ}, index Q
  std::vector<std::vector<std::uint8_t>> mask_;     // primitive flags, d = 2
};

struct DriftFit {
  double a_hat = 0.0;
  double b_hat = 0.0;
  std::size_t violations = 0;
  std::size_t core_size = 0;
  std::size_t near_size = 0;
  std::vector<double> u;   // u(x_i)
  std::vector<double> pu;  // P^{n_iter} u(x_i)
};

/// Fits P^{n_iter} u ≤ a·u + b. The 1% of points with the largest u are held
/// out; a_hat is the largest ratio P^n u / u over core points with u above
/// the core median, b_hat the smallest offset making the core satisfy the
/// inequality, and violations are counted over the whole sample.
DriftFit drift_fit(const GeneratorMeasure& rho,
                   const std::function<double(std::span<const double>)>& u,
                   const std::vector<TorusPoint>& sample, int n_iter,
                   std::uint64_t max_atoms = std::uint64_t{1} << 24);

/// Points at log-uniform distance from 0 in [rmin, rmax], random direction.
std::vector<TorusPoint> sample_near_origin(std::size_t d, std::size_t n,
                                           double rmin, double rmax, Metric m,
                                           std::uint64_t seed);
/// Uniform points on T^d.
std::vector<TorusPoint> sample_uniform(std::size_t d, std::size_t n,
                                       std::uint64_t seed);

struct LyapunovEstimate {
  double lambda1 = 0.0;
  double std_error = 0.0;
};

/// Mean of (1/n) ln‖g_n⋯g_1 v‖ over trials with random unit v.
LyapunovEstimate lyapunov_estimate(const GeneratorMeasure& rho, int n,
                                   std::size_t trials, std::uint64_t seed);

struct DiophantineCheck {
  std::vector<RationalApprox> solutions;  // reduced p/q with d ≤ e^{-B q^β}
  bool pass = false;                      // no solution with q ≥ q_min
  bool truncated = false;                 // hit max_solutions
};

/// Lists every reduced p/q, q ≤ Qmax, with d(x, p/q) ≤ exp(-B q^β).
DiophantineCheck diophantine_check(const TorusPoint& x, double B, double beta,
                                   std::int64_t Qmax, std::int64_t q_min,
                                   Metric m = Metric::kSup,
                                   std::size_t max_solutions = 100000);

/// Columns q, p_1..p_d, dist, phi_q, height_term.
void write_diophantine_csv(std::ostream& os,
                           const std::vector<RationalApprox>& table,
                           const PhiSpec& phi);

}  // namespace ergotorus
