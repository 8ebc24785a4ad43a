#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergotorus/poisson.hpp"
#include "ergotorus/walk.hpp"

namespace ergotorus {

struct MartingaleDecomposition {
  std::vector<double> increments;  // g(X_{k+1}) − Pg(X_k)
  std::vector<double> pg;          // Pg(X_k), exact one-step sums
  double boundary = 0.0;           // g(X_0) − g(X_n)
};

MartingaleDecomposition martingale_decompose(const GeneratorMeasure& rho, const Evaluator& g,
                                             const Trajectory& traj);

struct LlnResult {
  double birkhoff_mean = 0.0;
  double target = 0.0;
  double gap = 0.0;
  double std_error = 0.0;
  std::string target_method;  // "lebesgue", "lebesgue_grid" or "rational_orbit"
};

/// Birkhoff means of f over `trials` walks of length n against ∫f dν_x.
LlnResult lln_check(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                    std::size_t n, std::size_t trials, std::uint64_t seed);

/// Kolmogorov-Smirnov distance of the sample to Normal(0, var); var = 0
/// compares with the point mass at 0.
double ks_normal(std::vector<double> samples, double var);

struct CltReport {
  std::size_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<double> normalized_samples;  // (S_n − n·mean)/√n, by trial
  double sigma2_ref = 0.0;
  double ks_stat = 0.0;           // against Normal(0, sigma2_ref)
  double ks_stat_var_hat = 0.0;   // against Normal(0, var_hat)
  double mean_hat = 0.0;
  double var_hat = 0.0;
  double mass_within_005 = 0.0;   // fraction of samples with |value| ≤ 0.05
};

CltReport clt_experiment(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                         std::size_t n, std::size_t trials, double sigma2_ref,
                         std::uint64_t seed, double mean = 0.0);

struct LilReport {
  std::vector<std::uint64_t> trajectory_ids;
  std::vector<std::uint64_t> checkpoints;         // ⌈100·1.5^j⌉ ≤ n_max
  std::vector<std::vector<double>> values;        // [trial][checkpoint]
  std::vector<double> per_trajectory_max;
  std::vector<double> per_trajectory_min;
  std::vector<double> envelope_max;               // per checkpoint, across trials
  std::vector<double> envelope_min;
  double terminal_max = 0.0;                      // envelope at the last checkpoint
  double terminal_min = 0.0;
  double overall_max = 0.0;
  double overall_min = 0.0;
};

std::vector<std::uint64_t> lil_checkpoints(std::uint64_t n_max);

/// (S_n − n·mean)/√(2nσ² ln ln n) at geometric checkpoints.
LilReport lil_envelope(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                       std::uint64_t n_max, std::size_t trials, double sigma2_ref,
                       std::uint64_t seed, double mean = 0.0);

struct LindebergPoint {
  std::size_t n = 0;
  double estimate = 0.0;  // (1/n) Σ E[M_k² 1{|M_k| ≥ ε√n}]
  double std_error = 0.0;
};

struct LindebergReport {
  std::vector<LindebergPoint> points;
  /// For bounded g: the quantity vanishes identically once n ≥ cutoff.
  std::optional<std::uint64_t> cutoff_n;
};

LindebergReport lindeberg_check(const GeneratorMeasure& rho, const Evaluator& g,
                                const TorusPoint& x, const std::vector<std::size_t>& n_list,
                                double eps, std::size_t trials, std::uint64_t seed,
                                std::optional<double> g_sup = {});

struct FourthMomentRow {
  std::size_t n = 0;
  double m2 = 0.0;           // E S_n²
  double m4 = 0.0;           // E S_n⁴
  double kurtosis_ratio = 0.0;  // m4 / (3 m2²)
  double m4_over_n2 = 0.0;
  double m4_over_n3 = 0.0;
};

/// With `iid_control`, f is evaluated at fresh uniform points each step and
/// rho is ignored.
std::vector<FourthMomentRow> fourth_moment_scan(const GeneratorMeasure& rho,
                                                const TestFunction& f, const TorusPoint& x,
                                                const std::vector<std::size_t>& n_list,
                                                std::size_t trials, std::uint64_t seed,
                                                double mean = 0.0, bool iid_control = false);

}  // namespace ergotorus
