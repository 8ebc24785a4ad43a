#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ergotorus/test_function.hpp"
#include "ergotorus/torus.hpp"

namespace ergotorus {

struct StartSpec {
  std::string preset;                // "sqrt2_sqrt3", "half_half", "origin" or empty
  std::vector<std::string> literals; // per-coordinate "p/q" or decimal literal
};

struct TrigTerm {
  std::vector<std::int64_t> frequency;
  double re = 0.0;
  double im = 0.0;
};

struct FunctionSpec {
  std::string kind = "cos";  // cos, trig, dist
  std::vector<std::int64_t> frequency;
  double amplitude = 1.0;
  std::vector<TrigTerm> terms;
  std::vector<std::string> center;
  std::string metric = "euclidean";
  double gamma = 1.0;
};

struct ExperimentConfig {
  std::size_t dimension = 2;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string metric = "sup";
  std::vector<std::string> matrices;
  std::vector<std::string> weights;
  StartSpec start;
  FunctionSpec function;

  struct Budgets {
    std::uint64_t max_atoms = std::uint64_t{1} << 24;
    int exact_depth = 16;
    unsigned threads = 0;
  } budgets;
  struct Simulate {
    std::uint64_t n = 1000;
    std::uint64_t trials = 1;
  } simulate;
  struct Lln {
    std::uint64_t n = 100000;
    std::uint64_t trials = 8;
    double tolerance = 0.02;
  } lln;
  struct Clt {
    std::uint64_t n = 10000;
    std::uint64_t trials = 2000;
    int L = 12;
    double ks_threshold = 0.05;
  } clt;
  struct Lil {
    std::uint64_t n_max = 1000000;
    std::uint64_t trials = 200;
    int L = 12;
    double window_lo = 0.6;
    double window_hi = 1.4;
  } lil;
  struct Variance {
    int L = 12;
    std::uint64_t walk_n = 100000;
    int poisson_N = 10;
    double agreement = 3.0;
  } variance;
  struct Dioph {
    std::int64_t Qmax = 2000;
    double B = 1.0;
    double beta = 0.5;
    std::int64_t q_min = 64;
  } dioph;
  struct Fourier {
    std::int64_t Amax = 3;
    int nmax = 30;
    int exact_max = 20;
    std::uint64_t mc_trials = 262144;
    double decay_threshold = 0.05;
    double rational_floor = 0.5;
  } fourier;
  struct Drift {
    double delta = 0.3;
    int n_iter = 8;
    std::uint64_t samples = 500;
    std::int64_t Qmax = 50;
    double phi_B = 1.0;
    double phi_beta = 0.2;
  } drift;
  struct Poisson {
    int N = 0;
    std::uint64_t trajectory_n = 20;
  } poisson;
  struct Degenerate {
    std::uint64_t n = 100000;
    std::uint64_t seeds = 10;
  } degenerate;
};

/// Parses and validates a TOML document. Errors carry the offending key.
ExperimentConfig parse_config(std::string_view toml_text);
ExperimentConfig load_config(const std::string& path);

/// Deterministic TOML emission; parse(emit(c)) emits identical bytes.
std::string emit_config(const ExperimentConfig& c);

/// FNV-1a of the canonical emission.
std::uint64_t config_hash(const ExperimentConfig& c);

GeneratorMeasure build_measure(const ExperimentConfig& c);
TorusPoint build_start(const ExperimentConfig& c);
TestFunction build_function(const ExperimentConfig& c);
Metric build_metric(const ExperimentConfig& c);

}  // namespace ergotorus
