#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergotorus/poisson.hpp"
#include "ergotorus/torus.hpp"

namespace ergotorus {

struct ClosureResult {
  std::vector<LatticeMatrix> elements;  // sorted, deduplicated
  bool complete = false;        // no new element appeared at the last word length
  bool budget_exceeded = false; // stopped at max_elems; `elements` is partial
  int word_len = 0;             // longest word length explored
};

/// Closure of S·S⁻¹ under products of at most max_word_len generators.
ClosureResult product_set_closure(const GeneratorMeasure& rho, int max_word_len,
                                  std::size_t max_elems);

/// max over the sample and h_set of |g(hx) − g(x)|.
double invariance_check(const std::vector<LatticeMatrix>& h_set, const Evaluator& g,
                        const std::vector<TorusPoint>& sample);

/// Bounded-search certificate that supp ρ ⊂ H·γ.
struct CosetCertificate {
  LatticeMatrix gamma = LatticeMatrix::identity(2);
  std::vector<LatticeMatrix> h_generators;
  int max_word_len = 0;
  std::size_t max_elems = 0;
  bool closure_complete = false;
};

/// Searches γ among the support atoms. Returns nothing when no certificate is
/// found within the budgets.
std::optional<CosetCertificate> find_coset_certificate(const GeneratorMeasure& rho,
                                                       int max_word_len, std::size_t max_elems);

struct DegenerateExample {
  LatticeMatrix A;
  LatticeMatrix B;
  GeneratorMeasure rho;
  Evaluator g;   // Euclidean distance to 0
  Evaluator pg;  // exact one-step Pg
  Evaluator f;   // g − Pg
};

/// ρ = ½δ_A + ½δ_{BA} with A = (2 1; 1 1), B = (0 1; −1 0).
DegenerateExample degenerate_example();

struct BoundedSumResult {
  double max_abs_partial_sum = 0.0;
  double identity_residual = 0.0;  // max_m |S_m − (g(X_0) − g(X_m))|
  std::size_t n = 0;
};

/// Birkhoff sums of f along one walk checked against the telescoped form.
BoundedSumResult bounded_sum_verify(const GeneratorMeasure& rho, const Evaluator& g,
                                    const Evaluator& f, const TorusPoint& x, std::size_t n,
                                    std::uint64_t seed);

}  // namespace ergotorus
