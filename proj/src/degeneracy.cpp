#include "ergotorus/degeneracy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ergotorus/parallel.hpp"

namespace ergotorus {

ClosureResult product_set_closure(const GeneratorMeasure& rho, int max_word_len,
                                  std::size_t max_elems) {
  if (max_word_len < 1 || max_elems < 1) {
    throw Error(ErrorCode::kInvalidArgument, "closure budgets must be positive");
  }
  std::set<LatticeMatrix> gens;
  for (const Atom& s : rho.atoms())
    for (const Atom& t : rho.atoms()) gens.insert(s.matrix * t.matrix.inverse());

  ClosureResult out;
  std::set<LatticeMatrix> seen{LatticeMatrix::identity(rho.dim())};
  std::vector<LatticeMatrix> frontier{LatticeMatrix::identity(rho.dim())};
  for (int len = 1; len <= max_word_len; ++len) {
    std::vector<LatticeMatrix> next;
    for (const LatticeMatrix& w : frontier) {
      for (const LatticeMatrix& h : gens) {
        LatticeMatrix p = w * h;
        if (seen.insert(p).second) {
          next.push_back(p);
          if (seen.size() >= max_elems) {
            out.budget_exceeded = true;
            break;
          }
        }
      }
      if (out.budget_exceeded) break;
    }
    out.word_len = len;
    if (out.budget_exceeded) break;
    if (next.empty()) {
      out.complete = true;
      break;
    }
    frontier = std::move(next);
  }
  out.elements.assign(seen.begin(), seen.end());
  return out;
}

double invariance_check(const std::vector<LatticeMatrix>& h_set, const Evaluator& g,
                        const std::vector<TorusPoint>& sample) {
  std::vector<double> dev(sample.size(), 0.0);
  parallel_for(sample.size(), [&](std::size_t i) {
    const TorusPoint& x = sample[i];
    std::vector<double> y(x.dim());
    double gx = g(x.coords());
    for (const LatticeMatrix& h : h_set) {
      h.apply_mod1(x.coords(), y);
      dev[i] = std::max(dev[i], std::abs(g(y) - gx));
    }
  });
  return dev.empty() ? 0.0 : *std::max_element(dev.begin(), dev.end());
}

std::optional<CosetCertificate> find_coset_certificate(const GeneratorMeasure& rho,
                                                       int max_word_len, std::size_t max_elems) {
  ClosureResult h = product_set_closure(rho, max_word_len, max_elems);
  for (const Atom& candidate : rho.atoms()) {
    LatticeMatrix ginv = candidate.matrix.inverse();
    bool ok = true;
    for (const Atom& s : rho.atoms()) {
      if (!std::binary_search(h.elements.begin(), h.elements.end(), s.matrix * ginv)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      CosetCertificate cert;
      cert.gamma = candidate.matrix;
      cert.h_generators = h.elements;
      cert.max_word_len = max_word_len;
      cert.max_elems = max_elems;
      cert.closure_complete = h.complete;
      return cert;
    }
  }
  return std::nullopt;
}

DegenerateExample degenerate_example() {
  LatticeMatrix A(2, {2, 1, 1, 1});
  LatticeMatrix B(2, {0, 1, -1, 0});
  GeneratorMeasure rho({{A, Rational(1, 2)}, {B * A, Rational(1, 2)}});
  DegenerateExample ex{A, B, rho, {}, {}, {}};
  ex.g = [](std::span<const double> x) { return distance_to_origin(x, Metric::kEuclidean); };
  ex.pg = [rho, g = ex.g](std::span<const double> x) { return transfer_once(rho, g, x); };
  ex.f = [g = ex.g, pg = ex.pg](std::span<const double> x) { return g(x) - pg(x); };
  return ex;
}

BoundedSumResult bounded_sum_verify(const GeneratorMeasure& rho, const Evaluator& g,
                                    const Evaluator& f, const TorusPoint& x, std::size_t n,
                                    std::uint64_t seed) {
  require_same_dim(rho.dim(), x.dim(), "bounded_sum_verify");
  BoundedSumResult out;
  out.n = n;
  Walker w(rho, x.coords(), seed, 0);
  const double g0 = g(x.coords());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s += f(w.position());
    w.advance();
    out.max_abs_partial_sum = std::max(out.max_abs_partial_sum, std::abs(s));
    out.identity_residual = std::max(out.identity_residual, std::abs(s - (g0 - g(w.position()))));
  }
  return out;
}

}  // namespace ergotorus
