#include "ergotorus/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ergotorus/parallel.hpp"

namespace ergotorus {

namespace {

Frequency zero_frequency(std::size_t d) { return Frequency(std::vector<std::int64_t>(d, 0)); }

/// ∫ h1·h2 for real trig polynomials: Σ_a c1_a c2_{-a}.
double pairing(const CoeffMap& h1, const CoeffMap& h2) {
  Complex s = 0.0;
  for (const auto& [a, c] : h1) {
    auto it = h2.find(-a);
    if (it != h2.end()) s += c * it->second;
  }
  return s.real();
}

CoeffMap add(CoeffMap a, const CoeffMap& b) {
  for (const auto& [k, v] : b) a[k] += v;
  return a;
}

void require_centered(double mean, const char* what) {
  if (std::abs(mean) >= 1e-12) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + ": function must be centered (mean " + std::to_string(mean) + ")");
  }
}

double trig_mean(const TestFunction& f) {
  const auto& c = f.coefficients();
  auto it = c.find(zero_frequency(f.dim()));
  return it == c.end() ? 0.0 : it->second.real();
}

/// Ratio q and a bound on Σ_{l>L}|c_l| extrapolated from the last two
/// nonzero lags.
std::pair<double, double> geometric_tail(const std::vector<double>& c) {
  const int L = static_cast<int>(c.size()) - 1;
  std::vector<int> nz;
  for (int l = 1; l <= L; ++l)
    if (std::abs(c[l]) > 1e-15) nz.push_back(l);
  if (nz.empty()) return {0.0, 0.0};
  if (nz.size() < 2) return {1.0, std::numeric_limits<double>::infinity()};
  int l1 = nz[nz.size() - 2], l2 = nz.back();
  double q = std::pow(std::abs(c[l2]) / std::abs(c[l1]), 1.0 / double(l2 - l1));
  if (!(q < 1.0)) return {q, std::numeric_limits<double>::infinity()};
  return {q, std::abs(c[l2]) * std::pow(q, double(L + 1 - l2)) / (1.0 - q)};
}

std::uint64_t depth_budget(std::size_t support, int depth) {
  return word_count(support, depth);
}

}  // namespace

MeanEstimate mean_lebesgue(const TestFunction& f, std::size_t budget) {
  if (f.kind() == FunctionKind::kTrigPoly) return {trig_mean(f), 0.0, true};
  const std::size_t d = f.dim();
  std::size_t n = static_cast<std::size_t>(std::floor(std::pow(double(budget), 1.0 / double(d))));
  n = std::max<std::size_t>(2, n & ~std::size_t{1});
  auto grid_mean = [&](std::size_t m) {
    std::size_t rows = m;
    std::size_t inner = 1;
    for (std::size_t i = 1; i < d; ++i) inner *= m;
    std::vector<double> row_sum(rows, 0.0);
    parallel_for(rows, [&](std::size_t r) {
      std::vector<double> x(d);
      x[0] = (double(r) + 0.5) / double(m);
      double s = 0.0;
      for (std::size_t j = 0; j < inner; ++j) {
        std::size_t t = j;
        for (std::size_t i = d; i-- > 1;) {
          x[i] = (double(t % m) + 0.5) / double(m);
          t /= m;
        }
        s += f(x);
      }
      row_sum[r] = s;
    });
    double s = 0.0;
    for (double v : row_sum) s += v;
    return s / (double(rows) * double(inner));
  };
  double fine = grid_mean(n);
  double coarse = grid_mean(n / 2);
  return {fine, std::abs(fine - coarse), false};
}

double correlation_exact(const GeneratorMeasure& rho, const TestFunction& f, int l,
                         std::uint64_t max_atoms) {
  if (f.kind() != FunctionKind::kTrigPoly) {
    throw Error(ErrorCode::kInvalidArgument, "correlation_exact needs a trig polynomial");
  }
  if (f.coefficients().empty()) return 0.0;
  require_same_dim(rho.dim(), f.dim(), "correlation_exact");
  CoeffMap pl = propagate_coefficients(rho, f.coefficients(), l, max_atoms);
  return pairing(f.coefficients(), pl);
}

RationalCoeffs rational_cosine(const Frequency& a, Rational amp) {
  RationalCoeffs c;
  if (a.is_zero()) {
    c[a] = amp;
  } else {
    c[a] += amp * Rational(1, 2);
    c[-a] += amp * Rational(1, 2);
  }
  return c;
}

namespace {

Rational rational_corr(const GeneratorMeasure& rho, const RationalCoeffs& f, int l,
                       std::uint64_t max_atoms) {
  Rational s(0);
  for (const auto& [a, c] : f) {
    FrequencyDistribution pd = character_propagate(rho, a, l, max_atoms);
    for (const auto& [b, w] : pd.atoms) {
      auto it = f.find(-b);
      if (it != f.end()) s += c * w * it->second;
    }
  }
  return s;
}

}  // namespace

Rational correlation_rational(const GeneratorMeasure& rho, const RationalCoeffs& f, int l,
                              std::uint64_t max_atoms) {
  return rational_corr(rho, f, l, max_atoms);
}

Rational correlation_rational_adjoint(const GeneratorMeasure& rho, const RationalCoeffs& f,
                                      int l, std::uint64_t max_atoms) {
  // ∫ f·P^l f = ∫ (P̃^l f)·f where P̃ is the operator of the inverted measure.
  GeneratorMeasure inv = rho.symmetrized();
  Rational s(0);
  for (const auto& [b, cb] : f) {
    FrequencyDistribution pd = character_propagate(inv, b, l, max_atoms);
    for (const auto& [a, w] : pd.atoms) {
      auto it = f.find(-a);
      if (it != f.end()) s += it->second * w * cb;
    }
  }
  return s;
}

VarianceReport variance_series(const GeneratorMeasure& rho, const TestFunction& f, int L,
                               std::uint64_t max_atoms) {
  if (L < 0) throw Error(ErrorCode::kInvalidArgument, "L must be >= 0");
  if (f.kind() != FunctionKind::kTrigPoly) {
    throw Error(ErrorCode::kInvalidArgument, "variance_series needs a trig polynomial");
  }
  require_centered(trig_mean(f), "variance_series");
  std::vector<double> c(L + 1);
  parallel_for(c.size(), [&](std::size_t l) {
    c[l] = correlation_exact(rho, f, static_cast<int>(l), max_atoms);
  });
  VarianceReport rep;
  rep.method = "series";
  rep.truncation = L;
  rep.terms.resize(L + 1);
  rep.terms[0] = c[0];
  for (int l = 1; l <= L; ++l) rep.terms[l] = 2.0 * c[l];
  // Summed in reverse so the small tail terms are not absorbed first.
  double s = 0.0;
  for (int l = L; l >= 0; --l) s += rep.terms[l];
  rep.sigma2 = s;
  auto [q, tail] = geometric_tail(c);
  rep.decay_rate = q;
  rep.uncertainty = 2.0 * tail;
  return rep;
}

Rational variance_series_rational(const GeneratorMeasure& rho, const RationalCoeffs& f, int L,
                                  std::vector<Rational>* terms, std::uint64_t max_atoms) {
  if (L < 0) throw Error(ErrorCode::kInvalidArgument, "L must be >= 0");
  auto z = f.find(zero_frequency(rho.dim()));
  if (z != f.end() && !z->second.is_zero()) {
    throw Error(ErrorCode::kInvalidArgument, "variance_series: function must be centered");
  }
  std::vector<Rational> c(L + 1);
  parallel_for(c.size(), [&](std::size_t l) {
    c[l] = rational_corr(rho, f, static_cast<int>(l), max_atoms);
  });
  Rational s = c[0];
  if (terms) terms->assign(1, c[0]);
  for (int l = 1; l <= L; ++l) {
    s += Rational(2) * c[l];
    if (terms) terms->push_back(Rational(2) * c[l]);
  }
  return s;
}

double transfer_once(const GeneratorMeasure& rho, const Evaluator& g, std::span<const double> x) {
  std::vector<double> y(x.size());
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    rho[i].matrix.apply_mod1(x, y);
    s += rho.weights()[i] * g(y);
  }
  return s;
}

VarianceReport variance_along_walk(const GeneratorMeasure& rho, const Evaluator& g,
                                   const TorusPoint& x, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  require_same_dim(rho.dim(), x.dim(), "variance_along_walk");
  VarianceReport rep;
  rep.method = "along_walk";
  rep.truncation = static_cast<int>(n);
  rep.seeds = {seed};
  rep.terms.resize(n);
  Walker walker(rho, x.coords(), seed, 0);
  std::vector<double> y(x.dim());
  std::vector<double> running(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    auto pos = walker.position();
    double pg = 0.0, pg2 = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
      rho[i].matrix.apply_mod1(pos, y);
      double v = g(y);
      pg += rho.weights()[i] * v;
      pg2 += rho.weights()[i] * v * v;
    }
    double t = pg2 - pg * pg;
    rep.terms[k] = t;
    acc += t;
    running[k] = acc / double(k + 1);
    walker.advance();
  }
  rep.sigma2 = running.back();
  rep.raw_average = rep.sigma2;

  constexpr std::size_t kBatches = 20;
  double se = 0.0;
  if (n >= 2 * kBatches) {
    std::size_t len = n / kBatches;
    std::vector<double> bm(kBatches, 0.0);
    for (std::size_t b = 0; b < kBatches; ++b) {
      for (std::size_t k = b * len; k < (b + 1) * len; ++k) bm[b] += rep.terms[k];
      bm[b] /= double(len);
    }
    double m = 0.0;
    for (double v : bm) m += v;
    m /= double(kBatches);
    double var = 0.0;
    for (double v : bm) var += (v - m) * (v - m);
    se = std::sqrt(var / double(kBatches - 1) / double(kBatches));
  }
  auto q = running.begin() + static_cast<std::ptrdiff_t>(3 * n / 4);
  auto [lo, hi] = std::minmax_element(q, running.end());
  double drift = *hi - *lo;
  rep.uncertainty = std::sqrt(se * se + drift * drift);
  return rep;
}

TruncatedPoisson truncated_poisson(const GeneratorMeasure& rho, const TestFunction& f, int N,
                                   std::uint64_t max_atoms) {
  if (N < 1) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  if (f.kind() != FunctionKind::kTrigPoly) {
    throw Error(ErrorCode::kInvalidArgument, "truncated_poisson needs a trig polynomial");
  }
  require_centered(trig_mean(f), "truncated_poisson");
  if (word_count(rho.size(), N) > max_atoms) {
    throw Error(ErrorCode::kBudgetExceeded, "truncated_poisson: support^N exceeds budget");
  }
  // powers[n] = coefficients of P^n f, n = 0..N.
  std::vector<CoeffMap> powers{f.coefficients()};
  for (int n = 1; n <= N; ++n) {
    powers.push_back(propagate_coefficients(rho, powers.back(), 1, max_atoms));
  }
  CoeffMap g, pg;
  for (int n = 0; n < N; ++n) g = add(std::move(g), powers[n]);
  for (int n = 1; n <= N; ++n) pg = add(std::move(pg), powers[n]);
  std::vector<double> c(N + 1);
  for (int n = 0; n <= N; ++n) c[n] = pairing(powers[0], powers[n]);

  TruncatedPoisson tp{TestFunction::constant(f.dim(), 0.0)};
  tp.N = N;
  tp.sigma2_truncated = pairing(g, g) - pairing(pg, pg);
  // σ² − σ²(g_N) = 2Σ_{n>N} c_n + c_N + ⟨P^N f, g_N + P g_N⟩.
  tp.correction = c[N] + pairing(powers[N], g) + pairing(powers[N], pg);
  tp.tail_bound = 2.0 * geometric_tail(c).second;
  std::erase_if(g, [](const auto& kv) { return kv.second == Complex(0.0); });
  if (!g.empty()) tp.g = TestFunction::trig_poly(std::move(g), f.gamma());
  return tp;
}

VarianceReport variance_along_walk(const GeneratorMeasure& rho, const TruncatedPoisson& tp,
                                   const TorusPoint& x, std::size_t n, std::uint64_t seed) {
  const TestFunction& g = tp.g;
  VarianceReport rep = variance_along_walk(
      rho, [&g](std::span<const double> y) { return g(y); }, x, n, seed);
  rep.correction = tp.correction;
  rep.sigma2 = rep.raw_average + tp.correction;
  rep.uncertainty += tp.tail_bound;
  return rep;
}

PoissonValue poisson_solve_at(const GeneratorMeasure& rho, const TestFunction& f,
                              const TorusPoint& x, int N, const PoissonOptions& options) {
  if (N < 0) throw Error(ErrorCode::kInvalidArgument, "N must be >= 1");
  require_same_dim(rho.dim(), x.dim(), "poisson_solve_at");
  PoissonValue out;
  out.mean = mean_lebesgue(f).value;
  const int horizon = N > 0 ? N : options.max_N;

  int exact = std::min(horizon, options.exact_depth);
  while (exact > 0 && depth_budget(rho.size(), exact) > (std::uint64_t{1} << 20)) --exact;
  out.exact_upto = exact;

  std::vector<double> terms = transfer_powers(rho, f, x.coords(), exact);
  terms.resize(horizon + 1, 0.0);
  std::vector<double> se(horizon + 1, 0.0);
  if (horizon > exact) {
    const std::size_t T = options.mc_trials;
    std::vector<std::vector<double>> per(T);
    parallel_for(T, [&](std::size_t t) {
      Walker w(rho, x.coords(), options.seed, t);
      std::vector<double>& v = per[t];
      v.resize(horizon + 1);
      for (int n = 0; n <= horizon; ++n) {
        if (n > 0) w.advance();
        v[n] = f(w.position());
      }
    });
    for (int n = exact + 1; n <= horizon; ++n) {
      double m = 0.0, m2 = 0.0;
      for (const auto& v : per) {
        m += v[n];
        m2 += v[n] * v[n];
      }
      m /= double(T);
      terms[n] = m;
      se[n] = std::sqrt(std::max(0.0, m2 / double(T) - m * m) / double(T));
    }
  }
  for (double& t : terms) t -= out.mean;

  if (N == 0) {
    double scale = f.norm_bound().value_or(1.0);
    N = horizon;
    for (int n = 1; n <= horizon; ++n) {
      if (std::abs(terms[n]) <= options.target * scale) {
        N = n;
        break;
      }
    }
  }
  out.N = N;
  for (int n = 0; n < N; ++n) {
    out.g += terms[n];
    out.mc_stderr += se[n];
  }
  out.residual = std::abs(terms[N]);
  terms.resize(N + 1);
  out.terms = std::move(terms);
  return out;
}

double domination_norm(const Evaluator& f, const Evaluator& u, double p,
                       const std::vector<TorusPoint>& sample) {
  if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "p must be >= 1");
  double best = 0.0;
  for (const TorusPoint& x : sample) {
    double ux = u(x.coords());
    if (!std::isfinite(ux) || ux <= 0.0) continue;
    best = std::max(best, std::abs(f(x.coords())) / std::pow(ux, 1.0 / p));
  }
  return best;
}

std::vector<double> abel_partial_sums(const GeneratorMeasure& rho, const Evaluator& u,
                                      const TorusPoint& x, int n, double alpha) {
  TestFunction uf = TestFunction::callback(x.dim(), u, 1.0, std::nullopt, "u");
  std::vector<double> pk = transfer_powers(rho, uf, x.coords(), n + 1);
  std::vector<double> out(n + 1);
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    s += (pk[k] - pk[k + 1]) / std::pow(double(k + 1), alpha);
    out[k] = s;
  }
  return out;
}

std::vector<double> cesaro_damped(const GeneratorMeasure& rho, const Evaluator& f,
                                  const TorusPoint& x, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  TestFunction af = TestFunction::callback(
      x.dim(), [&f](std::span<const double> y) { return std::abs(f(y)); }, 1.0, std::nullopt,
      "abs");
  std::vector<double> pk = transfer_powers(rho, af, x.coords(), n - 1);
  std::vector<double> out(n);
  double s = 0.0;
  for (int m = 1; m <= n; ++m) {
    s += pk[m - 1] / std::sqrt(double(m));
    out[m - 1] = s / double(m);
  }
  return out;
}

double l2_grid_norm(const Evaluator& f, std::size_t d, int n) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  std::vector<double> rows(n, 0.0);
  const std::size_t inner = total / n;
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t r) {
    std::vector<double> x(d);
    x[0] = double(r) / double(n);
    double s = 0.0;
    for (std::size_t j = 0; j < inner; ++j) {
      std::size_t t = j;
      for (std::size_t i = d; i-- > 1;) {
        x[i] = double(t % n) / double(n);
        t /= n;
      }
      double v = f(x);
      s += v * v;
    }
    rows[r] = s;
  });
  double s = 0.0;
  for (double v : rows) s += v;
  return std::sqrt(s / double(total));
}

}  // namespace ergotorus
