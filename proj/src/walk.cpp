#include "ergotorus/walk.hpp"

#include <cstdio>
#include <deque>
#include <ostream>
#include <unordered_map>

namespace ergotorus {

namespace {

std::vector<double> matrices_as_doubles(const GeneratorMeasure& rho) {
  const std::size_t d = rho.dim();
  std::vector<double> m;
  m.reserve(rho.size() * d * d);
  for (const Atom& a : rho.atoms())
    for (std::int64_t e : a.matrix.entries()) m.push_back(static_cast<double>(e));
  return m;
}

struct RationalVecHash {
  std::size_t operator()(const std::vector<Rational>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const Rational& r : v) {
      h ^= std::hash<Rational>{}(r) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

void check_budget(std::size_t support, int n, std::uint64_t max_atoms) {
  std::uint64_t need = word_count(support, n);
  if (need > max_atoms) {
    throw Error(ErrorCode::kBudgetExceeded,
                "enumeration needs " +
                    (need == UINT64_MAX ? std::string("> 2^64")
                                        : std::to_string(need)) +
                    " words, budget is " + std::to_string(max_atoms));
  }
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::uint64_t word_count(std::size_t support, int n) noexcept {
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) {
    if (c > UINT64_MAX / support) return UINT64_MAX;
    c *= support;
  }
  return c;
}

// ---------------------------------------------------------------------------

Walker::Walker(const GeneratorMeasure& rho, std::span<const double> x,
               std::uint64_t seed, std::uint64_t trial)
    : rho_(&rho),
      mats_(matrices_as_doubles(rho)),
      pos_(x.begin(), x.end()),
      tmp_(x.size()),
      stream_(seed, RngPurpose::kWalk, trial),
      d_(rho.dim()) {
  require_same_dim(d_, x.size(), "Walker");
}

std::size_t Walker::advance() noexcept {
  if ((step_ & 1) == 0) cache_ = stream_.pair(step_ >> 1);
  std::size_t a = rho_->pick(cache_[step_ & 1]);
  ++step_;
  const double* m = mats_.data() + a * d_ * d_;
  for (std::size_t i = 0; i < d_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += m[i * d_ + j] * pos_[j];
    s -= std::floor(s);
    tmp_[i] = s >= 1.0 ? 0.0 : s;
  }
  pos_.swap(tmp_);
  return a;
}

Trajectory simulate_trajectory(const GeneratorMeasure& rho, const TorusPoint& x,
                               std::size_t n, std::uint64_t seed,
                               std::uint64_t trial) {
  require_same_dim(rho.dim(), x.dim(), "simulate_trajectory");
  Trajectory t;
  t.start = x;
  t.seed = seed;
  t.trial = trial;
  t.rho_id = rho.content_hash();
  t.points.reserve(n + 1);
  t.word.reserve(n);
  t.points.push_back(x);
  CounterStream stream(seed, RngPurpose::kWalk, trial);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t a = rho.pick(stream.bits(k));
    t.word.push_back(static_cast<std::int32_t>(a));
    t.points.push_back(step(rho[a].matrix, t.points.back()));
  }
  return t;
}

// ---------------------------------------------------------------------------

AtomicDistribution::AtomicDistribution(std::size_t d, std::vector<double> coords,
                                       std::vector<Rational> exact,
                                       std::vector<Rational> weights,
                                       int generation)
    : d_(d),
      coords_(std::move(coords)),
      exact_(std::move(exact)),
      weights_(std::move(weights)),
      generation_(generation) {
  if (coords_.size() != d_ * weights_.size() ||
      (!exact_.empty() && exact_.size() != coords_.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "AtomicDistribution layout");
  }
  Rational total(0);
  wd_.reserve(weights_.size());
  for (const Rational& w : weights_) {
    if (w <= Rational(0)) {
      throw Error(ErrorCode::kInvalidArgument, "atom weights must be positive");
    }
    total += w;
    wd_.push_back(w.to_double());
  }
  if (total != Rational(1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "distribution weights sum to " + total.to_string());
  }
}

AtomicDistribution AtomicDistribution::dirac(const TorusPoint& x) {
  std::vector<double> c(x.coords().begin(), x.coords().end());
  std::vector<Rational> e(x.exact().begin(), x.exact().end());
  return AtomicDistribution(x.dim(), std::move(c), std::move(e), {Rational(1)}, 0);
}

TorusPoint AtomicDistribution::atom(std::size_t i) const {
  if (is_exact()) {
    auto e = exact_point(i);
    return TorusPoint::from_rationals({e.begin(), e.end()});
  }
  auto p = point(i);
  return TorusPoint(std::vector<double>(p.begin(), p.end()));
}

double AtomicDistribution::expect(const TestFunction& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += wd_[i] * f(point(i));
  return s;
}

AtomicDistribution word_distribution_exact(const GeneratorMeasure& rho,
                                           const TorusPoint& x, int n,
                                           std::uint64_t max_atoms) {
  require_same_dim(rho.dim(), x.dim(), "word_distribution_exact");
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 0");
  check_budget(rho.size(), n, max_atoms);
  const std::size_t d = x.dim();

  if (x.is_exact()) {
    std::vector<std::vector<Rational>> pts{{x.exact().begin(), x.exact().end()}};
    std::vector<Rational> w{Rational(1)};
    for (int gen = 0; gen < n; ++gen) {
      std::vector<std::vector<Rational>> npts;
      std::vector<Rational> nw;
      std::unordered_map<std::vector<Rational>, std::size_t, RationalVecHash> index;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (const Atom& a : rho.atoms()) {
          std::vector<Rational> y(d, Rational(0));
          for (std::size_t r = 0; r < d; ++r) {
            Rational s(0);
            for (std::size_t c = 0; c < d; ++c) s += Rational(a.matrix(r, c)) * pts[i][c];
            y[r] = s.frac();
          }
          Rational wy = w[i] * a.weight;
          auto [it, fresh] = index.try_emplace(y, npts.size());
          if (fresh) {
            npts.push_back(std::move(y));
            nw.push_back(wy);
          } else {
            nw[it->second] += wy;
          }
        }
      }
      pts = std::move(npts);
      w = std::move(nw);
    }
    std::vector<double> coords;
    std::vector<Rational> exact;
    coords.reserve(pts.size() * d);
    exact.reserve(pts.size() * d);
    for (const auto& p : pts) {
      for (const Rational& r : p) {
        exact.push_back(r);
        coords.push_back(r.to_double());
      }
    }
    return AtomicDistribution(d, std::move(coords), std::move(exact), std::move(w), n);
  }

  // Inexact start: one atom per word, no merging.
  std::vector<double> cur(x.coords().begin(), x.coords().end());
  std::vector<Rational> w{Rational(1)};
  for (int gen = 0; gen < n; ++gen) {
    std::vector<double> next;
    std::vector<Rational> nw;
    next.resize(cur.size() * rho.size());
    nw.reserve(w.size() * rho.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      for (const Atom& a : rho.atoms()) {
        a.matrix.apply_mod1({cur.data() + i * d, d}, {next.data() + k * d, d});
        nw.push_back(w[i] * a.weight);
        ++k;
      }
    }
    cur = std::move(next);
    w = std::move(nw);
  }
  return AtomicDistribution(d, std::move(cur), {}, std::move(w), n);
}

// ---------------------------------------------------------------------------

WordTree::WordTree(const GeneratorMeasure& rho)
    : d_(rho.dim()),
      mats_(matrices_as_doubles(rho)),
      weights_(rho.weights().begin(), rho.weights().end()) {}

std::vector<double> transfer_powers(const GeneratorMeasure& rho,
                                    const TestFunction& f,
                                    std::span<const double> x, int kmax) {
  require_same_dim(rho.dim(), x.size(), "transfer_powers");
  std::vector<double> out(kmax + 1, 0.0);
  WordTree tree(rho);
  tree.walk(x, kmax, [&](int level, std::span<const double> p, double w) {
    out[level] += w * f(p);
  });
  return out;
}

double transfer_apply(const GeneratorMeasure& rho, const TestFunction& f,
                      const TorusPoint& x, int k) {
  if (k < 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 0");
  if (x.is_exact() && k > 0) {
    return word_distribution_exact(rho, x, k, UINT64_MAX).expect(f);
  }
  double s = 0.0;
  WordTree tree(rho);
  tree.walk(x.coords(), k, [&](int level, std::span<const double> p, double w) {
    if (level == k) s += w * f(p);
  });
  return s;
}

// ---------------------------------------------------------------------------

FrequencyDistribution character_propagate(const GeneratorMeasure& rho,
                                          const Frequency& a, int l,
                                          std::uint64_t max_atoms) {
  require_same_dim(rho.dim(), a.dim(), "character_propagate");
  if (l < 0) throw Error(ErrorCode::kInvalidArgument, "l must be >= 0");
  check_budget(rho.size(), l, max_atoms);
  std::unordered_map<Frequency, Rational, FrequencyHash> cur{{a, Rational(1)}};
  for (int gen = 0; gen < l; ++gen) {
    std::unordered_map<Frequency, Rational, FrequencyHash> next;
    next.reserve(cur.size() * rho.size());
    for (const auto& [b, w] : cur) {
      for (std::size_t i = 0; i < rho.size(); ++i) {
        next[frequency_action(rho[i].matrix, b)] += w * rho[i].weight;
      }
    }
    cur = std::move(next);
  }
  FrequencyDistribution out;
  out.generation = l;
  out.atoms.insert(cur.begin(), cur.end());
  return out;
}

CoeffMap propagate_coefficients(const GeneratorMeasure& rho,
                                const CoeffMap& coeffs, int l,
                                std::uint64_t max_atoms) {
  if (l < 0) throw Error(ErrorCode::kInvalidArgument, "l must be >= 0");
  check_budget(rho.size(), l, max_atoms);
  std::unordered_map<Frequency, Complex, FrequencyHash> cur(coeffs.begin(),
                                                            coeffs.end());
  for (int gen = 0; gen < l; ++gen) {
    std::unordered_map<Frequency, Complex, FrequencyHash> next;
    next.reserve(cur.size() * rho.size());
    for (const auto& [b, c] : cur) {
      for (std::size_t i = 0; i < rho.size(); ++i) {
        next[frequency_action(rho[i].matrix, b)] += c * rho.weights()[i];
      }
    }
    cur = std::move(next);
  }
  return CoeffMap(cur.begin(), cur.end());
}

// ---------------------------------------------------------------------------

double RationalOrbit::mean(const TestFunction& f) const {
  double s = 0.0;
  for (const TorusPoint& p : states) s += f(p);
  return s / static_cast<double>(states.size());
}

RationalOrbit rational_orbit(const GeneratorMeasure& rho, const TorusPoint& x,
                             std::size_t max_states) {
  require_same_dim(rho.dim(), x.dim(), "rational_orbit");
  if (!x.is_exact()) {
    throw Error(ErrorCode::kInvalidArgument,
                "rational_orbit needs exact rational coordinates");
  }
  RationalOrbit orbit;
  std::unordered_map<std::vector<Rational>, std::size_t, RationalVecHash> index;
  std::vector<std::vector<std::pair<std::size_t, Rational>>> edges;
  std::deque<std::size_t> queue;

  auto intern = [&](const TorusPoint& p) {
    std::vector<Rational> key(p.exact().begin(), p.exact().end());
    auto [it, fresh] = index.try_emplace(std::move(key), orbit.states.size());
    if (fresh) {
      if (orbit.states.size() >= max_states) {
        throw Error(ErrorCode::kBudgetExceeded,
                    "rational orbit exceeds " + std::to_string(max_states) + " states");
      }
      orbit.states.push_back(p);
      edges.emplace_back();
      queue.push_back(it->second);
    }
    return it->second;
  };

  intern(x);
  while (!queue.empty()) {
    std::size_t s = queue.front();
    queue.pop_front();
    for (const Atom& a : rho.atoms()) {
      TorusPoint y = step(a.matrix, orbit.states[s]);
      std::size_t t = intern(y);
      edges[s].emplace_back(t, a.weight);
    }
  }

  const std::size_t n = orbit.states.size();
  orbit.transition.assign(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& [t, w] : edges[s]) orbit.transition[s][t] += w;
  return orbit;
}

// ---------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  const std::size_t d = t.start.dim();
  os << "step";
  for (std::size_t i = 1; i <= d; ++i) os << ",x_" << i;
  os << ",atom_index\n";
  for (std::size_t k = 0; k < t.points.size(); ++k) {
    os << k;
    for (double c : t.points[k].coords()) os << ',' << fmt_double(c);
    os << ',' << (k == 0 ? -1 : t.word[k - 1]) << '\n';
  }
}

void write_distribution_csv(std::ostream& os, const AtomicDistribution& dist) {
  os << "weight_num,weight_den";
  for (std::size_t i = 1; i <= dist.dim(); ++i) os << ",x_" << i;
  os << '\n';
  for (std::size_t k = 0; k < dist.size(); ++k) {
    os << dist.weight(k).num() << ',' << dist.weight(k).den();
    for (double c : dist.point(k)) os << ',' << fmt_double(c);
    os << '\n';
  }
}

}  // namespace ergotorus
