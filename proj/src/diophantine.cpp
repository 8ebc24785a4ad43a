#include "ergotorus/diophantine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "ergotorus/parallel.hpp"
#include "ergotorus/rng.hpp"
#include "ergotorus/walk.hpp"

namespace ergotorus {

namespace {

/// |t| reduced to the nearest integer, i.e. distance of t to Z.
inline double circle_abs(double t) noexcept { return std::abs(t - std::nearbyint(t)); }

Rational round_to_grid(const TorusPoint& x, std::size_t i, std::int64_t q) {
  if (x.is_exact()) {
    // floor(x·q + 1/2) computed exactly.
    Rational scaled = x.exact()[i] * Rational(q) + Rational(1, 2);
    return Rational(scaled.floor(), q);
  }
  return Rational(static_cast<std::int64_t>(std::nearbyint(x[i] * double(q))), q);
}

}  // namespace

std::vector<RationalApprox> best_rational_approx(const TorusPoint& x,
                                                 std::int64_t Qmax, Metric m) {
  if (Qmax < 1) throw Error(ErrorCode::kInvalidArgument, "Qmax must be >= 1");
  std::vector<RationalApprox> out;
  out.reserve(static_cast<std::size_t>(Qmax));
  for (std::int64_t q = 1; q <= Qmax; ++q) {
    std::vector<Rational> p(x.dim(), Rational(0));
    for (std::size_t i = 0; i < x.dim(); ++i) p[i] = round_to_grid(x, i, q);
    RationalApprox r;
    r.p_over_q = TorusPoint::from_rationals(std::move(p));
    r.q = r.p_over_q.denominator();
    r.q_scan = q;
    r.dist = torus_distance(x, r.p_over_q, m);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------

PhiSpec PhiSpec::power(double M) {
  if (!(M > 0.0)) throw Error(ErrorCode::kInvalidArgument, "phi exponent M must be > 0");
  PhiSpec p;
  p.family_ = Family::kPower;
  p.M_ = M;
  return p;
}

PhiSpec PhiSpec::stretched_exp(double B, double beta) {
  if (!(B > 0.0) || !(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "phi needs B > 0 and beta in (0,1)");
  }
  PhiSpec p;
  p.family_ = Family::kStretchedExp;
  p.B_ = B;
  p.beta_ = beta;
  return p;
}

double PhiSpec::log_value(double q) const noexcept {
  return family_ == Family::kPower ? M_ * std::log(q) : B_ * std::pow(q, beta_);
}

double PhiSpec::inverse(double y) const {
  double ly = std::log(y);
  if (ly < log_value(1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "phi inverse below phi(1)");
  }
  return family_ == Family::kPower ? std::exp(ly / M_) : std::pow(ly / B_, 1.0 / beta_);
}

double h_phi(const TorusPoint& x, const PhiSpec& phi, std::int64_t Qmax, Metric m) {
  double best = 0.0;
  for (const RationalApprox& r : best_rational_approx(x, Qmax, m)) {
    if (r.dist == 0.0) return kInfinity;
    best = std::max(best, std::exp(-phi.log_value(double(r.q))) / r.dist);
  }
  return best;
}

std::vector<TorusPoint> primitive_points(std::int64_t Q, std::size_t d) {
  if (Q < 1) throw Error(ErrorCode::kInvalidArgument, "Q must be >= 1");
  std::vector<TorusPoint> out;
  std::vector<std::int64_t> p(d, 0);
  while (true) {
    std::int64_t g = Q;
    for (std::int64_t c : p) g = std::gcd(g, c);
    if (g == 1) {
      std::vector<Rational> r;
      r.reserve(d);
      for (std::int64_t c : p) r.emplace_back(c, Q);
      out.push_back(TorusPoint::from_rationals(std::move(r)));
    }
    std::size_t i = d;
    while (i > 0 && ++p[i - 1] == Q) p[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

double u_delta(std::span<const double> x, double delta, Metric m) noexcept {
  double r = distance_to_origin(x, m);
  return r == 0.0 ? kInfinity : std::pow(r, -delta);
}

double u_delta(const TorusPoint& x, double delta, Metric m) {
  if (!(delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be > 0");
  if (x.is_exact() &&
      std::all_of(x.exact().begin(), x.exact().end(),
                  [](const Rational& r) { return r.is_zero(); })) {
    return kInfinity;
  }
  return u_delta(x.coords(), delta, m);
}

// ---------------------------------------------------------------------------

UPhi::UPhi(const DriftSpec& spec, std::size_t d) : spec_(spec), d_(d) {
  if (!(spec.delta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta must be > 0");
  if (spec.Qmax < 1) throw Error(ErrorCode::kInvalidArgument, "Qmax must be >= 1");
  level_weight_.assign(spec.Qmax + 1, 0.0);
  mask_.resize(spec.Qmax + 1);
  for (std::int64_t Q = 1; Q <= spec.Qmax; ++Q) {
    level_weight_[Q] = std::exp(-spec.delta * spec.phi.log_value(double(Q)));
    if (d_ == 2) {
      auto& mk = mask_[Q];
      mk.resize(Q * Q);
      for (std::int64_t a = 0; a < Q; ++a)
        for (std::int64_t b = 0; b < Q; ++b)
          mk[a * Q + b] = std::gcd(std::gcd(Q, a), b) == 1;
    }
  }
}

double UPhi::level_sum(std::span<const double> x, std::int64_t Q) const {
  const double delta = spec_.delta;
  if (d_ == 2 && spec_.metric == Metric::kSup) {
    // u_δ(x-p) = min_i |x_i - p_i/Q|^{-δ} for the sup norm.
    thread_local std::vector<double> t0, t1;
    t0.resize(Q);
    t1.resize(Q);
    for (std::int64_t k = 0; k < Q; ++k) {
      double kq = double(k) / double(Q);
      double a = circle_abs(x[0] - kq), b = circle_abs(x[1] - kq);
      t0[k] = a == 0.0 ? kInfinity : std::pow(a, -delta);
      t1[k] = b == 0.0 ? kInfinity : std::pow(b, -delta);
    }
    const auto& mk = mask_[Q];
    double s = 0.0;
    for (std::int64_t a = 0; a < Q; ++a) {
      const std::uint8_t* row = mk.data() + a * Q;
      const double ta = t0[a];
      for (std::int64_t b = 0; b < Q; ++b) {
        if (row[b]) s += std::min(ta, t1[b]);
      }
    }
    return s;
  }
  std::vector<std::int64_t> p(d_, 0);
  std::vector<double> diff(d_);
  double s = 0.0;
  while (true) {
    std::int64_t g = Q;
    for (std::int64_t c : p) g = std::gcd(g, c);
    if (g == 1) {
      for (std::size_t i = 0; i < d_; ++i)
        diff[i] = wrap_unit(x[i] - double(p[i]) / double(Q));
      s += u_delta(diff, delta, spec_.metric);
    }
    std::size_t i = d_;
    while (i > 0 && ++p[i - 1] == Q) p[--i] = 0;
    if (i == 0) break;
  }
  return s;
}

double UPhi::operator()(std::span<const double> x) const {
  require_same_dim(d_, x.size(), "u_phi");
  double s = 1.0;
  for (std::int64_t Q = 1; Q <= spec_.Qmax; ++Q) {
    s += level_weight_[Q] * level_sum(x, Q);
  }
  return s;
}

double UPhi::operator()(const TorusPoint& x) const {
  if (x.is_exact() && x.denominator() <= spec_.Qmax) return kInfinity;
  return (*this)(x.coords());
}

// ---------------------------------------------------------------------------

DriftFit drift_fit(const GeneratorMeasure& rho,
                   const std::function<double(std::span<const double>)>& u,
                   const std::vector<TorusPoint>& sample, int n_iter,
                   std::uint64_t max_atoms) {
  if (sample.empty()) throw Error(ErrorCode::kInvalidArgument, "drift_fit: empty sample");
  if (n_iter < 1) throw Error(ErrorCode::kInvalidArgument, "drift_fit: n_iter >= 1");
  if (word_count(rho.size(), n_iter) > max_atoms) {
    throw Error(ErrorCode::kBudgetExceeded,
                "drift_fit: support^n_iter exceeds the enumeration budget");
  }
  const std::size_t n = sample.size();
  DriftFit fit;
  fit.u.resize(n);
  fit.pu.resize(n);
  WordTree tree(rho);
  parallel_for(n, [&](std::size_t i) {
    double ui = u(sample[i].coords());
    if (!std::isfinite(ui)) {
      throw Error(ErrorCode::kInvalidArgument, "drift_fit: u is infinite on the sample");
    }
    double acc = 0.0;
    tree.walk(sample[i].coords(), n_iter,
              [&](int level, std::span<const double> p, double w) {
                if (level == n_iter) acc += w * u(p);
              });
    fit.u[i] = ui;
    fit.pu[i] = acc;
  });

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fit.u[a] < fit.u[b]; });
  std::size_t held = static_cast<std::size_t>(std::ceil(0.01 * double(n)));
  if (held >= n) held = 0;
  std::vector<std::size_t> core(order.begin(), order.end() - held);
  fit.core_size = core.size();

  std::vector<double> cu;
  for (std::size_t i : core) cu.push_back(fit.u[i]);
  std::nth_element(cu.begin(), cu.begin() + cu.size() / 2, cu.end());
  double median = cu[cu.size() / 2];
  if (cu.size() % 2 == 0 && cu.size() > 1) {
    double lower = *std::max_element(cu.begin(), cu.begin() + cu.size() / 2);
    median = 0.5 * (median + lower);
  }

  double a_hat = 0.0;
  for (std::size_t i : core) {
    if (fit.u[i] > median) {
      ++fit.near_size;
      a_hat = std::max(a_hat, fit.pu[i] / fit.u[i]);
    }
  }
  double b_hat = 0.0;
  for (std::size_t i : core) b_hat = std::max(b_hat, fit.pu[i] - a_hat * fit.u[i]);
  fit.a_hat = a_hat;
  fit.b_hat = b_hat;
  for (std::size_t i = 0; i < n; ++i) {
    double rhs = a_hat * fit.u[i] + b_hat;
    if (fit.pu[i] > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) ++fit.violations;
  }
  return fit;
}

std::vector<TorusPoint> sample_near_origin(std::size_t d, std::size_t n, double rmin,
                                           double rmax, Metric m, std::uint64_t seed) {
  if (!(rmin > 0.0 && rmax >= rmin)) {
    throw Error(ErrorCode::kInvalidArgument, "sample_near_origin: need 0 < rmin <= rmax");
  }
  std::vector<TorusPoint> out;
  out.reserve(n);
  const double span = std::log(rmax / rmin);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream s(seed, RngPurpose::kSample, i);
    double r = rmin * std::exp(span * s.uniform(0));
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      v[j] = s.normal(1 + j);
      norm = m == Metric::kSup ? std::max(norm, std::abs(v[j])) : norm + v[j] * v[j];
    }
    if (m == Metric::kEuclidean) norm = std::sqrt(norm);
    for (double& c : v) c = c * r / norm;
    out.emplace_back(v);
  }
  return out;
}

std::vector<TorusPoint> sample_uniform(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::vector<TorusPoint> out;
  out.reserve(n);
  std::vector<double> v(d);
  for (std::size_t i = 0; i < n; ++i) {
    CounterStream s(seed, RngPurpose::kSample, i);
    for (std::size_t j = 0; j < d; ++j) v[j] = s.uniform(j);
    out.emplace_back(v);
  }
  return out;
}

LyapunovEstimate lyapunov_estimate(const GeneratorMeasure& rho, int n,
                                   std::size_t trials, std::uint64_t seed) {
  if (n < 1 || trials < 1) {
    throw Error(ErrorCode::kInvalidArgument, "lyapunov_estimate: n, trials >= 1");
  }
  const std::size_t d = rho.dim();
  std::vector<double> mats;
  for (const Atom& a : rho.atoms())
    for (std::int64_t e : a.matrix.entries()) mats.push_back(double(e));

  std::vector<double> per_trial(trials);
  parallel_for(trials, [&](std::size_t t) {
    CounterStream start(seed, RngPurpose::kStartVector, t);
    CounterStream walk(seed, RngPurpose::kWalk, t);
    std::vector<double> v(d), w(d);
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      v[j] = start.normal(j);
      norm += v[j] * v[j];
    }
    norm = std::sqrt(norm);
    for (double& c : v) c /= norm;
    double log_sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const double* g = mats.data() + rho.pick(walk.bits(k)) * d * d;
      double nn = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += g[i * d + j] * v[j];
        w[i] = s;
        nn += s * s;
      }
      nn = std::sqrt(nn);
      log_sum += std::log(nn);
      for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / nn;
    }
    per_trial[t] = log_sum / n;
  });

  double mean = 0.0;
  for (double x : per_trial) mean += x;
  mean /= double(trials);
  double var = 0.0;
  for (double x : per_trial) var += (x - mean) * (x - mean);
  LyapunovEstimate est;
  est.lambda1 = mean;
  est.std_error = trials > 1 ? std::sqrt(var / double(trials - 1) / double(trials)) : 0.0;
  return est;
}

// ---------------------------------------------------------------------------

DiophantineCheck diophantine_check(const TorusPoint& x, double B, double beta,
                                   std::int64_t Qmax, std::int64_t q_min, Metric m,
                                   std::size_t max_solutions) {
  if (!(B > 0.0) || !(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "diophantine_check: B > 0, beta in (0,1)");
  }
  if (Qmax < 1) throw Error(ErrorCode::kInvalidArgument, "Qmax must be >= 1");
  const std::size_t d = x.dim();
  DiophantineCheck out;
  out.pass = true;
  std::vector<std::int64_t> lo(d), cnt(d), p(d);

  for (std::int64_t q = 1; q <= Qmax; ++q) {
    if (out.truncated && !out.pass) break;
    const double thr = std::exp(-B * std::pow(double(q), beta));
    bool any = true;
    for (std::size_t i = 0; i < d; ++i) {
      double a = std::ceil(double(q) * (x[i] - thr) - 1e-9);
      double b = std::floor(double(q) * (x[i] + thr) + 1e-9);
      lo[i] = static_cast<std::int64_t>(a);
      cnt[i] = std::min<std::int64_t>(static_cast<std::int64_t>(b - a) + 1, q);
      if (cnt[i] <= 0) any = false;
    }
    if (!any) continue;
    std::vector<std::int64_t> off(d, 0);
    while (true) {
      std::int64_t g = q;
      for (std::size_t i = 0; i < d; ++i) {
        p[i] = ((lo[i] + off[i]) % q + q) % q;
        g = std::gcd(g, p[i]);
      }
      if (g == 1) {
        std::vector<Rational> r;
        for (std::size_t i = 0; i < d; ++i) r.emplace_back(p[i], q);
        TorusPoint pq = TorusPoint::from_rationals(std::move(r));
        double dist = torus_distance(x, pq, m);
        if (dist <= thr) {
          if (q >= q_min) out.pass = false;
          if (out.solutions.size() < max_solutions) {
            out.solutions.push_back({std::move(pq), q, q, dist});
          } else {
            out.truncated = true;
            if (!out.pass) break;
          }
        }
      }
      std::size_t i = d;
      while (i > 0 && ++off[i - 1] == cnt[i - 1]) off[--i] = 0;
      if (i == 0) break;
    }
  }
  return out;
}

void write_diophantine_csv(std::ostream& os, const std::vector<RationalApprox>& table,
                           const PhiSpec& phi) {
  if (table.empty()) return;
  const std::size_t d = table.front().p_over_q.dim();
  os << "q";
  for (std::size_t i = 1; i <= d; ++i) os << ",p_" << i;
  os << ",dist,phi_q,height_term\n";
  char buf[64];
  for (const RationalApprox& r : table) {
    os << r.q;
    for (const Rational& c : r.p_over_q.exact()) os << ',' << (c * Rational(r.q)).num();
    double lphi = phi.log_value(double(r.q));
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", r.dist, std::exp(lphi));
    os << buf;
    if (r.dist == 0.0) {
      os << "inf\n";
    } else {
      std::snprintf(buf, sizeof buf, "%.17g\n", std::exp(-lphi) / r.dist);
      os << buf;
    }
  }
}

}  // namespace ergotorus
