#include "ergotorus/limit_theorems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergotorus/parallel.hpp"

namespace ergotorus {

MartingaleDecomposition martingale_decompose(const GeneratorMeasure& rho, const Evaluator& g,
                                             const Trajectory& traj) {
  if (traj.points.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  MartingaleDecomposition out;
  const std::size_t n = traj.points.size() - 1;
  out.increments.resize(n);
  out.pg.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.pg[k] = transfer_once(rho, g, traj.points[k].coords());
    out.increments[k] = g(traj.points[k + 1].coords()) - out.pg[k];
  }
  out.boundary = g(traj.points.front().coords()) - g(traj.points.back().coords());
  return out;
}

LlnResult lln_check(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                    std::size_t n, std::size_t trials, std::uint64_t seed) {
  if (n < 1 || trials < 1) throw Error(ErrorCode::kInvalidArgument, "n and trials must be >= 1");
  require_same_dim(rho.dim(), x.dim(), "lln_check");
  LlnResult out;
  if (x.is_exact()) {
    out.target = rational_orbit(rho, x, std::size_t{1} << 20).mean(f);
    out.target_method = "rational_orbit";
  } else {
    MeanEstimate m = mean_lebesgue(f);
    out.target = m.value;
    out.target_method = m.exact ? "lebesgue" : "lebesgue_grid";
  }
  std::vector<double> means(trials);
  parallel_for(trials, [&](std::size_t t) {
    double s = 0.0;
    if (x.is_exact()) {
      Trajectory tr = simulate_trajectory(rho, x, n - 1, seed, t);
      for (const TorusPoint& p : tr.points) s += f(p);
    } else {
      Walker w(rho, x.coords(), seed, t);
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) w.advance();
        s += f(w.position());
      }
    }
    means[t] = s / double(n);
  });
  double m = 0.0, m2 = 0.0;
  for (double v : means) {
    m += v;
    m2 += v * v;
  }
  m /= double(trials);
  out.birkhoff_mean = m;
  out.gap = m - out.target;
  out.std_error = trials > 1
                      ? std::sqrt(std::max(0.0, m2 / double(trials) - m * m) / double(trials - 1))
                      : 0.0;
  return out;
}

double ks_normal(std::vector<double> samples, double var) {
  if (samples.empty()) return 0.0;
  std::sort(samples.begin(), samples.end());
  const double N = double(samples.size());
  const double sd = std::sqrt(std::max(var, 0.0));
  // F(v) and F(v-) differ only for the point mass.
  auto cdf = [&](double v, bool left) {
    if (sd == 0.0) return left ? (v > 0.0 ? 1.0 : 0.0) : (v >= 0.0 ? 1.0 : 0.0);
    return 0.5 * std::erfc(-v / (sd * std::sqrt(2.0)));
  };
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    d = std::max({d, std::abs(double(i) / N - cdf(samples[i], true)),
                  std::abs(double(j) / N - cdf(samples[i], false))});
    i = j;
  }
  return std::clamp(d, 0.0, 1.0);
}

CltReport clt_experiment(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                         std::size_t n, std::size_t trials, double sigma2_ref,
                         std::uint64_t seed, double mean) {
  if (sigma2_ref < 0.0) throw Error(ErrorCode::kInvalidArgument, "sigma2_ref must be >= 0");
  if (trials < 100) throw Error(ErrorCode::kInvalidArgument, "clt_experiment needs >= 100 trials");
  require_same_dim(rho.dim(), x.dim(), "clt_experiment");
  CltReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.seed = seed;
  rep.sigma2_ref = sigma2_ref;
  rep.normalized_samples.resize(trials);
  const double scale = 1.0 / std::sqrt(double(n));
  parallel_for(trials, [&](std::size_t t) {
    Walker w(rho, x.coords(), seed, t);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) w.advance();
      s += f(w.position()) - mean;
    }
    rep.normalized_samples[t] = s * scale;
  });
  double m = 0.0, m2 = 0.0;
  std::size_t within = 0;
  for (double v : rep.normalized_samples) {
    m += v;
    m2 += v * v;
    if (std::abs(v) <= 0.05) ++within;
  }
  rep.mean_hat = m / double(trials);
  rep.var_hat = (m2 - double(trials) * rep.mean_hat * rep.mean_hat) / double(trials - 1);
  rep.mass_within_005 = double(within) / double(trials);
  rep.ks_stat = ks_normal(rep.normalized_samples, sigma2_ref);
  rep.ks_stat_var_hat = ks_normal(rep.normalized_samples, rep.var_hat);
  return rep;
}

std::vector<std::uint64_t> lil_checkpoints(std::uint64_t n_max) {
  std::vector<std::uint64_t> out;
  for (int j = 0;; ++j) {
    auto c = static_cast<std::uint64_t>(std::ceil(100.0 * std::pow(1.5, j) - 1e-9));
    if (c > n_max) break;
    if (out.empty() || c != out.back()) out.push_back(c);
  }
  return out;
}

LilReport lil_envelope(const GeneratorMeasure& rho, const TestFunction& f, const TorusPoint& x,
                       std::uint64_t n_max, std::size_t trials, double sigma2_ref,
                       std::uint64_t seed, double mean) {
  if (!(sigma2_ref > 0.0)) {
    throw Error(ErrorCode::kDegenerate,
                "sigma2 = 0: the normalized statistic is undefined; use bounded_sum_verify "
                "for the degenerate case");
  }
  if (n_max < 100) throw Error(ErrorCode::kInvalidArgument, "n_max must be >= 100");
  require_same_dim(rho.dim(), x.dim(), "lil_envelope");
  LilReport rep;
  rep.checkpoints = lil_checkpoints(n_max);
  const std::size_t J = rep.checkpoints.size();
  rep.values.assign(trials, std::vector<double>(J));
  rep.trajectory_ids.resize(trials);
  parallel_for(trials, [&](std::size_t t) {
    rep.trajectory_ids[t] = t;
    Walker w(rho, x.coords(), seed, t);
    double s = 0.0;
    std::size_t j = 0;
    for (std::uint64_t k = 0; k < rep.checkpoints.back(); ++k) {
      if (k > 0) w.advance();
      s += f(w.position()) - mean;
      const std::uint64_t n = k + 1;
      if (n == rep.checkpoints[j]) {
        double nn = double(n);
        rep.values[t][j++] = s / std::sqrt(2.0 * nn * sigma2_ref * std::log(std::log(nn)));
      }
    }
  });
  const double inf = std::numeric_limits<double>::infinity();
  rep.envelope_max.assign(J, -inf);
  rep.envelope_min.assign(J, inf);
  rep.overall_max = -inf;
  rep.overall_min = inf;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto& v = rep.values[t];
    rep.per_trajectory_max.push_back(*std::max_element(v.begin(), v.end()));
    rep.per_trajectory_min.push_back(*std::min_element(v.begin(), v.end()));
    for (std::size_t j = 0; j < J; ++j) {
      rep.envelope_max[j] = std::max(rep.envelope_max[j], v[j]);
      rep.envelope_min[j] = std::min(rep.envelope_min[j], v[j]);
    }
    rep.overall_max = std::max(rep.overall_max, rep.per_trajectory_max.back());
    rep.overall_min = std::min(rep.overall_min, rep.per_trajectory_min.back());
  }
  rep.terminal_max = rep.envelope_max.back();
  rep.terminal_min = rep.envelope_min.back();
  return rep;
}

LindebergReport lindeberg_check(const GeneratorMeasure& rho, const Evaluator& g,
                                const TorusPoint& x, const std::vector<std::size_t>& n_list,
                                double eps, std::size_t trials, std::uint64_t seed,
                                std::optional<double> g_sup) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  LindebergReport rep;
  if (g_sup) {
    // |M_k| ≤ 2 sup|g| < ε√n once n exceeds (2 sup|g|/ε)².
    double r = 2.0 * *g_sup / eps;
    rep.cutoff_n = static_cast<std::uint64_t>(std::floor(r * r)) + 1;
  }
  for (std::size_t n : n_list) {
    LindebergPoint pt;
    pt.n = n;
    if (rep.cutoff_n && n >= *rep.cutoff_n) {
      rep.points.push_back(pt);
      continue;
    }
    const double thr = eps * std::sqrt(double(n));
    std::vector<double> per(trials);
    parallel_for(trials, [&](std::size_t t) {
      Walker w(rho, x.coords(), seed, t);
      double s = 0.0;
      std::vector<double> prev(w.position().begin(), w.position().end());
      for (std::size_t k = 0; k < n; ++k) {
        double pg = transfer_once(rho, g, prev);
        w.advance();
        double m = g(w.position()) - pg;
        if (std::abs(m) >= thr) s += m * m;
        prev.assign(w.position().begin(), w.position().end());
      }
      per[t] = s / double(n);
    });
    double m = 0.0, m2 = 0.0;
    for (double v : per) {
      m += v;
      m2 += v * v;
    }
    m /= double(trials);
    pt.estimate = m;
    pt.std_error =
        trials > 1 ? std::sqrt(std::max(0.0, m2 / double(trials) - m * m) / double(trials - 1)) : 0.0;
    rep.points.push_back(pt);
  }
  return rep;
}

std::vector<FourthMomentRow> fourth_moment_scan(const GeneratorMeasure& rho,
                                                const TestFunction& f, const TorusPoint& x,
                                                const std::vector<std::size_t>& n_list,
                                                std::size_t trials, std::uint64_t seed,
                                                double mean, bool iid_control) {
  if (n_list.empty()) return {};
  std::vector<std::size_t> ns = n_list;
  std::sort(ns.begin(), ns.end());
  const std::size_t n_max = ns.back();
  const std::size_t d = x.dim();
  std::vector<std::vector<double>> sums(trials, std::vector<double>(ns.size()));
  parallel_for(trials, [&](std::size_t t) {
    double s = 0.0;
    std::size_t j = 0;
    if (iid_control) {
      CounterStream stream(seed, RngPurpose::kControl, t);
      std::vector<double> u(d);
      for (std::size_t k = 0; k < n_max; ++k) {
        for (std::size_t i = 0; i < d; ++i) u[i] = stream.uniform(k * d + i);
        s += f(u) - mean;
        while (j < ns.size() && ns[j] == k + 1) sums[t][j++] = s;
      }
    } else {
      Walker w(rho, x.coords(), seed, t);
      for (std::size_t k = 0; k < n_max; ++k) {
        if (k > 0) w.advance();
        s += f(w.position()) - mean;
        while (j < ns.size() && ns[j] == k + 1) sums[t][j++] = s;
      }
    }
  });
  std::vector<FourthMomentRow> rows;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    FourthMomentRow r;
    r.n = ns[j];
    for (std::size_t t = 0; t < trials; ++t) {
      double s2 = sums[t][j] * sums[t][j];
      r.m2 += s2;
      r.m4 += s2 * s2;
    }
    r.m2 /= double(trials);
    r.m4 /= double(trials);
    r.kurtosis_ratio = r.m2 > 0.0 ? r.m4 / (3.0 * r.m2 * r.m2) : 0.0;
    double n = double(r.n);
    r.m4_over_n2 = r.m4 / (n * n);
    r.m4_over_n3 = r.m4 / (n * n * n);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ergotorus
