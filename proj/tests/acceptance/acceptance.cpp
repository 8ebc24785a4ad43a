// Acceptance suite: one PASS/FAIL line per criterion. Seeds, sizes and
// tolerances are fixed here so that reruns are bit-for-bit reproducible.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ergotorus/degeneracy.hpp"
#include "ergotorus/diophantine.hpp"
#include "ergotorus/limit_theorems.hpp"
#include "ergotorus/parallel.hpp"
#include "ergotorus/poisson.hpp"
#include "ergotorus/spectral.hpp"

using namespace ergotorus;

namespace {

// Pinned seeds.
constexpr std::uint64_t kSeedOracle = 0xC1;
constexpr std::uint64_t kSeedDegenerate = 0xC2;
constexpr std::uint64_t kSeedVariance = 0xC3;
constexpr std::uint64_t kSeedClt = 0xC4;
constexpr std::uint64_t kSeedLil = 0xC5;
constexpr std::uint64_t kSeedFourier = 0xC6;
constexpr std::uint64_t kSeedDrift = 0xC7;
constexpr std::uint64_t kSeedLyapunov = 0xC9;
constexpr std::uint64_t kSeedAbel = 0xCA;

// Pinned tolerances.
constexpr double kOracleSigmas = 4.0;
constexpr double kIdentityTol = 1e-9;
constexpr double kVarianceAgreement = 3.0;
constexpr double kKsThreshold = 0.05;
constexpr double kLilLo = 0.6, kLilHi = 1.4;
constexpr double kFourierDecay = 0.05;
constexpr double kRationalFloor = 0.5;
constexpr double kMeanTol = 1e-12;
constexpr double kLyapunovA = 1e-3;
constexpr double kLyapunovB = 1e-6;
constexpr double kLyapunovSigmas = 3.0;

struct Walks {
  LatticeMatrix A{2, {2, 1, 1, 1}};
  LatticeMatrix B{2, {0, 1, -1, 0}};
  LatticeMatrix C{2, {1, 1, 1, 2}};
  // ½δ_A + ½δ_{BA}: B conjugates A to its inverse, so the walk is degenerate.
  GeneratorMeasure twisted{{{A, Rational(1, 2)}, {B * A, Rational(1, 2)}}};
  // A Zariski-dense pair used wherever a nondegenerate walk is required.
  GeneratorMeasure ac{{{A, Rational(1, 2)}, {C, Rational(1, 2)}}};
  TorusPoint x{std::vector<double>{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0}};
  TestFunction f = TestFunction::cosine({1, 0});
};

int failures = 0;

void report(int id, const char* title, bool pass, double seconds, double limit,
            const std::string& detail) {
  bool ok = pass && seconds < limit;
  if (!ok) ++failures;
  std::printf("%s criterion %d: %s | %s | runtime %.1fs (limit %.0fs)\n", ok ? "PASS" : "FAIL",
              id, title, detail.c_str(), seconds, limit);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string fmtn(const char* f, T... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void criterion1(const Walks& w) {
  Timer t;
  constexpr int kN = 10;
  constexpr std::size_t kTrials = 100000;
  std::vector<TestFunction> dict{
      TestFunction::cosine({1, 0}),
      TestFunction::cosine({1, 1}),
      TestFunction::cosine({2, -1}, 0.5),
      TestFunction::dist_to_point(TorusPoint::origin(2), Metric::kEuclidean),
      TestFunction::dist_to_point(TorusPoint(std::vector<double>{0.3, 0.7}), Metric::kSup)};
  const std::size_t F = dict.size();
  // sums[t][n*F + j] = f_j(X_n) on trial t.
  std::vector<std::vector<double>> vals(kTrials, std::vector<double>((kN + 1) * F));
  parallel_for(kTrials, [&](std::size_t tr) {
    Walker wk(w.twisted, w.x.coords(), kSeedOracle, tr);
    for (int n = 0; n <= kN; ++n) {
      if (n > 0) wk.advance();
      for (std::size_t j = 0; j < F; ++j) vals[tr][n * F + j] = dict[j](wk.position());
    }
  });
  double worst = 0.0;
  bool pass = true;
  for (int n = 1; n <= kN; ++n) {
    AtomicDistribution dist = word_distribution_exact(w.twisted, w.x, n, UINT64_MAX);
    for (std::size_t j = 0; j < F; ++j) {
      double m = 0.0, m2 = 0.0;
      for (const auto& v : vals) {
        m += v[n * F + j];
        m2 += v[n * F + j] * v[n * F + j];
      }
      m /= double(kTrials);
      double se = std::sqrt(std::max(0.0, m2 / double(kTrials) - m * m) / double(kTrials));
      double diff = std::abs(m - dist.expect(dict[j]));
      double z = se > 0 ? diff / se : (diff <= 1e-12 ? 0.0 : INFINITY);
      worst = std::max(worst, z);
      pass &= z <= kOracleSigmas;
    }
  }
  report(1, "Monte Carlo vs exact word distribution (twisted measure, n<=10, 5 functions)", pass,
         t.seconds(), 60, fmtn("max |MC - exact|/se = %.3f (tol %.1f)", worst, kOracleSigmas));
}

void criterion2(const Walks& w) {
  Timer t;
  DegenerateExample ex = degenerate_example();
  double res = 0.0, sum = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    BoundedSumResult b = bounded_sum_verify(ex.rho, ex.g, ex.f, w.x, 100000, kSeedDegenerate + s);
    res = std::max(res, b.identity_residual);
    sum = std::max(sum, b.max_abs_partial_sum);
  }
  VarianceReport v = variance_along_walk(ex.rho, ex.g, w.x, 100000, kSeedDegenerate);
  double term = 0.0;
  for (double x : v.terms) term = std::max(term, std::abs(x));
  bool pass = res <= kIdentityTol && sum <= std::sqrt(2.0) && term <= kIdentityTol;
  report(2, "degenerate example: bounded sums and null variance terms", pass, t.seconds(), 10,
         fmtn("identity_residual %.3g, max|S_n| %.4f (<= sqrt2), max variance term %.3g", res,
              sum, term));
}

double criterion3(const Walks& w) {
  Timer t;
  VarianceReport s = variance_series(w.ac, w.f, 12);
  TruncatedPoisson tp = truncated_poisson(w.ac, w.f, 10);
  VarianceReport a = variance_along_walk(w.ac, tp, w.x, 100000, kSeedVariance);
  double combined = std::hypot(s.uncertainty, a.uncertainty);
  double diff = std::abs(s.sigma2 - a.sigma2);
  bool pass = std::isfinite(combined) && diff <= kVarianceAgreement * combined;
  report(3, "variance: exact series vs along-walk estimate", pass, t.seconds(), 120,
         fmtn("series %.6f +- %.3g, walk %.6f +- %.3g (raw %.6f), |diff| %.4g <= %.4g", s.sigma2,
              s.uncertainty, a.sigma2, a.uncertainty, a.raw_average, diff,
              kVarianceAgreement * combined));
  return s.sigma2;
}

void criterion4(const Walks& w, double sigma2) {
  Timer t;
  CltReport r = clt_experiment(w.ac, w.f, w.x, 10000, 2000, sigma2, kSeedClt, 0.0);
  report(4, "CLT: KS distance to Normal(0, sigma2)", r.ks_stat < kKsThreshold, t.seconds(), 300,
         fmtn("ks %.4f < %.2f; var_hat %.4f vs sigma2 %.4f; ks vs var_hat %.4f", r.ks_stat,
              kKsThreshold, r.var_hat, sigma2, r.ks_stat_var_hat));
}

void criterion5(const Walks& w, double sigma2) {
  Timer t;
  LilReport r = lil_envelope(w.ac, w.f, w.x, 1000000, 200, sigma2, kSeedLil, 0.0);
  bool pass = r.terminal_max >= kLilLo && r.terminal_max <= kLilHi;
  report(5, "LIL window at n_max (windowed proxy for limsup = 1)", pass, t.seconds(), 900,
         fmtn("max over 200 walks at n=%llu: %.4f in [%.1f, %.1f]; min %.4f; max over all "
              "checkpoints %.4f",
              static_cast<unsigned long long>(r.checkpoints.back()), r.terminal_max, kLilLo,
              kLilHi, r.terminal_min, r.overall_max));
}

void criterion6(const Walks& w) {
  Timer t;
  std::vector<Frequency> box = frequency_box(2, 3);
  auto ex = walk_fourier_exact(w.ac, w.x, 20, box);
  auto mc = walk_fourier_mc(w.ac, w.x, 30, box, std::size_t{1} << 18, kSeedFourier);
  auto maxmod = [](const std::vector<Complex>& row) {
    double m = 0.0;
    for (const Complex& c : row) m = std::max(m, std::abs(c));
    return m;
  };
  double at20 = maxmod(ex[20]), at30 = maxmod(mc[30]);
  TorusPoint half = TorusPoint::from_rationals({Rational(1, 2), Rational(1, 2)});
  auto rat = walk_fourier_exact(w.ac, half, 20, box);
  double floor_peak = 1.0;
  for (const auto& row : rat) floor_peak = std::min(floor_peak, maxmod(row));
  bool pass = at30 < kFourierDecay && floor_peak >= kRationalFloor;
  report(6, "Fourier dichotomy: decay at diophantine x, no decay at (1/2,1/2)", pass, t.seconds(),
         60,
         fmtn("max|hat| n=20 exact %.4f, n=30 MC %.4f (< %.2f); rational min over n<=20 %.4f "
              "(>= %.1f)",
              at20, at30, kFourierDecay, floor_peak, kRationalFloor));
}

void criterion7(const Walks& w) {
  Timer t;
  std::vector<TorusPoint> sample = sample_near_origin(2, 500, 1e-4, 0.5, Metric::kSup, kSeedDrift);
  DriftFit fd = drift_fit(
      w.ac, [](std::span<const double> y) { return u_delta(y, 0.3, Metric::kSup); }, sample, 8);
  DriftSpec spec;
  spec.delta = 0.3;
  spec.phi = PhiSpec::stretched_exp(1.0, 0.2);
  spec.Qmax = 50;
  spec.metric = Metric::kSup;
  UPhi uphi(spec, 2);
  DriftFit fp = drift_fit(w.ac, [&](std::span<const double> y) { return uphi(y); }, sample, 8);
  auto [lo, hi] = std::minmax_element(fp.u.begin(), fp.u.end());
  bool pass = fd.a_hat < 1.0 && fd.violations == 0 && fp.a_hat < 1.0 && fp.violations == 0;
  report(7, "drift inequalities P^8 u <= a u + b for u_delta and u_phi", pass, t.seconds(), 300,
         fmtn("u_delta: a %.4f b %.4f viol %zu; u_phi: a %.4f b %.4f viol %zu, u_phi in "
              "[%.1f, %.1f] on the sample",
              fd.a_hat, fd.b_hat, fd.violations, fp.a_hat, fp.b_hat, fp.violations, *lo, *hi));
}

void criterion8() {
  Timer t;
  constexpr int kGrid = 1024;
  const std::vector<int> ms{4, 8, 16, 32, 64};
  bool pass = true;
  std::string detail;
  double worst_mean = 0.0;
  for (double gamma : {0.5, 1.0}) {
    TestFunction f = TestFunction::callback(
        2,
        [gamma](std::span<const double> x) {
          return std::pow(std::abs(std::cos(2.0 * std::numbers::pi * x[0])), gamma);
        },
        gamma);
    GridFunction g = GridFunction::sample(f, kGrid);
    std::vector<double> lx, ly;
    for (int m : ms) {
      GridFunction s = smooth_on_grid(g, m);
      worst_mean = std::max(worst_mean, std::abs(s.mean() - g.mean()));
      lx.push_back(std::log(double(m)));
      ly.push_back(std::log(g.sup_distance(s)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= double(lx.size());
    my /= double(ly.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    double order = -sxy / sxx;
    pass &= order >= 0.5 * gamma && order <= 1.5 * gamma;
    detail += fmtn("gamma %.1f: order %.3f in [%.2f, %.2f]; ", gamma, order, 0.5 * gamma,
                   1.5 * gamma);
  }
  // Trig polynomial input: the zero coefficient is untouched.
  CoeffMap c{{Frequency{0, 0}, Complex(0.3)},
             {Frequency{3, 1}, Complex(0.2, 0.1)},
             {Frequency{-3, -1}, Complex(0.2, -0.1)}};
  TestFunction p = TestFunction::trig_poly(c);
  TestFunction ps = smooth_approx(p, 2);
  double trig_mean_err = std::abs(mean_lebesgue(ps).value - 0.3);
  worst_mean = std::max(worst_mean, trig_mean_err);
  pass &= worst_mean <= kMeanTol;
  detail += fmt("mean drift %.3g (tol 1e-12)", worst_mean);
  report(8, "Jackson kernel approximation order and mean preservation", pass, t.seconds(), 60,
         detail);
}

void criterion9(const Walks& w) {
  Timer t;
  GeneratorMeasure da({{w.A, Rational(1)}});
  GeneratorMeasure db({{w.B, Rational(1)}});
  LyapunovEstimate la = lyapunov_estimate(da, 20000, 16, kSeedLyapunov);
  LyapunovEstimate lb = lyapunov_estimate(db, 20000, 16, kSeedLyapunov);
  LyapunovEstimate lm = lyapunov_estimate(w.ac, 2000, 400, kSeedLyapunov);
  LyapunovEstimate lp = lyapunov_estimate(w.twisted, 2000, 400, kSeedLyapunov);
  const double target = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  bool pass = std::abs(la.lambda1 - target) <= kLyapunovA && std::abs(lb.lambda1) <= kLyapunovB &&
              lm.lambda1 > kLyapunovSigmas * lm.std_error;
  report(9, "Lyapunov exponents", pass, t.seconds(), 30,
         fmtn("delta_A %.6f (target %.6f); delta_B %.2g; A/C mix %.4f +- %.4f; degenerate "
              "example %.4f +- %.4f (finite-n bias, exact value 0)",
              la.lambda1, target, lb.lambda1, lm.lambda1, lm.std_error, lp.lambda1,
              lp.std_error));
}

void criterion10(const Walks& w) {
  Timer t;
  auto u = [](std::span<const double> y) { return u_delta(y, 0.3, Metric::kSup); };
  auto root_u = [&](std::span<const double> y) { return std::sqrt(u(y)); };
  std::vector<TorusPoint> pts = sample_near_origin(2, 10, 1e-3, 0.5, Metric::kSup, kSeedAbel);
  for (const TorusPoint& p : sample_uniform(2, 10, kSeedAbel)) pts.push_back(p);
  double worst_abel = -INFINITY;
  double worst_ratio = 0.0;
  std::size_t monotone = 0, total = 0;
  for (const TorusPoint& x : pts) {
    double ux = u(x.coords());
    for (double alpha : {0.0, 0.5, 1.0}) {
      for (double s : abel_partial_sums(w.ac, u, x, 12, alpha)) {
        worst_abel = std::max(worst_abel, s / ux);
      }
    }
    std::vector<double> c = cesaro_damped(w.ac, root_u, x, 12);
    worst_ratio = std::max(worst_ratio, c.back() / c.front());
    for (std::size_t i = 1; i < c.size(); ++i, ++total) monotone += c[i] <= c[i - 1];
  }
  bool pass = worst_abel <= 1.0 + 1e-12 && worst_ratio < 1.0;
  report(10, "Abel partial sums and damped Cesaro averages (exact, n<=12)", pass, t.seconds(), 60,
         fmtn("max partial sum / u(x) %.4f (<= 1); max a_12/a_1 %.4f (< 1); nonincreasing "
              "steps %zu/%zu",
              worst_abel, worst_ratio, monotone, total));
}

}  // namespace

int main() {
  Walks w;
  criterion1(w);
  criterion2(w);
  double sigma2 = criterion3(w);
  criterion4(w, sigma2);
  criterion5(w, sigma2);
  criterion6(w);
  criterion7(w);
  criterion8();
  criterion9(w);
  criterion10(w);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
