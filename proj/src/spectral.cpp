#include "ergotorus/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <ostream>

#include "ergotorus/parallel.hpp"
#include "ergotorus/poisson.hpp"

namespace ergotorus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

Complex unit_phase(double turns) {
  double ang = -kTwoPi * turns;
  return {std::cos(ang), std::sin(ang)};
}

std::int64_t box_radius(const std::vector<Frequency>& freqs) {
  std::int64_t r = 0;
  for (const Frequency& a : freqs) r = std::max(r, a.sup_norm());
  return r;
}

/// Accumulates w·e(-⟨a,p⟩) for every frequency using per-axis powers of
/// e(-p_i).
class PhaseTable {
 public:
  PhaseTable(std::size_t d, std::int64_t radius)
      : d_(d), r_(radius), pow_(d * (2 * radius + 1)) {}

  void load(std::span<const double> p) {
    for (std::size_t i = 0; i < d_; ++i) {
      Complex z = unit_phase(p[i]);
      Complex* row = pow_.data() + i * (2 * r_ + 1);
      row[r_] = 1.0;
      Complex up = 1.0, down = 1.0;
      for (std::int64_t k = 1; k <= r_; ++k) {
        up *= z;
        down *= std::conj(z);
        row[r_ + k] = up;
        row[r_ - k] = down;
      }
    }
  }

  Complex value(const Frequency& a) const {
    Complex v = 1.0;
    for (std::size_t i = 0; i < d_; ++i) v *= pow_[i * (2 * r_ + 1) + (a.v[i] + r_)];
    return v;
  }

 private:
  std::size_t d_;
  std::int64_t r_;
  std::vector<Complex> pow_;
};

double integrate(const TestFunction& f, const Measure& mu) {
  if (const auto* s = std::get_if<WeightedSample>(&mu)) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i) acc += s->weights[i] * f(s->point(i));
    return acc;
  }
  return mean_lebesgue(f).value;
}

std::size_t measure_dim(const Measure& mu) {
  return std::visit([](const auto& m) { return m.d; }, mu);
}

}  // namespace

// ---------------------------------------------------------------------------

WeightedSample WeightedSample::from(const AtomicDistribution& dist, std::string id) {
  WeightedSample s;
  s.d = dist.dim();
  s.coords.assign(dist.coords().begin(), dist.coords().end());
  s.weights.assign(dist.weights_double().begin(), dist.weights_double().end());
  if (dist.is_exact()) {
    for (std::size_t i = 0; i < dist.size(); ++i) {
      auto e = dist.exact_point(i);
      s.exact.insert(s.exact.end(), e.begin(), e.end());
    }
  }
  s.id = std::move(id);
  return s;
}

WeightedSample WeightedSample::empirical(std::size_t d, std::vector<double> coords,
                                         std::string id) {
  WeightedSample s;
  s.d = d;
  std::size_t n = coords.size() / d;
  s.coords = std::move(coords);
  s.weights.assign(n, 1.0 / double(n));
  s.id = std::move(id);
  return s;
}

WeightedSample WeightedSample::uniform_grid(std::size_t d, std::int64_t N) {
  WeightedSample s;
  s.d = d;
  std::vector<std::int64_t> idx(d, 0);
  while (true) {
    for (std::int64_t k : idx) {
      s.exact.emplace_back(k, N);
      s.coords.push_back(double(k) / double(N));
    }
    std::size_t i = d;
    while (i > 0 && ++idx[i - 1] == N) idx[--i] = 0;
    if (i == 0) break;
  }
  std::size_t n = s.coords.size() / d;
  s.weights.assign(n, 1.0 / double(n));
  s.id = "uniform_grid_" + std::to_string(N);
  return s;
}

WeightedSample WeightedSample::dirac(const TorusPoint& x) {
  return from(AtomicDistribution::dirac(x), "dirac");
}

Complex empirical_fourier(const WeightedSample& dist, const Frequency& a) {
  require_same_dim(dist.d, a.dim(), "empirical_fourier");
  const bool exact = !dist.exact.empty();
  Complex acc = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double turns;
    if (exact) {
      Rational s(0);
      for (std::size_t j = 0; j < dist.d; ++j)
        s += (Rational(a.v[j]) * dist.exact[i * dist.d + j]).frac();
      turns = s.frac().to_double();
    } else {
      turns = phase(a, dist.point(i));
    }
    acc += dist.weights[i] * unit_phase(turns);
  }
  return acc;
}

Complex empirical_fourier(const AtomicDistribution& dist, const Frequency& a) {
  return empirical_fourier(WeightedSample::from(dist), a);
}

Complex fourier_coefficient(const Measure& mu, const Frequency& a) {
  if (const auto* s = std::get_if<WeightedSample>(&mu)) return empirical_fourier(*s, a);
  require_same_dim(std::get<Lebesgue>(mu).d, a.dim(), "fourier_coefficient");
  return a.is_zero() ? Complex(1.0) : Complex(0.0);
}

std::vector<Frequency> frequency_box(std::size_t d, std::int64_t Amax) {
  std::vector<Frequency> out;
  std::vector<std::int64_t> v(d, -Amax);
  while (true) {
    Frequency f(v);
    if (!f.is_zero()) out.push_back(std::move(f));
    std::size_t i = d;
    while (i > 0 && ++v[i - 1] > Amax) v[--i] = -Amax;
    if (i == 0) break;
  }
  return out;
}

FourierProfile fourier_decay_profile(const Measure& mu, std::int64_t Amax, Metric m) {
  if (Amax < 1) throw Error(ErrorCode::kInvalidArgument, "Amax must be >= 1");
  const std::size_t d = measure_dim(mu);
  FourierProfile prof;
  prof.Amax = Amax;
  if (const auto* s = std::get_if<WeightedSample>(&mu)) {
    prof.normalizer = s->id;
  } else {
    prof.normalizer = "lebesgue";
  }
  std::vector<Frequency> box = frequency_box(d, Amax);
  std::vector<Complex> vals(box.size());
  parallel_for(box.size(), [&](std::size_t k) { vals[k] = fourier_coefficient(mu, box[k]); });
  prof.peak = -1.0;
  prof.max_modulus = -1.0;
  for (std::size_t k = 0; k < box.size(); ++k) {
    double mod = std::abs(vals[k]);
    double ratio = mod / box[k].norm(m);
    if (ratio > prof.peak) {
      prof.peak = ratio;
      prof.peak_at = box[k];
    }
    if (mod > prof.max_modulus) {
      prof.max_modulus = mod;
      prof.max_modulus_at = box[k];
    }
    prof.entries.emplace(box[k], vals[k]);
  }
  prof.entries.emplace(Frequency(std::vector<std::int64_t>(d, 0)), fourier_coefficient(mu, Frequency(std::vector<std::int64_t>(d, 0))));
  return prof;
}

std::vector<std::vector<Complex>> walk_fourier_exact(const GeneratorMeasure& rho,
                                                     const TorusPoint& x, int nmax,
                                                     const std::vector<Frequency>& freqs) {
  require_same_dim(rho.dim(), x.dim(), "walk_fourier_exact");
  std::vector<std::vector<Complex>> out(nmax + 1, std::vector<Complex>(freqs.size()));
  if (x.is_exact()) {
    // Rational orbits stay small after merging; phases are exact.
    AtomicDistribution dist = AtomicDistribution::dirac(x);
    for (int n = 0; n <= nmax; ++n) {
      if (n > 0) dist = word_distribution_exact(rho, x, n, UINT64_MAX);
      WeightedSample s = WeightedSample::from(dist);
      for (std::size_t k = 0; k < freqs.size(); ++k) out[n][k] = empirical_fourier(s, freqs[k]);
    }
    return out;
  }
  PhaseTable table(x.dim(), box_radius(freqs));
  WordTree tree(rho);
  tree.walk(x.coords(), nmax, [&](int level, std::span<const double> p, double w) {
    table.load(p);
    auto& row = out[level];
    for (std::size_t k = 0; k < freqs.size(); ++k) row[k] += w * table.value(freqs[k]);
  });
  return out;
}

std::vector<std::vector<Complex>> walk_fourier_mc(const GeneratorMeasure& rho,
                                                  const TorusPoint& x, int nmax,
                                                  const std::vector<Frequency>& freqs,
                                                  std::size_t trials, std::uint64_t seed) {
  require_same_dim(rho.dim(), x.dim(), "walk_fourier_mc");
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  const std::int64_t radius = box_radius(freqs);
  std::vector<std::vector<Complex>> partial(
      chunks, std::vector<Complex>((nmax + 1) * freqs.size()));
  parallel_for(chunks, [&](std::size_t c) {
    PhaseTable table(x.dim(), radius);
    auto& acc = partial[c];
    std::size_t end = std::min(trials, (c + 1) * kChunk);
    for (std::size_t t = c * kChunk; t < end; ++t) {
      Walker walker(rho, x.coords(), seed, t);
      for (int n = 0; n <= nmax; ++n) {
        if (n > 0) walker.advance();
        table.load(walker.position());
        for (std::size_t k = 0; k < freqs.size(); ++k)
          acc[n * freqs.size() + k] += table.value(freqs[k]);
      }
    }
  });
  std::vector<std::vector<Complex>> out(nmax + 1, std::vector<Complex>(freqs.size()));
  for (const auto& acc : partial)
    for (int n = 0; n <= nmax; ++n)
      for (std::size_t k = 0; k < freqs.size(); ++k) out[n][k] += acc[n * freqs.size() + k];
  for (auto& row : out)
    for (auto& v : row) v /= double(trials);
  return out;
}

// ---------------------------------------------------------------------------

JacksonKernel::JacksonKernel(int m) : m_(m) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "Jackson kernel order m >= 1");
  // (Σ_{k=-m}^{m-1} e(ky))^4 by repeated integer convolution; the half-integer
  // phases of sin(2πmy)/sin(πy) shift the support by +2.
  std::vector<std::int64_t> base(2 * m, 1), acc{1};
  for (int r = 0; r < 4; ++r) {
    std::vector<std::int64_t> next(acc.size() + base.size() - 1, 0);
    for (std::size_t i = 0; i < acc.size(); ++i)
      for (std::size_t j = 0; j < base.size(); ++j) next[i + j] += acc[i] * base[j];
    acc = std::move(next);
  }
  // acc[j] is the coefficient of k = j - 4m before the shift, j - 4m + 2 after.
  norm_ = acc[4 * m - 2];
  c_.resize(acc.size());
  for (std::size_t j = 0; j < acc.size(); ++j) c_[j] = double(acc[j]) / double(norm_);
}

double JacksonKernel::coeff(std::int64_t k) const noexcept {
  std::int64_t j = k + max_freq();
  if (j < 0 || j >= static_cast<std::int64_t>(c_.size())) return 0.0;
  return c_[j];
}

double JacksonKernel::operator()(double y) const noexcept {
  double s = c_[max_freq()];
  for (int k = 1; k <= max_freq(); ++k) s += 2.0 * coeff(k) * std::cos(kTwoPi * k * y);
  return s;
}

double JacksonKernel::closed_form(double y) const noexcept {
  double den = std::sin(std::numbers::pi * y);
  double r;
  if (std::abs(den) < 1e-12) {
    r = 2.0 * m_;
  } else {
    r = std::sin(kTwoPi * m_ * y) / den;
  }
  return r * r * r * r / double(norm_);
}

double JacksonKernel::product_coeff(const Frequency& a) const noexcept {
  double p = 1.0;
  for (std::int64_t k : a.v) p *= coeff(k);
  return p;
}

JacksonKernel jackson_kernel(int m) { return JacksonKernel(m); }

// ---------------------------------------------------------------------------

GridFunction GridFunction::sample(const TestFunction& f, int n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "grid size must be >= 2");
  GridFunction g;
  g.d = f.dim();
  g.n = n;
  std::size_t total = 1;
  for (std::size_t i = 0; i < g.d; ++i) total *= static_cast<std::size_t>(n);
  g.values.resize(total);
  parallel_for(total, [&](std::size_t idx) {
    std::vector<double> x(g.d);
    std::size_t r = idx;
    for (std::size_t i = g.d; i-- > 0;) {
      x[i] = double(r % n) / double(n);
      r /= n;
    }
    g.values[idx] = f(x);
  });
  return g;
}

double GridFunction::sup_distance(const GridFunction& o) const {
  if (o.values.size() != values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "grid functions differ in shape");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s = std::max(s, std::abs(values[i] - o.values[i]));
  return s;
}

double GridFunction::mean() const {
  // Neumaier summation.
  double s = 0.0, c = 0.0;
  for (double v : values) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return (s + c) / double(values.size());
}

namespace {

/// Forward DFT of the grid, normalized to Fourier coefficients.
std::vector<Complex> grid_coefficients(const GridFunction& f) {
  const std::size_t total = f.values.size();
  std::vector<int> dims(f.d, f.n);
  fftw_complex* buf = fftw_alloc_complex(total);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(f.d), dims.data(), buf, buf, FFTW_FORWARD,
                         FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < total; ++i) {
    buf[i][0] = f.values[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<Complex> out(total);
  for (std::size_t i = 0; i < total; ++i)
    out[i] = Complex(buf[i][0], buf[i][1]) / double(total);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

std::int64_t signed_index(std::size_t j, int n) {
  return j <= static_cast<std::size_t>(n / 2) ? std::int64_t(j) : std::int64_t(j) - n;
}

Frequency grid_frequency(std::size_t idx, std::size_t d, int n) {
  Frequency a;
  a.v.resize(d);
  for (std::size_t i = d; i-- > 0;) {
    a.v[i] = signed_index(idx % n, n);
    idx /= n;
  }
  return a;
}

void check_guard(const GridFunction& f, int m) {
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "smoothing order m >= 1");
  if (f.n < 16 * m) {
    throw Error(ErrorCode::kInvalidArgument,
                "grid of " + std::to_string(f.n) + " points per axis is too coarse for m=" +
                    std::to_string(m) + " (need >= 16m)");
  }
}

}  // namespace

TestFunction smooth_approx(const TestFunction& f, int m) {
  JacksonKernel k(m);
  CoeffMap out;
  for (const auto& [a, c] : f.coefficients()) {
    double w = k.product_coeff(a);
    if (w != 0.0) out[a] = c * w;
  }
  TestFunction g = TestFunction::trig_poly(std::move(out), f.gamma());
  if (g.dim() == 0) return TestFunction::constant(f.dim(), 0.0);
  return g;
}

TestFunction smooth_approx(const GridFunction& f, int m) {
  check_guard(f, m);
  JacksonKernel k(m);
  std::vector<Complex> coeffs = grid_coefficients(f);
  CoeffMap raw;
  for (std::size_t idx = 0; idx < coeffs.size(); ++idx) {
    Frequency a = grid_frequency(idx, f.d, f.n);
    if (a.sup_norm() > k.max_freq()) continue;
    double w = k.product_coeff(a);
    if (w != 0.0 && coeffs[idx] != Complex(0.0)) raw[a] = coeffs[idx] * w;
  }
  // Enforce exact conjugate symmetry lost to DFT rounding.
  CoeffMap sym;
  for (const auto& [a, c] : raw) {
    auto it = raw.find(-a);
    Complex partner = it == raw.end() ? Complex(0.0) : it->second;
    Complex v = 0.5 * (c + std::conj(partner));
    if (a.is_zero()) v = Complex(c.real(), 0.0);
    if (v != Complex(0.0)) sym[a] = v;
  }
  for (auto& [a, c] : sym) {
    if (!a.is_zero()) {
      auto it = sym.find(-a);
      if (it != sym.end() && a > -a) c = std::conj(it->second);
    }
  }
  TestFunction g = TestFunction::trig_poly(std::move(sym));
  if (g.dim() == 0) return TestFunction::constant(f.d, 0.0);
  return g;
}

GridFunction smooth_on_grid(const GridFunction& f, int m) {
  check_guard(f, m);
  JacksonKernel k(m);
  const std::size_t total = f.values.size();
  std::vector<int> dims(f.d, f.n);
  fftw_complex* buf = fftw_alloc_complex(total);
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd = fftw_plan_dft(static_cast<int>(f.d), dims.data(), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft(static_cast<int>(f.d), dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < total; ++i) {
    buf[i][0] = f.values[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(fwd);
  for (std::size_t idx = 0; idx < total; ++idx) {
    double w = 1.0;
    std::size_t r = idx;
    for (std::size_t i = 0; i < f.d && w != 0.0; ++i) {
      w *= k.coeff(signed_index(r % f.n, f.n));
      r /= f.n;
    }
    buf[idx][0] *= w;
    buf[idx][1] *= w;
  }
  fftw_execute(bwd);
  GridFunction out;
  out.d = f.d;
  out.n = f.n;
  out.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) out.values[i] = buf[i][0] / double(total);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(buf);
  return out;
}

// ---------------------------------------------------------------------------

double certified_norm(const TestFunction& f, double gamma, Metric m) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0,1]");
  }
  switch (f.kind()) {
    case FunctionKind::kTrigPoly:
      return trig_holder_bound(f.coefficients(), gamma, m);
    case FunctionKind::kDistToPoint: {
      double diam = torus_diameter(f.dim(), f.metric());
      // Lipschitz constant of d_f(·, c) with respect to d_m.
      double lip = (f.metric() == Metric::kEuclidean && m == Metric::kSup)
                       ? std::sqrt(double(f.dim()))
                       : 1.0;
      return diam + std::pow(diam, 1.0 - gamma) * std::pow(lip, gamma);
    }
    case FunctionKind::kCallback:
      if (!f.norm_bound()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "dictionary member '" + f.name() + "' has no certified norm bound");
      }
      return *f.norm_bound();
  }
  return 0.0;
}

WassersteinBound wasserstein_lower_bound(const Measure& mu1, const Measure& mu2,
                                         double gamma,
                                         const std::vector<TestFunction>& dictionary,
                                         Metric m) {
  require_same_dim(measure_dim(mu1), measure_dim(mu2), "wasserstein_lower_bound");
  WassersteinBound out;
  out.per_function.resize(dictionary.size());
  parallel_for(dictionary.size(), [&](std::size_t k) {
    const TestFunction& f = dictionary[k];
    double nb = certified_norm(f, gamma, m);
    double diff = std::abs(integrate(f, mu1) - integrate(f, mu2));
    out.per_function[k] = nb > 0.0 ? diff / nb : 0.0;
  });
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    if (out.per_function[k] > out.value) {
      out.value = out.per_function[k];
      out.best_index = k;
    }
  }
  return out;
}

std::vector<TestFunction> default_dictionary(std::size_t d, std::uint64_t seed,
                                             std::int64_t Amax, std::size_t n_dist,
                                             Metric m) {
  std::vector<TestFunction> dict;
  for (const Frequency& a : frequency_box(d, Amax)) {
    auto first = std::find_if(a.v.begin(), a.v.end(), [](std::int64_t c) { return c != 0; });
    if (*first < 0) continue;
    dict.push_back(TestFunction::cosine(a));
    CoeffMap s;
    s[a] = Complex(0.0, -0.5);
    s[-a] = Complex(0.0, 0.5);
    dict.push_back(TestFunction::trig_poly(std::move(s)));
  }
  for (const TorusPoint& c : sample_uniform(d, n_dist, seed)) {
    dict.push_back(TestFunction::dist_to_point(c, m));
  }
  return dict;
}

double psi(double t, double C0, double C1, const PhiSpec& phi) {
  if (!(C0 > 0.0) || !(C1 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "psi needs C0 > 0 and C1 > 0");
  }
  double log_y = std::max(C1 * t, phi.log_value(1.0));
  double log_inv = phi.family() == PhiSpec::Family::kPower
                       ? log_y / phi.M()
                       : std::log(log_y / phi.B()) / phi.beta();
  return std::exp(-C0 * log_inv);
}

double sobolev_norm(const CoeffMap& coeffs, double r) {
  double s = 0.0;
  for (const auto& [a, c] : coeffs) {
    s += std::norm(c) * std::pow(1.0 + a.norm(Metric::kEuclidean), 2.0 * r);
  }
  return std::sqrt(s);
}

void write_profile_csv(std::ostream& os, const FourierProfile& profile) {
  if (profile.entries.empty()) return;
  const std::size_t d = profile.entries.begin()->first.dim();
  for (std::size_t i = 1; i <= d; ++i) os << "a_" << i << ',';
  os << "re,im,modulus\n";
  char buf[96];
  for (const auto& [a, v] : profile.entries) {
    for (std::int64_t c : a.v) os << c << ',';
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", v.real(), v.imag(), std::abs(v));
    os << buf;
  }
}

}  // namespace ergotorus
