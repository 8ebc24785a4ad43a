#include "ergotorus/test_function.hpp"

#include <cmath>
#include <numbers>

#include "ergotorus/rng.hpp"

namespace ergotorus {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TestFunction TestFunction::trig_poly(CoeffMap coeffs, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0,1]");
  }
  TestFunction f;
  f.kind_ = FunctionKind::kTrigPoly;
  f.gamma_ = gamma;
  f.name_ = "trig_poly";
  for (auto it = coeffs.begin(); it != coeffs.end();) {
    it = (it->second == Complex(0.0, 0.0)) ? coeffs.erase(it) : std::next(it);
  }
  std::size_t d = 0;
  for (const auto& [a, c] : coeffs) {
    if (d == 0) d = a.dim();
    require_same_dim(d, a.dim(), "trig_poly frequencies");
    auto jt = coeffs.find(-a);
    Complex partner = jt == coeffs.end() ? Complex(0.0, 0.0) : jt->second;
    if (std::abs(partner - std::conj(c)) > 1e-12 * (1.0 + std::abs(c))) {
      throw Error(ErrorCode::kInvalidArgument,
                  "trig_poly is not real: coeff(-a) != conj(coeff(a))");
    }
  }
  f.d_ = d;
  for (const auto& [a, c] : coeffs) {
    f.freq_flat_.insert(f.freq_flat_.end(), a.v.begin(), a.v.end());
    f.coeff_flat_.push_back(c);
  }
  f.coeffs_ = std::move(coeffs);
  f.norm_bound_ = trig_holder_bound(f.coeffs_, gamma, Metric::kSup);
  return f;
}

TestFunction TestFunction::cosine(const Frequency& a, double amp) {
  CoeffMap c;
  if (a.is_zero()) {
    c[a] = amp;
  } else {
    c[a] = 0.5 * amp;
    c[-a] = 0.5 * amp;
  }
  TestFunction f = trig_poly(std::move(c));
  f.d_ = a.dim();
  f.name_ = "cos";
  return f;
}

TestFunction TestFunction::constant(std::size_t d, double c) {
  CoeffMap m;
  if (c != 0.0) m[Frequency(std::vector<std::int64_t>(d, 0))] = c;
  TestFunction f = trig_poly(std::move(m));
  f.d_ = d;
  f.name_ = "constant";
  return f;
}

TestFunction TestFunction::dist_to_point(TorusPoint center, Metric m,
                                         double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0,1]");
  }
  TestFunction f;
  f.kind_ = FunctionKind::kDistToPoint;
  f.d_ = center.dim();
  f.gamma_ = gamma;
  f.metric_ = m;
  f.name_ = "dist_to_point";
  double diam = torus_diameter(f.d_, m);
  // |d(x,c) - d(y,c)| <= d(x,y) <= diam^{1-γ} d(x,y)^γ.
  f.norm_bound_ = diam + std::pow(diam, 1.0 - gamma);
  f.center_ = std::move(center);
  return f;
}

TestFunction TestFunction::callback(std::size_t d, Evaluator eval, double gamma,
                                    std::optional<double> norm_bound,
                                    std::string name) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in (0,1]");
  }
  TestFunction f;
  f.kind_ = FunctionKind::kCallback;
  f.d_ = d;
  f.gamma_ = gamma;
  f.eval_ = std::move(eval);
  f.norm_bound_ = norm_bound;
  f.name_ = std::move(name);
  return f;
}

const CoeffMap& TestFunction::coefficients() const {
  if (kind_ != FunctionKind::kTrigPoly) {
    throw Error(ErrorCode::kInvalidArgument, name_ + " is not a trig polynomial");
  }
  return coeffs_;
}

const TorusPoint& TestFunction::center() const {
  if (kind_ != FunctionKind::kDistToPoint) {
    throw Error(ErrorCode::kInvalidArgument, name_ + " has no center");
  }
  return center_;
}

double TestFunction::operator()(std::span<const double> x) const {
  switch (kind_) {
    case FunctionKind::kTrigPoly: {
      double s = 0.0;
      const std::size_t n = coeff_flat_.size();
      for (std::size_t k = 0; k < n; ++k) {
        const std::int64_t* a = freq_flat_.data() + k * d_;
        double t = 0.0;
        for (std::size_t i = 0; i < d_; ++i) {
          double p = static_cast<double>(a[i]) * x[i];
          t += p - std::floor(p);
        }
        double ang = kTwoPi * t;
        s += coeff_flat_[k].real() * std::cos(ang) -
             coeff_flat_[k].imag() * std::sin(ang);
      }
      return s;
    }
    case FunctionKind::kDistToPoint:
      return torus_distance(x, center_.coords(), metric_);
    case FunctionKind::kCallback:
      return eval_(x);
  }
  return 0.0;
}

TestFunction TestFunction::centered_trig() const {
  CoeffMap c = coefficients();
  c.erase(Frequency(std::vector<std::int64_t>(d_, 0)));
  TestFunction f = trig_poly(std::move(c), gamma_);
  f.d_ = d_;
  f.name_ = name_;
  return f;
}

TestFunction TestFunction::scaled(double s) const {
  if (kind_ == FunctionKind::kTrigPoly) {
    CoeffMap c = coeffs_;
    for (auto& [a, v] : c) v *= s;
    TestFunction f = trig_poly(std::move(c), gamma_);
    f.d_ = d_;
    f.name_ = name_;
    return f;
  }
  TestFunction base = *this;
  std::optional<double> nb;
  if (norm_bound_) nb = std::abs(s) * *norm_bound_;
  return callback(
      d_, [base, s](std::span<const double> x) { return s * base(x); }, gamma_,
      nb, name_);
}

double trig_holder_bound(const CoeffMap& coeffs, double gamma, Metric m) {
  double total = 0.0;
  const double lead = std::pow(2.0, 1.0 - gamma);
  for (const auto& [a, c] : coeffs) {
    double mag = std::abs(c);
    double lip = a.is_zero() ? 0.0 : lead * std::pow(kTwoPi * a.dual_norm(m), gamma);
    total += mag * (1.0 + lip);
  }
  return total;
}

HolderEstimate holder_norm_estimate(const TestFunction& f, int grid_n, Metric m,
                                    std::size_t pair_budget) {
  if (grid_n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "holder_norm_estimate: grid_n >= 2");
  }
  const std::size_t d = f.dim();
  const double gamma = f.gamma();
  HolderEstimate est;
  std::vector<double> x(d), y(d);

  auto consider_pair = [&](double fx) {
    double fy = f(y);
    double dist = torus_distance(x, y, m);
    if (dist > 0.0) {
      est.seminorm_estimate =
          std::max(est.seminorm_estimate, std::abs(fx - fy) / std::pow(dist, gamma));
    }
  };

  for (int k = 2; k <= grid_n; ++k) {
    std::vector<int> idx(d, 0);
    const double h = 1.0 / k;
    while (true) {
      for (std::size_t i = 0; i < d; ++i) x[i] = idx[i] * h;
      double fx = f(x);
      est.sup_estimate = std::max(est.sup_estimate, std::abs(fx));
      for (std::size_t axis = 0; axis < d; ++axis) {
        y = x;
        y[axis] = wrap_unit(x[axis] + h);
        consider_pair(fx);
      }
      if (d > 1) {
        for (std::size_t i = 0; i < d; ++i) y[i] = wrap_unit(x[i] + h);
        consider_pair(fx);
      }
      std::size_t i = 0;
      while (i < d && ++idx[i] == k) idx[i++] = 0;
      if (i == d) break;
    }
  }

  CounterStream stream(0x5eed'4f1d'e7a1ULL, RngPurpose::kHolderPairs, 0);
  for (std::size_t p = 0; p < pair_budget; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = stream.uniform(p * 2 * d + 2 * i);
      y[i] = stream.uniform(p * 2 * d + 2 * i + 1);
    }
    double fx = f(x);
    est.sup_estimate = std::max(est.sup_estimate, std::abs(fx));
    consider_pair(fx);
  }
  return est;
}

}  // namespace ergotorus
