#include "ergotorus/torus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

namespace ergotorus {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= kFnvPrime;
  }
}

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::kOverflow, "integer matrix entry overflow");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::string_view to_string(Metric m) {
  return m == Metric::kSup ? "sup" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "sup" || name == "sup_norm") return Metric::kSup;
  if (name == "euclidean") return Metric::kEuclidean;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown metric '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// TorusPoint

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double& c : coords_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite torus coordinate");
    }
    c = wrap_unit(c);
  }
}

TorusPoint TorusPoint::from_rationals(std::vector<Rational> coords) {
  TorusPoint p;
  p.exact_.reserve(coords.size());
  p.coords_.reserve(coords.size());
  for (const Rational& r : coords) {
    Rational f = r.frac();
    p.exact_.push_back(f);
    p.coords_.push_back(f.to_double());
  }
  return p;
}

TorusPoint TorusPoint::origin(std::size_t d) {
  return from_rationals(std::vector<Rational>(d, Rational(0)));
}

std::int64_t TorusPoint::denominator() const {
  if (!is_exact()) {
    throw Error(ErrorCode::kInvalidArgument, "point has no exact coordinates");
  }
  std::int64_t q = 1;
  for (const Rational& r : exact_) q = lcm64(q, r.den());
  return q;
}

bool operator==(const TorusPoint& a, const TorusPoint& b) {
  if (a.is_exact() && b.is_exact()) return a.exact_ == b.exact_;
  return a.coords_ == b.coords_;
}

// ---------------------------------------------------------------------------
// LatticeMatrix

std::int64_t determinant(std::size_t d, std::span<const std::int64_t> entries) {
  if (entries.size() != d * d) {
    throw Error(ErrorCode::kDimensionMismatch, "determinant: entry count");
  }
  std::vector<__int128> m(entries.begin(), entries.end());
  __int128 prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < d; ++k) {
    if (m[k * d + k] == 0) {
      std::size_t swap = k + 1;
      while (swap < d && m[swap * d + k] == 0) ++swap;
      if (swap == d) return 0;
      for (std::size_t j = 0; j < d; ++j) std::swap(m[k * d + j], m[swap * d + j]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < d; ++i) {
      for (std::size_t j = k + 1; j < d; ++j) {
        m[i * d + j] =
            (m[i * d + j] * m[k * d + k] - m[i * d + k] * m[k * d + j]) / prev;
      }
    }
    prev = m[k * d + k];
  }
  return checked(sign * m[(d - 1) * d + (d - 1)]);
}

LatticeMatrix::LatticeMatrix(std::size_t d, std::vector<std::int64_t> entries)
    : d_(d), a_(std::move(entries)) {
  if (d_ < 1 || a_.size() != d_ * d_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "matrix needs d*d entries with d >= 1");
  }
  std::int64_t det = determinant(d_, a_);
  if (det != 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix [" + literal() + "] has determinant " +
                    std::to_string(det) + ", expected 1");
  }
}

LatticeMatrix LatticeMatrix::identity(std::size_t d) {
  std::vector<std::int64_t> e(d * d, 0);
  for (std::size_t i = 0; i < d; ++i) e[i * d + i] = 1;
  return LatticeMatrix(Unchecked{}, d, std::move(e));
}

LatticeMatrix LatticeMatrix::parse(std::string_view literal) {
  std::vector<std::int64_t> vals;
  std::size_t i = 0;
  while (i < literal.size()) {
    while (i < literal.size() &&
           (literal[i] == ' ' || literal[i] == ',' || literal[i] == '\t')) {
      ++i;
    }
    if (i >= literal.size()) break;
    std::size_t j = i;
    while (j < literal.size() && literal[j] != ' ' && literal[j] != ',' &&
           literal[j] != '\t') {
      ++j;
    }
    std::int64_t v = 0;
    const char* first = literal.data() + i;
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, literal.data() + j, v);
    if (ec != std::errc() || ptr != literal.data() + j) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bad matrix literal '" + std::string(literal) + "'");
    }
    vals.push_back(v);
    i = j;
  }
  auto d = static_cast<std::size_t>(std::llround(std::sqrt(double(vals.size()))));
  if (d < 2 || d * d != vals.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix literal '" + std::string(literal) +
                    "' must hold d*d integers with d >= 2");
  }
  return LatticeMatrix(d, std::move(vals));
}

LatticeMatrix LatticeMatrix::operator*(const LatticeMatrix& o) const {
  require_same_dim(d_, o.d_, "matrix product");
  std::vector<std::int64_t> c(d_ * d_);
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      __int128 s = 0;
      for (std::size_t k = 0; k < d_; ++k) {
        s += static_cast<__int128>(a_[i * d_ + k]) * o.a_[k * d_ + j];
      }
      c[i * d_ + j] = checked(s);
    }
  }
  return LatticeMatrix(Unchecked{}, d_, std::move(c));
}

LatticeMatrix LatticeMatrix::transpose() const {
  std::vector<std::int64_t> t(d_ * d_);
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j) t[j * d_ + i] = a_[i * d_ + j];
  return LatticeMatrix(Unchecked{}, d_, std::move(t));
}

LatticeMatrix LatticeMatrix::inverse() const {
  // det = 1, so the inverse is the adjugate: inv(i,j) = (-1)^{i+j} M_{ji}.
  std::vector<std::int64_t> inv(d_ * d_);
  if (d_ == 1) return *this;
  std::vector<std::int64_t> minor((d_ - 1) * (d_ - 1));
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j < d_; ++j) {
      std::size_t idx = 0;
      for (std::size_t r = 0; r < d_; ++r) {
        if (r == j) continue;
        for (std::size_t c = 0; c < d_; ++c) {
          if (c == i) continue;
          minor[idx++] = a_[r * d_ + c];
        }
      }
      std::int64_t m = determinant(d_ - 1, minor);
      inv[i * d_ + j] = ((i + j) % 2 == 0) ? m : -m;
    }
  }
  return LatticeMatrix(Unchecked{}, d_, std::move(inv));
}

bool LatticeMatrix::is_identity() const noexcept {
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j)
      if (a_[i * d_ + j] != (i == j ? 1 : 0)) return false;
  return true;
}

double LatticeMatrix::operator_norm(Metric metric) const {
  if (metric == Metric::kSup) {
    double best = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < d_; ++j)
        row += std::abs(static_cast<double>(a_[i * d_ + j]));
      best = std::max(best, row);
    }
    return best;
  }
  Eigen::MatrixXd m(d_, d_);
  for (std::size_t i = 0; i < d_; ++i)
    for (std::size_t j = 0; j < d_; ++j)
      m(i, j) = static_cast<double>(a_[i * d_ + j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

std::string LatticeMatrix::literal() const {
  std::string s;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(a_[i]);
  }
  return s;
}

void LatticeMatrix::apply_mod1(std::span<const double> x,
                               std::span<double> out) const noexcept {
  for (std::size_t i = 0; i < d_; ++i) {
    double s = 0.0;
    const std::int64_t* row = a_.data() + i * d_;
    for (std::size_t j = 0; j < d_; ++j) s += static_cast<double>(row[j]) * x[j];
    out[i] = s - std::floor(s);
    if (out[i] >= 1.0) out[i] = 0.0;
  }
}

std::vector<std::int64_t> LatticeMatrix::apply(
    std::span<const std::int64_t> v) const {
  require_same_dim(d_, v.size(), "matrix action");
  std::vector<std::int64_t> out(d_);
  for (std::size_t i = 0; i < d_; ++i) {
    __int128 s = 0;
    for (std::size_t j = 0; j < d_; ++j)
      s += static_cast<__int128>(a_[i * d_ + j]) * v[j];
    out[i] = checked(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GeneratorMeasure

GeneratorMeasure::GeneratorMeasure(std::vector<Atom> atoms) {
  if (atoms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "measure needs at least one atom");
  }
  d_ = atoms.front().matrix.dim();
  for (Atom& a : atoms) {
    require_same_dim(d_, a.matrix.dim(), "measure atoms");
    if (a.weight <= Rational(0)) {
      throw Error(ErrorCode::kInvalidArgument, "atom weights must be positive");
    }
    auto it = std::find_if(atoms_.begin(), atoms_.end(),
                           [&](const Atom& b) { return b.matrix == a.matrix; });
    if (it != atoms_.end()) {
      it->weight += a.weight;
    } else {
      atoms_.push_back(std::move(a));
    }
  }
  Rational total(0);
  for (const Atom& a : atoms_) total += a.weight;
  if (total != Rational(1)) {
    throw Error(ErrorCode::kInvalidArgument,
                "atom weights sum to " + total.to_string() + ", expected 1");
  }

  // Thresholds t_i = floor(2^64 * (w_0 + ... + w_i)) for all but the last atom.
  Rational cum(0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    weights_.push_back(atoms_[i].weight.to_double());
    cum += atoms_[i].weight;
    if (i + 1 < atoms_.size()) {
      unsigned __int128 t =
          (static_cast<unsigned __int128>(cum.num()) << 64) /
          static_cast<unsigned __int128>(cum.den());
      thresholds_.push_back(static_cast<std::uint64_t>(t));
    }
  }

  hash_ = kFnvOffset;
  fnv_mix(hash_, d_);
  for (const Atom& a : atoms_) {
    for (std::int64_t e : a.matrix.entries()) fnv_mix(hash_, static_cast<std::uint64_t>(e));
    fnv_mix(hash_, static_cast<std::uint64_t>(a.weight.num()));
    fnv_mix(hash_, static_cast<std::uint64_t>(a.weight.den()));
  }
}

GeneratorMeasure GeneratorMeasure::symmetrized() const {
  std::vector<Atom> inv;
  inv.reserve(atoms_.size());
  for (const Atom& a : atoms_) inv.push_back({a.matrix.inverse(), a.weight});
  return GeneratorMeasure(std::move(inv));
}

std::size_t GeneratorMeasure::pick(std::uint64_t r) const noexcept {
  std::size_t i = 0;
  while (i < thresholds_.size() && r >= thresholds_[i]) ++i;
  return i;
}

double GeneratorMeasure::max_operator_norm(Metric metric) const {
  double m = 0.0;
  for (const Atom& a : atoms_) m = std::max(m, a.matrix.operator_norm(metric));
  return m;
}

// ---------------------------------------------------------------------------
// Frequency

bool Frequency::is_zero() const noexcept {
  return std::all_of(v.begin(), v.end(), [](std::int64_t c) { return c == 0; });
}

Frequency Frequency::operator-() const {
  Frequency f = *this;
  for (auto& c : f.v) c = -c;
  return f;
}

std::int64_t Frequency::sup_norm() const noexcept {
  std::int64_t m = 0;
  for (auto c : v) m = std::max(m, c < 0 ? -c : c);
  return m;
}

double Frequency::norm(Metric m) const noexcept {
  if (m == Metric::kSup) return static_cast<double>(sup_norm());
  double s = 0.0;
  for (auto c : v) s += static_cast<double>(c) * static_cast<double>(c);
  return std::sqrt(s);
}

double Frequency::dual_norm(Metric m) const noexcept {
  if (m == Metric::kEuclidean) return norm(Metric::kEuclidean);
  double s = 0.0;
  for (auto c : v) s += std::abs(static_cast<double>(c));
  return s;
}

std::size_t FrequencyHash::operator()(const Frequency& a) const noexcept {
  std::uint64_t h = kFnvOffset;
  for (auto c : a.v) {
    h ^= static_cast<std::uint64_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= kFnvPrime;
  }
  return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// Free operations

TorusPoint step(const LatticeMatrix& g, const TorusPoint& x) {
  require_same_dim(g.dim(), x.dim(), "step");
  const std::size_t d = g.dim();
  if (x.is_exact()) {
    std::vector<Rational> out(d, Rational(0));
    auto e = x.exact();
    for (std::size_t i = 0; i < d; ++i) {
      Rational s(0);
      for (std::size_t j = 0; j < d; ++j) s += Rational(g(i, j)) * e[j];
      out[i] = s;
    }
    return TorusPoint::from_rationals(std::move(out));
  }
  std::vector<double> out(d);
  g.apply_mod1(x.coords(), out);
  return TorusPoint(std::move(out));
}

double torus_distance(std::span<const double> x, std::span<const double> y,
                      Metric m) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = std::abs(x[i] - y[i]);
    t = std::min(t, 1.0 - t);
    if (m == Metric::kSup) {
      acc = std::max(acc, t);
    } else {
      acc += t * t;
    }
  }
  return m == Metric::kSup ? acc : std::sqrt(acc);
}

double torus_distance(const TorusPoint& x, const TorusPoint& y, Metric m) {
  require_same_dim(x.dim(), y.dim(), "torus_distance");
  if (x.is_exact() && y.is_exact()) {
    // Per-coordinate distance computed from the exact difference.
    double acc = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
      Rational diff = (x.exact()[i] - y.exact()[i]).frac();
      double t = std::min(diff.to_double(), (Rational(1) - diff).to_double());
      if (diff.is_zero()) t = 0.0;
      if (m == Metric::kSup) {
        acc = std::max(acc, t);
      } else {
        acc += t * t;
      }
    }
    return m == Metric::kSup ? acc : std::sqrt(acc);
  }
  return torus_distance(x.coords(), y.coords(), m);
}

double distance_to_origin(std::span<const double> x, Metric m) noexcept {
  double acc = 0.0;
  for (double c : x) {
    double t = std::min(c, 1.0 - c);
    t = std::abs(t);
    if (m == Metric::kSup) {
      acc = std::max(acc, t);
    } else {
      acc += t * t;
    }
  }
  return m == Metric::kSup ? acc : std::sqrt(acc);
}

double torus_diameter(std::size_t d, Metric m) noexcept {
  return m == Metric::kSup ? 0.5 : 0.5 * std::sqrt(static_cast<double>(d));
}

Frequency frequency_action(const LatticeMatrix& g, const Frequency& a) {
  require_same_dim(g.dim(), a.dim(), "frequency_action");
  const std::size_t d = g.dim();
  Frequency out;
  out.v.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    __int128 s = 0;
    for (std::size_t i = 0; i < d; ++i) s += static_cast<__int128>(g(i, j)) * a.v[i];
    out.v[j] = checked(s);
  }
  return out;
}

double phase(const Frequency& a, const TorusPoint& x) {
  require_same_dim(a.dim(), x.dim(), "phase");
  if (x.is_exact()) {
    Rational s(0);
    for (std::size_t i = 0; i < a.dim(); ++i) {
      s += (Rational(a.v[i]) * x.exact()[i]).frac();
    }
    return s.frac().to_double();
  }
  return phase(a, x.coords());
}

double phase(const Frequency& a, std::span<const double> x) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    double t = static_cast<double>(a.v[i]) * x[i];
    s += t - std::floor(t);
  }
  return s - std::floor(s);
}

}  // namespace ergotorus
