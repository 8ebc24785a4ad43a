#include "ergotorus/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

namespace ergotorus {

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kValidation, key + ": " + what, key);
}

void check_keys(const toml::table& t, const std::string& prefix,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    std::string key(k.str());
    if (!allowed.count(key)) invalid(prefix.empty() ? key : prefix + "." + key, "unknown key");
  }
}

const toml::table* section(const toml::table& root, const char* name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) invalid(name, "expected a table");
  return n->as_table();
}

template <class T>
void read_int(const toml::table* t, const std::string& prefix, const char* key, T& out,
              long long min_value = 0) {
  if (!t) return;
  const toml::node* n = t->get(key);
  if (!n) return;
  std::string full = prefix.empty() ? std::string(key) : prefix + "." + key;
  auto v = n->value<std::int64_t>();
  if (!n->is_integer() || !v) invalid(full, "expected an integer");
  if (*v < min_value) invalid(full, "must be >= " + std::to_string(min_value));
  out = static_cast<T>(*v);
}

void read_double(const toml::table* t, const std::string& prefix, const char* key, double& out) {
  if (!t) return;
  const toml::node* n = t->get(key);
  if (!n) return;
  auto v = n->value<double>();
  if (!v || !(n->is_floating_point() || n->is_integer())) {
    invalid(prefix + "." + key, "expected a number");
  }
  out = *v;
}

void read_string(const toml::table* t, const std::string& prefix, const char* key,
                 std::string& out) {
  if (!t) return;
  const toml::node* n = t->get(key);
  if (!n) return;
  auto v = n->value<std::string>();
  if (!n->is_string() || !v) invalid(prefix.empty() ? key : prefix + "." + key, "expected a string");
  out = *v;
}

std::string number_literal(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::vector<std::string> read_literal_list(const toml::node* n, const std::string& key) {
  std::vector<std::string> out;
  if (!n) return out;
  const toml::array* arr = n->as_array();
  if (!arr) invalid(key, "expected an array");
  for (const toml::node& e : *arr) {
    if (auto s = e.value<std::string>(); e.is_string() && s) {
      out.push_back(*s);
    } else if (e.is_integer() || e.is_floating_point()) {
      out.push_back(number_literal(*e.value<double>()));
    } else {
      invalid(key, "entries must be strings or numbers");
    }
  }
  return out;
}

std::vector<std::int64_t> read_int_list(const toml::node* n, const std::string& key) {
  std::vector<std::int64_t> out;
  if (!n) return out;
  const toml::array* arr = n->as_array();
  if (!arr) invalid(key, "expected an array of integers");
  for (const toml::node& e : *arr) {
    if (!e.is_integer()) invalid(key, "expected an array of integers");
    out.push_back(*e.value<std::int64_t>());
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string string_list(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + quote(v[i]);
  return out + "]";
}

std::string int_list(const std::vector<std::int64_t>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + std::to_string(v[i]);
  return out + "]";
}

bool parse_coordinate(const std::string& lit, Rational& exact, double& value) {
  if (lit.find('/') != std::string::npos) {
    exact = Rational::parse(lit);
    value = exact.to_double();
    return true;
  }
  double v = 0.0;
  auto res = std::from_chars(lit.data(), lit.data() + lit.size(), v);
  if (res.ec != std::errc() || res.ptr != lit.data() + lit.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidArgument, "bad coordinate literal '" + lit + "'");
  }
  value = v;
  return false;
}

std::vector<TorusPoint> parse_points(const std::vector<std::string>& lits) {
  std::vector<Rational> ex;
  std::vector<double> dv;
  bool all_exact = true;
  for (const std::string& l : lits) {
    Rational r;
    double v;
    all_exact &= parse_coordinate(l, r, v);
    ex.push_back(r);
    dv.push_back(v);
  }
  if (all_exact) return {TorusPoint::from_rationals(ex)};
  return {TorusPoint(dv)};
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::kValidation, std::string("config: ") + std::string(e.description()),
                "config");
  }
  check_keys(root, "",
             {"dimension", "seed", "out_dir", "metric", "atoms", "start", "function", "budgets",
              "simulate", "lln", "clt", "lil", "variance", "dioph", "fourier", "drift", "poisson",
              "degenerate"});
  ExperimentConfig c;
  read_int(&root, "", "dimension", c.dimension, 2);
  read_int(&root, "", "seed", c.seed, 0);
  read_string(&root, "", "out_dir", c.out_dir);
  read_string(&root, "", "metric", c.metric);

  const toml::table* atoms = section(root, "atoms");
  if (!atoms) invalid("atoms", "missing table");
  check_keys(*atoms, "atoms", {"matrices", "weights"});
  c.matrices = read_literal_list(atoms->get("matrices"), "atoms.matrices");
  c.weights = read_literal_list(atoms->get("weights"), "atoms.weights");

  if (const toml::table* s = section(root, "start")) {
    check_keys(*s, "start", {"preset", "coordinates"});
    read_string(s, "start", "preset", c.start.preset);
    c.start.literals = read_literal_list(s->get("coordinates"), "start.coordinates");
  }

  if (const toml::table* f = section(root, "function")) {
    check_keys(*f, "function",
               {"kind", "frequency", "amplitude", "terms", "center", "metric", "gamma"});
    read_string(f, "function", "kind", c.function.kind);
    c.function.frequency = read_int_list(f->get("frequency"), "function.frequency");
    read_double(f, "function", "amplitude", c.function.amplitude);
    read_double(f, "function", "gamma", c.function.gamma);
    read_string(f, "function", "metric", c.function.metric);
    c.function.center = read_literal_list(f->get("center"), "function.center");
    if (const toml::node* t = f->get("terms")) {
      const toml::array* arr = t->as_array();
      if (!arr) invalid("function.terms", "expected an array of tables");
      for (const toml::node& e : *arr) {
        const toml::table* et = e.as_table();
        if (!et) invalid("function.terms", "expected an array of tables");
        check_keys(*et, "function.terms", {"frequency", "re", "im"});
        TrigTerm term;
        term.frequency = read_int_list(et->get("frequency"), "function.terms.frequency");
        read_double(et, "function.terms", "re", term.re);
        read_double(et, "function.terms", "im", term.im);
        c.function.terms.push_back(std::move(term));
      }
    }
  }

  if (const toml::table* b = section(root, "budgets")) {
    check_keys(*b, "budgets", {"max_atoms", "exact_depth", "threads"});
    read_int(b, "budgets", "max_atoms", c.budgets.max_atoms, 1);
    read_int(b, "budgets", "exact_depth", c.budgets.exact_depth, 0);
    read_int(b, "budgets", "threads", c.budgets.threads, 0);
  }
  if (const toml::table* t = section(root, "simulate")) {
    check_keys(*t, "simulate", {"n", "trials"});
    read_int(t, "simulate", "n", c.simulate.n, 0);
    read_int(t, "simulate", "trials", c.simulate.trials, 1);
  }
  if (const toml::table* t = section(root, "lln")) {
    check_keys(*t, "lln", {"n", "trials", "tolerance"});
    read_int(t, "lln", "n", c.lln.n, 1);
    read_int(t, "lln", "trials", c.lln.trials, 1);
    read_double(t, "lln", "tolerance", c.lln.tolerance);
  }
  if (const toml::table* t = section(root, "clt")) {
    check_keys(*t, "clt", {"n", "trials", "L", "ks_threshold"});
    read_int(t, "clt", "n", c.clt.n, 1);
    read_int(t, "clt", "trials", c.clt.trials, 100);
    read_int(t, "clt", "L", c.clt.L, 0);
    read_double(t, "clt", "ks_threshold", c.clt.ks_threshold);
  }
  if (const toml::table* t = section(root, "lil")) {
    check_keys(*t, "lil", {"n_max", "trials", "L", "window_lo", "window_hi"});
    read_int(t, "lil", "n_max", c.lil.n_max, 100);
    read_int(t, "lil", "trials", c.lil.trials, 1);
    read_int(t, "lil", "L", c.lil.L, 0);
    read_double(t, "lil", "window_lo", c.lil.window_lo);
    read_double(t, "lil", "window_hi", c.lil.window_hi);
  }
  if (const toml::table* t = section(root, "variance")) {
    check_keys(*t, "variance", {"L", "walk_n", "poisson_N", "agreement"});
    read_int(t, "variance", "L", c.variance.L, 0);
    read_int(t, "variance", "walk_n", c.variance.walk_n, 1);
    read_int(t, "variance", "poisson_N", c.variance.poisson_N, 1);
    read_double(t, "variance", "agreement", c.variance.agreement);
  }
  if (const toml::table* t = section(root, "dioph")) {
    check_keys(*t, "dioph", {"Qmax", "B", "beta", "q_min"});
    read_int(t, "dioph", "Qmax", c.dioph.Qmax, 1);
    read_double(t, "dioph", "B", c.dioph.B);
    read_double(t, "dioph", "beta", c.dioph.beta);
    read_int(t, "dioph", "q_min", c.dioph.q_min, 1);
  }
  if (const toml::table* t = section(root, "fourier")) {
    check_keys(*t, "fourier",
               {"Amax", "nmax", "exact_max", "mc_trials", "decay_threshold", "rational_floor"});
    read_int(t, "fourier", "Amax", c.fourier.Amax, 1);
    read_int(t, "fourier", "nmax", c.fourier.nmax, 0);
    read_int(t, "fourier", "exact_max", c.fourier.exact_max, 0);
    read_int(t, "fourier", "mc_trials", c.fourier.mc_trials, 1);
    read_double(t, "fourier", "decay_threshold", c.fourier.decay_threshold);
    read_double(t, "fourier", "rational_floor", c.fourier.rational_floor);
  }
  if (const toml::table* t = section(root, "drift")) {
    check_keys(*t, "drift", {"delta", "n_iter", "samples", "Qmax", "phi_B", "phi_beta"});
    read_double(t, "drift", "delta", c.drift.delta);
    read_int(t, "drift", "n_iter", c.drift.n_iter, 1);
    read_int(t, "drift", "samples", c.drift.samples, 1);
    read_int(t, "drift", "Qmax", c.drift.Qmax, 1);
    read_double(t, "drift", "phi_B", c.drift.phi_B);
    read_double(t, "drift", "phi_beta", c.drift.phi_beta);
  }
  if (const toml::table* t = section(root, "poisson")) {
    check_keys(*t, "poisson", {"N", "trajectory_n"});
    read_int(t, "poisson", "N", c.poisson.N, 0);
    read_int(t, "poisson", "trajectory_n", c.poisson.trajectory_n, 1);
  }
  if (const toml::table* t = section(root, "degenerate")) {
    check_keys(*t, "degenerate", {"n", "seeds"});
    read_int(t, "degenerate", "n", c.degenerate.n, 1);
    read_int(t, "degenerate", "seeds", c.degenerate.seeds, 1);
  }

  // Semantic validation through the builders, so errors name the key.
  if (c.metric != "sup" && c.metric != "euclidean") invalid("metric", "expected sup or euclidean");
  build_measure(c);
  build_start(c);
  build_function(c);
  if (!(c.drift.delta > 0.0 && c.drift.delta < 1.0)) invalid("drift.delta", "must lie in (0,1)");
  if (!(c.drift.phi_beta > 0.0 && c.drift.phi_beta < 1.0)) invalid("drift.phi_beta", "must lie in (0,1)");
  if (!(c.dioph.beta > 0.0 && c.dioph.beta < 1.0)) invalid("dioph.beta", "must lie in (0,1)");
  if (c.lil.window_lo > c.lil.window_hi) invalid("lil.window_lo", "must not exceed lil.window_hi");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "config: cannot open '" + path + "'", "config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto num = [](double v) { return number_literal(v); };
  o << "dimension = " << c.dimension << "\n";
  o << "seed = " << c.seed << "\n";
  o << "out_dir = " << quote(c.out_dir) << "\n";
  o << "metric = " << quote(c.metric) << "\n";
  o << "\n[atoms]\nmatrices = " << string_list(c.matrices) << "\nweights = "
    << string_list(c.weights) << "\n";
  o << "\n[start]\n";
  if (!c.start.preset.empty()) o << "preset = " << quote(c.start.preset) << "\n";
  if (!c.start.literals.empty()) o << "coordinates = " << string_list(c.start.literals) << "\n";
  const FunctionSpec& f = c.function;
  o << "\n[function]\nkind = " << quote(f.kind) << "\n";
  if (f.kind == "cos") {
    o << "frequency = " << int_list(f.frequency) << "\namplitude = " << num(f.amplitude) << "\n";
  } else if (f.kind == "trig") {
    o << "terms = [";
    for (std::size_t i = 0; i < f.terms.size(); ++i) {
      o << (i ? ", " : "") << "{ frequency = " << int_list(f.terms[i].frequency)
        << ", re = " << num(f.terms[i].re) << ", im = " << num(f.terms[i].im) << " }";
    }
    o << "]\n";
  } else if (f.kind == "dist") {
    o << "center = " << string_list(f.center) << "\nmetric = " << quote(f.metric) << "\n";
  }
  o << "gamma = " << num(f.gamma) << "\n";
  o << "\n[budgets]\nmax_atoms = " << c.budgets.max_atoms
    << "\nexact_depth = " << c.budgets.exact_depth << "\nthreads = " << c.budgets.threads << "\n";
  o << "\n[simulate]\nn = " << c.simulate.n << "\ntrials = " << c.simulate.trials << "\n";
  o << "\n[lln]\nn = " << c.lln.n << "\ntrials = " << c.lln.trials
    << "\ntolerance = " << num(c.lln.tolerance) << "\n";
  o << "\n[clt]\nn = " << c.clt.n << "\ntrials = " << c.clt.trials << "\nL = " << c.clt.L
    << "\nks_threshold = " << num(c.clt.ks_threshold) << "\n";
  o << "\n[lil]\nn_max = " << c.lil.n_max << "\ntrials = " << c.lil.trials << "\nL = " << c.lil.L
    << "\nwindow_lo = " << num(c.lil.window_lo) << "\nwindow_hi = " << num(c.lil.window_hi)
    << "\n";
  o << "\n[variance]\nL = " << c.variance.L << "\nwalk_n = " << c.variance.walk_n
    << "\npoisson_N = " << c.variance.poisson_N << "\nagreement = " << num(c.variance.agreement)
    << "\n";
  o << "\n[dioph]\nQmax = " << c.dioph.Qmax << "\nB = " << num(c.dioph.B)
    << "\nbeta = " << num(c.dioph.beta) << "\nq_min = " << c.dioph.q_min << "\n";
  o << "\n[fourier]\nAmax = " << c.fourier.Amax << "\nnmax = " << c.fourier.nmax
    << "\nexact_max = " << c.fourier.exact_max << "\nmc_trials = " << c.fourier.mc_trials
    << "\ndecay_threshold = " << num(c.fourier.decay_threshold)
    << "\nrational_floor = " << num(c.fourier.rational_floor) << "\n";
  o << "\n[drift]\ndelta = " << num(c.drift.delta) << "\nn_iter = " << c.drift.n_iter
    << "\nsamples = " << c.drift.samples << "\nQmax = " << c.drift.Qmax
    << "\nphi_B = " << num(c.drift.phi_B) << "\nphi_beta = " << num(c.drift.phi_beta) << "\n";
  o << "\n[poisson]\nN = " << c.poisson.N << "\ntrajectory_n = " << c.poisson.trajectory_n
    << "\n";
  o << "\n[degenerate]\nn = " << c.degenerate.n << "\nseeds = " << c.degenerate.seeds << "\n";
  return o.str();
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : emit_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Metric build_metric(const ExperimentConfig& c) {
  try {
    return parse_metric(c.metric);
  } catch (const Error& e) {
    invalid("metric", e.what());
  }
}

GeneratorMeasure build_measure(const ExperimentConfig& c) {
  if (c.matrices.empty()) invalid("atoms.matrices", "at least one matrix is required");
  if (c.weights.size() != c.matrices.size()) {
    invalid("atoms.weights", "expected one weight per matrix");
  }
  std::vector<Atom> atoms;
  Rational total(0);
  for (std::size_t i = 0; i < c.matrices.size(); ++i) {
    LatticeMatrix m = LatticeMatrix::identity(c.dimension);
    try {
      m = LatticeMatrix::parse(c.matrices[i]);
    } catch (const Error& e) {
      invalid("atoms.matrices", e.what());
    }
    if (m.dim() != c.dimension) {
      invalid("atoms.matrices", "matrix '" + c.matrices[i] + "' does not match dimension");
    }
    Rational w;
    try {
      w = Rational::parse(c.weights[i]);
    } catch (const Error& e) {
      invalid("atoms.weights", e.what());
    }
    if (!(w > Rational(0))) invalid("atoms.weights", "weights must be positive");
    total += w;
    atoms.push_back({m, w});
  }
  if (total != Rational(1)) {
    invalid("atoms.weights", "weights sum to " + total.to_string() + ", expected 1");
  }
  return GeneratorMeasure(std::move(atoms));
}

TorusPoint build_start(const ExperimentConfig& c) {
  const std::size_t d = c.dimension;
  if (!c.start.preset.empty() && !c.start.literals.empty()) {
    invalid("start", "give either preset or coordinates");
  }
  if (!c.start.preset.empty()) {
    const std::string& p = c.start.preset;
    if (p == "origin") return TorusPoint::origin(d);
    if (p == "half_half") {
      return TorusPoint::from_rationals(std::vector<Rational>(d, Rational(1, 2)));
    }
    if (p == "sqrt2_sqrt3" && d == 2) {
      return TorusPoint(std::vector<double>{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0});
    }
    invalid("start.preset", "unknown preset '" + p + "' for dimension " + std::to_string(d));
  }
  if (c.start.literals.empty()) return TorusPoint::origin(d);
  if (c.start.literals.size() != d) invalid("start.coordinates", "expected d coordinates");
  try {
    return parse_points(c.start.literals).front();
  } catch (const Error& e) {
    invalid("start.coordinates", e.what());
  }
}

TestFunction build_function(const ExperimentConfig& c) {
  const FunctionSpec& f = c.function;
  if (!(f.gamma > 0.0 && f.gamma <= 1.0)) invalid("function.gamma", "must lie in (0,1]");
  if (f.kind == "cos") {
    std::vector<std::int64_t> a = f.frequency;
    if (a.empty()) {
      a.assign(c.dimension, 0);
      a[0] = 1;
    }
    if (a.size() != c.dimension) invalid("function.frequency", "expected d integers");
    TestFunction t = TestFunction::cosine(Frequency(a), f.amplitude);
    return f.gamma == 1.0 ? t : TestFunction::trig_poly(t.coefficients(), f.gamma);
  }
  if (f.kind == "trig") {
    if (f.terms.empty()) invalid("function.terms", "at least one term is required");
    CoeffMap m;
    for (const TrigTerm& t : f.terms) {
      if (t.frequency.size() != c.dimension) invalid("function.terms.frequency", "expected d integers");
      m[Frequency(t.frequency)] += Complex(t.re, t.im);
    }
    try {
      return TestFunction::trig_poly(std::move(m), f.gamma);
    } catch (const Error& e) {
      invalid("function.terms", e.what());
    }
  }
  if (f.kind == "dist") {
    TorusPoint center = TorusPoint::origin(c.dimension);
    if (!f.center.empty()) {
      if (f.center.size() != c.dimension) invalid("function.center", "expected d coordinates");
      try {
        center = parse_points(f.center).front();
      } catch (const Error& e) {
        invalid("function.center", e.what());
      }
    }
    Metric m;
    try {
      m = parse_metric(f.metric);
    } catch (const Error& e) {
      invalid("function.metric", e.what());
    }
    return TestFunction::dist_to_point(center, m, f.gamma);
  }
  invalid("function.kind", "expected cos, trig or dist");
}

}  // namespace ergotorus
