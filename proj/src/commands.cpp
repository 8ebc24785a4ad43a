#include "ergotorus/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ergotorus/degeneracy.hpp"
#include "ergotorus/diophantine.hpp"
#include "ergotorus/limit_theorems.hpp"
#include "ergotorus/parallel.hpp"
#include "ergotorus/poisson.hpp"
#include "ergotorus/spectral.hpp"

#ifndef ERGOTORUS_VERSION
#define ERGOTORUS_VERSION "0.1.0+unknown"
#endif

namespace ergotorus {

using json = nlohmann::ordered_json;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no infinities; they are written as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

json point_json(const TorusPoint& x) {
  json j;
  j["coords"] = std::vector<double>(x.coords().begin(), x.coords().end());
  if (x.is_exact()) {
    std::vector<std::string> e;
    for (const Rational& r : x.exact()) e.push_back(r.to_string());
    j["exact"] = e;
  }
  return j;
}

struct Context {
  const ExperimentConfig& c;
  GeneratorMeasure rho;
  TorusPoint x;
  TestFunction f;
  Metric metric;
  CommandOutcome out;
  json results = json::object();
  json methods = json::object();

  explicit Context(const ExperimentConfig& cfg)
      : c(cfg),
        rho(build_measure(cfg)),
        x(build_start(cfg)),
        f(build_function(cfg)),
        metric(build_metric(cfg)) {}

  void check(std::string name, double value, std::string rel, std::string thr, bool pass) {
    out.checks.push_back({std::move(name), value, std::move(rel), std::move(thr), pass});
  }

  void require_trig(const char* command) const {
    if (f.kind() != FunctionKind::kTrigPoly) {
      throw Error(ErrorCode::kValidation,
                  std::string("function.kind: the ") + command +
                      " command needs a trig polynomial (cos or trig)",
                  "function.kind");
    }
  }

  /// ∫f dν_x: the orbit mean for exact rational x, Lebesgue otherwise.
  double target_mean() {
    if (x.is_exact()) {
      methods["target_mean"] = "rational-orbit-exact";
      return rational_orbit(rho, x, std::size_t{1} << 20).mean(f);
    }
    MeanEstimate m = mean_lebesgue(f);
    methods["target_mean"] = m.exact ? "zero-coefficient-exact" : "grid-quadrature";
    return m.value;
  }

  VarianceReport series(int L) {
    require_trig("variance");
    if (x.is_exact()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "start: a rational start walks on a finite orbit; the variance series "
                  "targets Lebesgue measure");
    }
    methods["sigma2_series"] = "exact-enumeration";
    return variance_series(rho, f.centered_trig(), L, c.budgets.max_atoms);
  }
};

json variance_json(const VarianceReport& r) {
  json j;
  j["sigma2"] = num(r.sigma2);
  j["method"] = r.method;
  j["truncation"] = r.truncation;
  j["uncertainty"] = num(r.uncertainty);
  if (r.method == "series") {
    j["terms"] = r.terms;
    j["decay_rate"] = num(r.decay_rate);
  } else {
    j["raw_average"] = num(r.raw_average);
    j["correction"] = num(r.correction);
  }
  j["seeds"] = r.seeds;
  return j;
}

void cmd_simulate(Context& k) {
  const auto& s = k.c.simulate;
  json finals = json::array();
  for (std::uint64_t t = 0; t < s.trials; ++t) {
    Trajectory tr = simulate_trajectory(k.rho, k.x, s.n, k.c.seed, t);
    std::ostringstream os;
    write_trajectory_csv(os, tr);
    k.out.csv.emplace_back("simulate_trial" + std::to_string(t) + ".csv", os.str());
    finals.push_back(point_json(tr.points.back()));
  }
  k.results["n"] = s.n;
  k.results["trials"] = s.trials;
  k.results["final_points"] = finals;
  k.methods["trajectory"] = k.x.is_exact() ? "exact-rational" : "double-precision";
}

void cmd_lln(Context& k) {
  LlnResult r = lln_check(k.rho, k.f, k.x, k.c.lln.n, k.c.lln.trials, k.c.seed);
  k.results["birkhoff_mean"] = r.birkhoff_mean;
  k.results["target"] = r.target;
  k.results["gap"] = r.gap;
  k.results["std_error"] = r.std_error;
  k.methods["birkhoff_mean"] = "monte-carlo";
  k.methods["target"] = r.target_method;
  k.out.csv.emplace_back("lln.csv", "birkhoff_mean,target,gap,std_error\n" + g17(r.birkhoff_mean) +
                                        "," + g17(r.target) + "," + g17(r.gap) + "," +
                                        g17(r.std_error) + "\n");
  k.check("lln.gap", std::abs(r.gap), "<=", g17(k.c.lln.tolerance),
          std::abs(r.gap) <= k.c.lln.tolerance);
}

void cmd_clt(Context& k) {
  const auto& p = k.c.clt;
  VarianceReport ref = k.series(p.L);
  double mean = k.target_mean();
  CltReport r = clt_experiment(k.rho, k.f, k.x, p.n, p.trials, ref.sigma2, k.c.seed, mean);
  k.results["sigma2_ref"] = variance_json(ref);
  k.results["n"] = r.n;
  k.results["trials"] = r.trials;
  k.results["ks_stat"] = r.ks_stat;
  k.results["ks_stat_var_hat"] = r.ks_stat_var_hat;
  k.results["mean_hat"] = r.mean_hat;
  k.results["var_hat"] = r.var_hat;
  k.methods["normalized_samples"] = "monte-carlo";
  std::string csv = "trial,value\n";
  for (std::size_t t = 0; t < r.normalized_samples.size(); ++t)
    csv += std::to_string(t) + "," + g17(r.normalized_samples[t]) + "\n";
  k.out.csv.emplace_back("clt_samples.csv", csv);
  k.check("clt.ks_stat", r.ks_stat, "<", g17(p.ks_threshold), r.ks_stat < p.ks_threshold);
  double ratio = ref.sigma2 > 0 ? r.var_hat / ref.sigma2 : INFINITY;
  k.check("clt.var_ratio", ratio, "in", "[0.8, 1.2]", ratio >= 0.8 && ratio <= 1.2);
}

void cmd_lil(Context& k) {
  const auto& p = k.c.lil;
  VarianceReport ref = k.series(p.L);
  double mean = k.target_mean();
  LilReport r = lil_envelope(k.rho, k.f, k.x, p.n_max, p.trials, ref.sigma2, k.c.seed, mean);
  k.results["sigma2_ref"] = variance_json(ref);
  k.results["checkpoints"] = r.checkpoints;
  k.results["envelope_max"] = r.envelope_max;
  k.results["envelope_min"] = r.envelope_min;
  k.results["terminal_max"] = r.terminal_max;
  k.results["terminal_min"] = r.terminal_min;
  k.results["overall_max"] = r.overall_max;
  k.results["overall_min"] = r.overall_min;
  k.methods["normalized_statistic"] = "monte-carlo";
  std::string csv = "trial,checkpoint,n,value\n";
  for (std::size_t t = 0; t < r.values.size(); ++t)
    for (std::size_t j = 0; j < r.checkpoints.size(); ++j)
      csv += std::to_string(t) + "," + std::to_string(j) + "," +
             std::to_string(r.checkpoints[j]) + "," + g17(r.values[t][j]) + "\n";
  k.out.csv.emplace_back("lil.csv", csv);
  k.check("lil.terminal_max", r.terminal_max, "in",
          "[" + g17(p.window_lo) + ", " + g17(p.window_hi) + "]",
          r.terminal_max >= p.window_lo && r.terminal_max <= p.window_hi);
}

void cmd_variance(Context& k) {
  const auto& p = k.c.variance;
  VarianceReport s = k.series(p.L);
  TruncatedPoisson tp = truncated_poisson(k.rho, k.f.centered_trig(), p.poisson_N,
                                          k.c.budgets.max_atoms);
  VarianceReport w = variance_along_walk(k.rho, tp, k.x, p.walk_n, k.c.seed);
  k.methods["sigma2_walk"] = "monte-carlo";
  k.results["series"] = variance_json(s);
  k.results["along_walk"] = variance_json(w);
  double combined = std::hypot(s.uncertainty, w.uncertainty);
  double diff = std::abs(s.sigma2 - w.sigma2);
  k.results["difference"] = diff;
  k.results["combined_uncertainty"] = num(combined);
  std::string csv = "lag,term\n";
  for (std::size_t l = 0; l < s.terms.size(); ++l) csv += std::to_string(l) + "," + g17(s.terms[l]) + "\n";
  k.out.csv.emplace_back("variance_series.csv", csv);
  std::string wcsv = "step,running_average\n";
  double acc = 0.0;
  for (std::size_t i = 0; i < w.terms.size(); ++i) {
    acc += w.terms[i];
    if ((i + 1) % 100 == 0 || i + 1 == w.terms.size())
      wcsv += std::to_string(i + 1) + "," + g17(acc / double(i + 1) + w.correction) + "\n";
  }
  k.out.csv.emplace_back("variance_walk.csv", wcsv);
  bool decidable = std::isfinite(combined);
  k.check("variance.agreement", diff, "<=",
          decidable ? g17(p.agreement * combined) : "undecidable (no tail bound)",
          decidable && diff <= p.agreement * combined);
}

void cmd_dioph(Context& k) {
  const auto& p = k.c.dioph;
  DiophantineCheck r = diophantine_check(k.x, p.B, p.beta, p.Qmax, p.q_min, k.metric);
  std::ostringstream os;
  write_diophantine_csv(os, r.solutions, PhiSpec::stretched_exp(p.B, p.beta));
  k.out.csv.emplace_back("dioph.csv", os.str());
  json sols = json::array();
  for (const RationalApprox& a : r.solutions) sols.push_back({{"q", a.q}, {"dist", a.dist}});
  k.results["solutions"] = sols;
  k.results["truncated"] = r.truncated;
  k.methods["solutions"] = "exact-enumeration";
  std::int64_t worst = 0;
  for (const RationalApprox& a : r.solutions) worst = std::max(worst, a.q);
  k.check("dioph.max_solution_q", double(worst), "<", std::to_string(p.q_min), r.pass);
}

void cmd_fourier(Context& k) {
  const auto& p = k.c.fourier;
  std::vector<Frequency> freqs = frequency_box(k.x.dim(), p.Amax);
  const int exact_max = std::min(p.exact_max, p.nmax);
  if (!k.x.is_exact() && word_count(k.rho.size(), exact_max) > k.c.budgets.max_atoms) {
    throw Error(ErrorCode::kBudgetExceeded,
                "fourier.exact_max: support^exact_max exceeds budgets.max_atoms",
                "fourier.exact_max");
  }
  auto ex = walk_fourier_exact(k.rho, k.x, exact_max, freqs);
  std::vector<std::vector<Complex>> mc;
  if (p.nmax > exact_max) mc = walk_fourier_mc(k.rho, k.x, p.nmax, freqs, p.mc_trials, k.c.seed);
  std::string csv = "n,max_modulus,peak_ratio,method\n";
  std::vector<double> maxmod(p.nmax + 1);
  for (int n = 0; n <= p.nmax; ++n) {
    const auto& row = n <= exact_max ? ex[n] : mc[n];
    double mm = 0.0, pk = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      mm = std::max(mm, std::abs(row[i]));
      pk = std::max(pk, std::abs(row[i]) / freqs[i].norm(k.metric));
    }
    maxmod[n] = mm;
    csv += std::to_string(n) + "," + g17(mm) + "," + g17(pk) + "," +
           (n <= exact_max ? "exact" : "monte-carlo") + "\n";
  }
  k.out.csv.emplace_back("fourier.csv", csv);
  k.results["max_modulus"] = maxmod;
  k.results["exact_max"] = exact_max;
  k.methods["n<=exact_max"] = "exact-enumeration";
  k.methods["n>exact_max"] = "monte-carlo";
  if (k.x.is_exact()) {
    double lo = *std::min_element(maxmod.begin(), maxmod.begin() + exact_max + 1);
    k.check("fourier.rational_min_peak", lo, ">=", g17(p.rational_floor), lo >= p.rational_floor);
  } else {
    k.check("fourier.final_max_modulus", maxmod.back(), "<", g17(p.decay_threshold),
            maxmod.back() < p.decay_threshold);
  }
}

void cmd_drift(Context& k) {
  const auto& p = k.c.drift;
  const std::size_t d = k.x.dim();
  std::vector<TorusPoint> sample =
      sample_near_origin(d, p.samples, 1e-4, 0.5, k.metric, k.c.seed);
  Metric m = k.metric;
  double delta = p.delta;
  DriftFit fd = drift_fit(
      k.rho, [=](std::span<const double> y) { return u_delta(y, delta, m); }, sample, p.n_iter,
      k.c.budgets.max_atoms);
  DriftSpec spec;
  spec.delta = p.delta;
  spec.phi = PhiSpec::stretched_exp(p.phi_B, p.phi_beta);
  spec.Qmax = p.Qmax;
  spec.metric = m;
  UPhi uphi(spec, d);
  DriftFit fp = drift_fit(
      k.rho, [&uphi](std::span<const double> y) { return uphi(y); }, sample, p.n_iter,
      k.c.budgets.max_atoms);
  auto fit_json = [](const DriftFit& f) {
    return json{{"a_hat", f.a_hat},   {"b_hat", f.b_hat},         {"violations", f.violations},
                {"core_size", f.core_size}, {"near_size", f.near_size}};
  };
  k.results["u_delta"] = fit_json(fd);
  k.results["u_phi"] = fit_json(fp);
  k.methods["P^n u"] = "exact-enumeration";
  std::string csv = "i";
  for (std::size_t i = 1; i <= d; ++i) csv += ",x_" + std::to_string(i);
  csv += ",u_delta,pu_delta,u_phi,pu_phi\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    csv += std::to_string(i);
    for (double v : sample[i].coords()) csv += "," + g17(v);
    csv += "," + g17(fd.u[i]) + "," + g17(fd.pu[i]) + "," + g17(fp.u[i]) + "," + g17(fp.pu[i]) + "\n";
  }
  k.out.csv.emplace_back("drift.csv", csv);
  k.check("drift.u_delta.a_hat", fd.a_hat, "<", "1", fd.a_hat < 1.0);
  k.check("drift.u_delta.violations", double(fd.violations), "==", "0", fd.violations == 0);
  k.check("drift.u_phi.a_hat", fp.a_hat, "<", "1", fp.a_hat < 1.0);
  k.check("drift.u_phi.violations", double(fp.violations), "==", "0", fp.violations == 0);
}

void cmd_poisson(Context& k) {
  PoissonOptions opt;
  opt.exact_depth = k.c.budgets.exact_depth;
  opt.seed = k.c.seed;
  PoissonValue at = poisson_solve_at(k.rho, k.f, k.x, k.c.poisson.N, opt);
  k.results["g"] = at.g;
  k.results["residual"] = at.residual;
  k.results["N"] = at.N;
  k.results["mean"] = at.mean;
  k.results["exact_upto"] = at.exact_upto;
  k.results["mc_stderr"] = at.mc_stderr;
  k.methods["terms<=exact_upto"] = "exact-enumeration";
  k.methods["terms>exact_upto"] = "monte-carlo";

  // Telescoping along a short trajectory with the same truncation.
  const std::size_t n = k.c.poisson.trajectory_n;
  Trajectory tr = simulate_trajectory(k.rho, k.x, n, k.c.seed, 0);
  auto solve = [&](const TorusPoint& p) { return poisson_solve_at(k.rho, k.f, p, at.N, opt); };
  std::vector<PoissonValue> gv(n + 1);
  parallel_for(n + 1, [&](std::size_t i) { gv[i] = solve(tr.points[i]); });
  double lhs = 0.0, mart = 0.0, tol = 0.0;
  std::string csv = "k,g,residual,martingale_increment\n";
  for (std::size_t i = 0; i < n; ++i) {
    lhs += k.f(tr.points[i]) - at.mean;
    double pg = 0.0;
    for (std::size_t a = 0; a < k.rho.size(); ++a) {
      PoissonValue v = solve(step(k.rho[a].matrix, tr.points[i]));
      pg += k.rho.weights()[a] * v.g;
      tol += k.rho.weights()[a] * 2.0 * v.mc_stderr;
    }
    double inc = gv[i + 1].g - pg;
    mart += inc;
    tol += gv[i].residual + 2.0 * gv[i].mc_stderr;
    csv += std::to_string(i) + "," + g17(gv[i].g) + "," + g17(gv[i].residual) + "," + g17(inc) + "\n";
  }
  k.out.csv.emplace_back("poisson.csv", csv);
  double rhs = gv[0].g - gv[n].g + mart;
  double gap = std::abs(lhs - rhs);
  k.results["telescoping_gap"] = gap;
  k.results["telescoping_tolerance"] = tol;
  k.check("poisson.telescoping_gap", gap, "<=", g17(tol + 1e-9), gap <= tol + 1e-9);

  // Fitted constant C in sup |g|/u_phi^{1/3} <= C·‖f‖_γ over 200 seeded points.
  DriftSpec ds;
  ds.delta = k.c.drift.delta;
  ds.Qmax = k.c.drift.Qmax;
  ds.phi = PhiSpec::stretched_exp(k.c.drift.phi_B, k.c.drift.phi_beta);
  ds.metric = k.metric;
  UPhi uphi(ds, k.rho.dim());
  std::vector<TorusPoint> sample = sample_uniform(k.rho.dim(), 200, k.c.seed);
  std::vector<double> gs(sample.size());
  parallel_for(sample.size(), [&](std::size_t i) { gs[i] = solve(sample[i]).g; });
  double dom = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i)
    dom = std::max(dom, std::abs(gs[i]) / std::cbrt(uphi(sample[i])));
  double fnorm = certified_norm(k.f, k.f.gamma(), k.metric);
  k.results["domination_norm_p3"] = dom;
  k.results["fitted_C"] = dom / fnorm;
  k.methods["fitted_C"] = "sample-fit";
}

void cmd_degenerate(Context& k) {
  const auto& p = k.c.degenerate;
  DegenerateExample ex = degenerate_example();
  TorusPoint x = k.x.dim() == 2 ? k.x : TorusPoint(std::vector<double>{0.1, 0.2});
  double worst_res = 0.0, worst_sum = 0.0;
  std::string csv = "seed,max_abs_partial_sum,identity_residual\n";
  for (std::uint64_t s = 0; s < p.seeds; ++s) {
    BoundedSumResult b = bounded_sum_verify(ex.rho, ex.g, ex.f, x, p.n, k.c.seed + s);
    worst_res = std::max(worst_res, b.identity_residual);
    worst_sum = std::max(worst_sum, b.max_abs_partial_sum);
    csv += std::to_string(k.c.seed + s) + "," + g17(b.max_abs_partial_sum) + "," +
           g17(b.identity_residual) + "\n";
  }
  k.out.csv.emplace_back("degenerate.csv", csv);
  VarianceReport w = variance_along_walk(ex.rho, ex.g, x, p.n, k.c.seed);
  double worst_term = 0.0;
  for (double t : w.terms) worst_term = std::max(worst_term, std::abs(t));
  ClosureResult h = product_set_closure(ex.rho, 8, 4096);
  auto cert = find_coset_certificate(ex.rho, 8, 4096);
  double inv = invariance_check(h.elements, ex.g, sample_uniform(2, 200, k.c.seed));
  json hs = json::array();
  for (const LatticeMatrix& m : h.elements) hs.push_back(m.literal());
  k.results["identity_residual"] = worst_res;
  k.results["max_abs_partial_sum"] = worst_sum;
  k.results["max_variance_term"] = worst_term;
  k.results["closure"] = hs;
  k.results["closure_complete"] = h.complete;
  k.results["certificate"] = cert ? json{{"gamma", cert->gamma.literal()},
                                         {"max_word_len", cert->max_word_len},
                                         {"max_elems", cert->max_elems}}
                                  : json("not found within budget");
  k.results["invariance_deviation"] = inv;
  k.methods["Pg"] = "exact-one-step";
  k.methods["trajectories"] = "monte-carlo";
  k.check("degenerate.identity_residual", worst_res, "<=", "1e-09", worst_res <= 1e-9);
  k.check("degenerate.max_abs_partial_sum", worst_sum, "<=", "sqrt(2)",
          worst_sum <= std::sqrt(2.0));
  k.check("degenerate.max_variance_term", worst_term, "<=", "1e-09", worst_term <= 1e-9);
  k.check("degenerate.invariance", inv, "<=", "1e-12", inv <= 1e-12);
}

}  // namespace

std::string version_string() { return ERGOTORUS_VERSION; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "lln",     "clt",   "lil",
                                              "variance", "dioph",   "fourier", "drift",
                                              "poisson",  "degenerate-example"};
  return names;
}

bool CommandOutcome::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckLine& c) { return c.pass; });
}

CommandOutcome execute(const ExperimentConfig& config, std::string_view command) {
  Context k(config);
  const std::string cmd(command);
  if (cmd == "simulate") cmd_simulate(k);
  else if (cmd == "lln") cmd_lln(k);
  else if (cmd == "clt") cmd_clt(k);
  else if (cmd == "lil") cmd_lil(k);
  else if (cmd == "variance") cmd_variance(k);
  else if (cmd == "dioph") cmd_dioph(k);
  else if (cmd == "fourier") cmd_fourier(k);
  else if (cmd == "drift") cmd_drift(k);
  else if (cmd == "poisson") cmd_poisson(k);
  else if (cmd == "degenerate-example") cmd_degenerate(k);
  else throw Error(ErrorCode::kValidation, "command: unknown command '" + cmd + "'", "command");

  json report;
  report["command"] = cmd;
  report["version"] = version_string();
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  report["config_hash"] = hash;
  report["seed"] = config.seed;
  report["measure_hash"] = k.rho.content_hash();
  report["start"] = point_json(k.x);
  report["function"] = k.f.name();
  report["methods"] = k.methods;
  report["results"] = k.results;
  json checks = json::array();
  for (const CheckLine& c : k.out.checks) {
    checks.push_back({{"name", c.name},
                      {"value", num(c.value)},
                      {"relation", c.relation},
                      {"threshold", c.threshold},
                      {"pass", c.pass}});
  }
  report["checks"] = checks;
  k.out.json = report.dump(2) + "\n";
  return std::move(k.out);
}

int run(ExperimentConfig config, const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.seed) config.seed = *options.seed;
    if (options.out_dir) config.out_dir = *options.out_dir;
    if (config.budgets.threads > 0) set_thread_count(config.budgets.threads);
    CommandOutcome oc = execute(config, options.command);
    std::filesystem::create_directories(config.out_dir);
    auto write = [&](const std::string& name, const std::string& body) {
      std::ofstream f(std::filesystem::path(config.out_dir) / name, std::ios::binary);
      f << body;
      if (!f) throw Error(ErrorCode::kValidation, "out_dir: cannot write " + name, "out_dir");
    };
    write(options.command + ".json", oc.json);
    for (const auto& [name, body] : oc.csv) write(name, body);
    for (const CheckLine& c : oc.checks) {
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << g17(c.value) << " " << c.relation
          << " " << c.threshold << "\n";
    }
    if (options.check && !oc.all_pass()) return kExitCheck;
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::kBudgetExceeded:
        return kExitBudget;
      case ErrorCode::kValidation:
      case ErrorCode::kInvalidArgument:
      case ErrorCode::kDimensionMismatch:
      case ErrorCode::kDegenerate:
        return kExitValidation;
      default:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace ergotorus
