#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "osgm/dataio.hpp"
#include "osgm/diagnostics.hpp"
#include "osgm/precondlab.hpp"
#include "osgm/solvers.hpp"
#include "osgm/svg_plot.hpp"
#include "osgm/trace_io.hpp"

namespace osgm::cli {

// ---------------------------------------------------------------------------
// Run configuration
//
// INI grammar: "[section]" headers, "key = value" lines, ';' or '#' comments.
// Lists are comma separated. Unknown sections or keys are rejected.
//
//   [problem]  kind (generated|instance|libsvm|diagonal), n, sigma, seed,
//              path, lambda, h_min, h_max
//   [solver]   names, pattern, learner, eta, oracle, max_iters, grad_tol,
//              init_seed, z, heuristic_z, adagrad_eta, timing
//   [bench]    grid
//   [output]   dir
//   [verify]   bounds
// ---------------------------------------------------------------------------

struct ProblemSpec {
  std::string kind = "generated";
  int n = 100;
  double sigma = 1e-2;
  std::uint64_t seed = 0;
  std::string path;
  std::optional<double> lambda;  // SVM regularization; 5/n when absent
  double h_min = 1.0;            // diagonal problems
  double h_max = 1e4;
};

struct SolverSettings {
  std::vector<std::string> names;
  std::string pattern = "diagonal";
  std::string learner = "adagrad";
  double eta = 0.1;
  std::string oracle = "simple_comparison";
  long max_iters = 10000;
  double grad_tol = 1e-10;
  std::uint64_t init_seed = 0;
  std::optional<double> z;
  bool heuristic_z = false;
  double adagrad_eta = 0.1;
  bool timing = true;
};

struct RunConfig {
  ProblemSpec problem;
  SolverSettings solver;
  std::vector<double> grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::string output_dir = ".";
  std::vector<std::string> bounds;
};

inline const std::vector<std::string>& bench_solvers() {
  static const std::vector<std::string> names{"gd",      "optdiag-gd", "osgm-r", "osgm-g",
                                              "osgm-h",  "adagrad",    "agd",    "sagd"};
  return names;
}

inline std::string display_name(const std::string& solver) {
  static const std::map<std::string, std::string> names{
      {"gd", "GD"},         {"optdiag-gd", "OptDiagGD"}, {"osgm-r", "OSGM-R"},
      {"osgm-g", "OSGM-G"}, {"osgm-h", "OSGM-H"},        {"adagrad", "AdaGrad"},
      {"agd", "AGD"},       {"sagd", "SAGD"},            {"osgm-rz", "OSGM-RZ"},
      {"double-loop", "DoubleLoop"}};
  auto it = names.find(solver);
  return it == names.end() ? solver : it->second;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto& item : osgm::detail::split(s, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  if (!osgm::detail::read_double(trim(s), v)) {
    throw Error(ErrorCode::parse_error, "config: " + key + ": bad number '" + s + "'");
  }
  return v;
}

inline long to_long(const std::string& s, const std::string& key) {
  long v = 0;
  if (!osgm::detail::read_long(trim(s), v)) {
    throw Error(ErrorCode::parse_error, "config: " + key + ": bad integer '" + s + "'");
  }
  return v;
}

inline std::uint64_t to_u64(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw Error(ErrorCode::parse_error, "config: " + key + ": bad seed '" + s + "'");
  }
  return v;
}

inline bool to_bool(const std::string& s, const std::string& key) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::parse_error, "config: " + key + ": expected true/false, got '" + s + "'");
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string out;
  for (double d : v) out += (out.empty() ? "" : ",") + osgm::detail::format_double(d);
  return out;
}

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  static const std::set<std::string> kinds{"generated", "instance", "libsvm", "diagonal"};
  if (!kinds.count(cfg.problem.kind)) {
    throw Error(ErrorCode::invalid_argument,
                "problem.kind must be generated, instance, libsvm or diagonal");
  }
  if ((cfg.problem.kind == "instance" || cfg.problem.kind == "libsvm") && cfg.problem.path.empty()) {
    throw Error(ErrorCode::invalid_argument, "problem.path is required for kind " + cfg.problem.kind);
  }
  if (cfg.problem.n < 1) throw Error(ErrorCode::invalid_argument, "problem.n must be >= 1");
  if (!(cfg.problem.sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "problem.sigma must be >= 0");
  if (cfg.solver.learner != "adagrad" && cfg.solver.learner != "ogd") {
    throw Error(ErrorCode::invalid_argument, "solver.learner must be adagrad or ogd");
  }
  static const std::set<std::string> oracles{"none", "simple_comparison", "line_search",
                                             "steepest_descent"};
  if (!oracles.count(cfg.solver.oracle)) {
    throw Error(ErrorCode::invalid_argument,
                "solver.oracle must be none, simple_comparison, line_search or steepest_descent");
  }
  static const std::set<std::string> known{"gd",     "agd",     "sagd",    "adagrad",     "osgm-r",
                                           "osgm-g", "osgm-h",  "osgm-rz", "double-loop", "optdiag-gd"};
  for (const auto& s : cfg.solver.names) {
    if (!known.count(s)) throw Error(ErrorCode::invalid_argument, "unknown solver '" + s + "'");
  }
  for (const auto& b : cfg.bounds) {
    if (!parse_bound(b)) throw Error(ErrorCode::invalid_argument, "unknown bound '" + b + "'");
  }
  for (double g : cfg.grid) {
    if (!(g > 0.0)) throw Error(ErrorCode::invalid_argument, "bench.grid entries must be positive");
  }
  if (cfg.solver.max_iters < 0) throw Error(ErrorCode::invalid_argument, "solver.max_iters must be >= 0");
}

inline RunConfig parse_run_config(const std::string& text) {
  // Boost's INI reader only knows ';' comments.
  std::string cleaned;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned += line + '\n';
  }
  boost::property_tree::ptree tree;
  std::istringstream in(cleaned);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::parse_error, "config line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::map<std::string, std::set<std::string>> schema{
      {"problem", {"kind", "n", "sigma", "seed", "path", "lambda", "h_min", "h_max"}},
      {"solver",
       {"names", "pattern", "learner", "eta", "oracle", "max_iters", "grad_tol", "init_seed", "z",
        "heuristic_z", "adagrad_eta", "timing"}},
      {"bench", {"grid"}},
      {"output", {"dir"}},
      {"verify", {"bounds"}}};

  RunConfig cfg;
  for (const auto& [section, body] : tree) {
    auto sec = schema.find(section);
    if (sec == schema.end() || body.empty()) {
      throw Error(ErrorCode::parse_error, "config: unknown section '" + section + "'");
    }
    for (const auto& [key, node] : body) {
      if (!sec->second.count(key)) {
        throw Error(ErrorCode::parse_error, "config: unknown key '" + section + "." + key + "'");
      }
      const std::string v = detail::trim(node.data());
      const std::string k = section + "." + key;
      if (section == "problem") {
        auto& p = cfg.problem;
        if (key == "kind") p.kind = v;
        else if (key == "n") p.n = static_cast<int>(detail::to_long(v, k));
        else if (key == "sigma") p.sigma = detail::to_double(v, k);
        else if (key == "seed") p.seed = detail::to_u64(v, k);
        else if (key == "path") p.path = v;
        else if (key == "lambda") p.lambda = detail::to_double(v, k);
        else if (key == "h_min") p.h_min = detail::to_double(v, k);
        else if (key == "h_max") p.h_max = detail::to_double(v, k);
      } else if (section == "solver") {
        auto& s = cfg.solver;
        if (key == "names") s.names = detail::parse_list(v);
        else if (key == "pattern") s.pattern = v;
        else if (key == "learner") s.learner = v;
        else if (key == "eta") s.eta = detail::to_double(v, k);
        else if (key == "oracle") s.oracle = v;
        else if (key == "max_iters") s.max_iters = detail::to_long(v, k);
        else if (key == "grad_tol") s.grad_tol = detail::to_double(v, k);
        else if (key == "init_seed") s.init_seed = detail::to_u64(v, k);
        else if (key == "z") s.z = detail::to_double(v, k);
        else if (key == "heuristic_z") s.heuristic_z = detail::to_bool(v, k);
        else if (key == "adagrad_eta") s.adagrad_eta = detail::to_double(v, k);
        else if (key == "timing") s.timing = detail::to_bool(v, k);
      } else if (section == "bench") {
        cfg.grid.clear();
        for (const auto& item : detail::parse_list(v)) cfg.grid.push_back(detail::to_double(item, k));
      } else if (section == "output") {
        cfg.output_dir = v;
      } else if (section == "verify") {
        cfg.bounds = detail::parse_list(v);
      }
    }
  }
  validate(cfg);
  return cfg;
}

/// Resolved configuration in the same grammar, every key spelled out.
inline std::string to_ini(const RunConfig& cfg) {
  using osgm::detail::format_double;
  std::ostringstream o;
  const auto& p = cfg.problem;
  o << "[problem]\n"
    << "kind = " << p.kind << "\n"
    << "n = " << p.n << "\n"
    << "sigma = " << format_double(p.sigma) << "\n"
    << "seed = " << p.seed << "\n";
  if (!p.path.empty()) o << "path = " << p.path << "\n";
  if (p.lambda) o << "lambda = " << format_double(*p.lambda) << "\n";
  o << "h_min = " << format_double(p.h_min) << "\n"
    << "h_max = " << format_double(p.h_max) << "\n\n";
  const auto& s = cfg.solver;
  o << "[solver]\n";
  if (!s.names.empty()) o << "names = " << detail::join(s.names) << "\n";
  o << "pattern = " << s.pattern << "\n"
    << "learner = " << s.learner << "\n"
    << "eta = " << format_double(s.eta) << "\n"
    << "oracle = " << s.oracle << "\n"
    << "max_iters = " << s.max_iters << "\n"
    << "grad_tol = " << format_double(s.grad_tol) << "\n"
    << "init_seed = " << s.init_seed << "\n";
  if (s.z) o << "z = " << format_double(*s.z) << "\n";
  o << "heuristic_z = " << (s.heuristic_z ? "true" : "false") << "\n"
    << "adagrad_eta = " << format_double(s.adagrad_eta) << "\n"
    << "timing = " << (s.timing ? "true" : "false") << "\n\n";
  o << "[bench]\ngrid = " << detail::join(cfg.grid) << "\n\n";
  o << "[output]\ndir = " << cfg.output_dir << "\n";
  if (!cfg.bounds.empty()) o << "\n[verify]\nbounds = " << detail::join(cfg.bounds) << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// Problems and solver settings
// ---------------------------------------------------------------------------

struct Problem {
  Objective obj;
  Vec x1;
  std::optional<Mat> hessian;
  std::string label;
  std::optional<double> reference;  // reporting reference for f when f* is unknown
};

/// Reporting reference for objectives without a known optimum: the best
/// value of a long strongly convex accelerated run.
inline double reference_value(const Objective& obj, const Vec& x1) {
  SolverConfig ref;
  ref.variant = obj.strong_convexity() > 0.0 ? Variant::sagd : Variant::agd;
  ref.max_iters = 100000;
  ref.grad_tol = 1e-12;
  ref.record_timing = false;
  return run_baseline(ref, obj, x1).f_best;
}

inline Problem build_problem(const ProblemSpec& spec, std::uint64_t init_seed) {
  Problem p;
  if (spec.kind == "generated" || spec.kind == "instance") {
    GeneratedInstance inst = spec.kind == "generated" ? gen_least_squares(spec.n, spec.sigma, spec.seed)
                                                      : load_instance(spec.path);
    p.obj = inst.objective();
    p.label = spec.kind == "generated" ? "least squares n=" + std::to_string(inst.n) : spec.path;
  } else if (spec.kind == "diagonal") {
    p.obj = log_spaced_diagonal_problem(spec.n, spec.h_min, spec.h_max, spec.seed);
    p.label = "diagonal quadratic n=" + std::to_string(spec.n);
  } else {
    p.obj = make_svm(load_libsvm(spec.path), spec.lambda);
    p.label = spec.path;
  }
  p.hessian = p.obj.constant_hessian();
  p.x1 = init_point(static_cast<int>(p.obj.dim()), init_seed);
  if (!p.obj.f_star()) p.reference = reference_value(p.obj, p.x1);
  return p;
}

inline OracleKind parse_oracle(const std::string& s) {
  if (s == "none") return OracleKind::none;
  if (s == "line_search") return OracleKind::line_search;
  if (s == "steepest_descent") return OracleKind::steepest_descent;
  return OracleKind::simple_comparison;
}

inline std::shared_ptr<const ScalingPattern> pattern_for(const std::string& text, Eigen::Index n) {
  if (text == "diagonal") return std::make_shared<ScalingPattern>(ScalingPattern::diagonal(n));
  if (text == "full") return std::make_shared<ScalingPattern>(ScalingPattern::full(n));
  auto p = std::make_shared<ScalingPattern>(parse_pattern(text));
  if (p->n != n) throw Error(ErrorCode::dimension_mismatch, "pattern dimension differs from the problem");
  return p;
}

/// Solver configuration for one named solver. `eta` overrides the learner
/// stepsize for OSGM and the x-space stepsize for AdaGrad.
inline SolverConfig solver_config(const std::string& name, const SolverSettings& s,
                                  const Problem& prob, std::optional<double> eta = std::nullopt) {
  SolverConfig cfg;
  cfg.max_iters = s.max_iters;
  cfg.grad_tol = s.grad_tol;
  cfg.seed = s.init_seed;
  cfg.record_timing = s.timing;
  cfg.report_reference = prob.reference;
  cfg.learner = s.learner == "ogd" ? LearnerKind::ogd : LearnerKind::adagrad;
  cfg.learner_eta = eta.value_or(s.eta);
  cfg.baseline_eta = eta.value_or(s.adagrad_eta);
  cfg.oracle = parse_oracle(s.oracle);
  cfg.heuristic_z = s.heuristic_z;
  std::string solver = name;
  // Without f* the ratio method runs on a lower bound.
  if (solver == "osgm-r" && !prob.obj.f_star()) solver = "osgm-rz";
  if (solver == "gd") cfg.variant = Variant::gd;
  else if (solver == "agd") cfg.variant = Variant::agd;
  else if (solver == "sagd") cfg.variant = Variant::sagd;
  else if (solver == "adagrad") cfg.variant = Variant::adagrad;
  else if (solver == "osgm-r") cfg.variant = Variant::osgm_r;
  else if (solver == "osgm-g") cfg.variant = Variant::osgm_g;
  else if (solver == "osgm-h") cfg.variant = Variant::osgm_h;
  else if (solver == "osgm-rz" || solver == "double-loop") {
    cfg.variant = solver == "osgm-rz" ? Variant::osgm_rz : Variant::double_loop;
    if (s.z) {
      cfg.z_init = s.z;
    } else if (prob.obj.name() == "svm_squared_hinge" || prob.obj.name() == "least_squares") {
      cfg.z_init = 0.0;  // both objectives are non-negative
    } else {
      throw Error(ErrorCode::invalid_argument, solver + " needs solver.z");
    }
  } else if (solver == "optdiag-gd") {
    if (!prob.hessian) {
      throw Error(ErrorCode::not_applicable, "optdiag-gd needs a constant Hessian (" + prob.obj.name() + ")");
    }
    cfg.variant = Variant::precond_gd;
    const auto n = prob.obj.dim();
    auto pattern = std::make_shared<ScalingPattern>(ScalingPattern::diagonal(n));
    cfg.fixed_scaling = ScalingMatrix{pattern, approx_optimal_diagonal(*prob.hessian).d};
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown solver '" + name + "'");
  }
  if (is_osgm(cfg.variant)) cfg.pattern = pattern_for(s.pattern, prob.obj.dim());
  return cfg;
}

inline bool uses_stepsize(const std::string& name) {
  return name == "adagrad" || name.rfind("osgm", 0) == 0 || name == "double-loop";
}

// ---------------------------------------------------------------------------
// Bench
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string solver;
  bool applicable = true;
  std::string note;  // reason when not applicable
  std::optional<double> stepsize;
  long iterations = 0;
  bool converged = false;  // reached the gradient tolerance
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  long grad_evals = 0;
  double wall_seconds = 0.0;
  std::vector<TraceRecord> trace;
};

namespace detail {

struct Cell {
  std::size_t solver_index;
  std::optional<double> stepsize;
};

inline BenchRow run_cell(const std::string& name, const SolverSettings& s, const Problem& prob,
                         std::optional<double> eta) {
  BenchRow row;
  row.solver = name;
  row.stepsize = eta;
  try {
    SolverConfig cfg = solver_config(name, s, prob, eta);
    const auto start = std::chrono::steady_clock::now();
    SolveResult res = run_solver(cfg, prob.obj, prob.x1);
    const auto stop = std::chrono::steady_clock::now();
    row.wall_seconds = s.timing ? std::chrono::duration<double>(stop - start).count() : 0.0;
    row.iterations = res.iterations;
    row.converged = res.stop == StopReason::grad_tol;
    row.final_gap = prob.obj.f_star() ? *prob.obj.gap(res.x_best)
                                      : res.f_best - prob.reference.value_or(0.0);
    row.grad_evals = res.grad_evals();
    row.trace = std::move(res.trace);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::not_applicable && e.code() != ErrorCode::hvp_unavailable) throw;
    row.applicable = false;
    row.note = e.what();
  }
  return row;
}

/// Grid winner: cells that reach the gradient tolerance beat the rest; among
/// those fewer iterations win, otherwise the smaller final gap wins. Ties go
/// to the smaller stepsize (the grid is scanned in increasing order).
inline bool better(const BenchRow& a, const BenchRow& b) {
  if (a.converged != b.converged) return a.converged;
  if (a.converged) return a.iterations < b.iterations;
  if (std::isnan(b.final_gap)) return !std::isnan(a.final_gap);
  return a.final_gap < b.final_gap;
}

}  // namespace detail

/// Runs every (solver, stepsize) cell, in parallel batches, and keeps one
/// grid-tuned row per solver. Results are merged by cell index, so the
/// output does not depend on scheduling.
inline std::vector<BenchRow> run_bench(const std::vector<std::string>& solvers,
                                       const SolverSettings& s, const std::vector<double>& grid,
                                       const Problem& prob) {
  std::vector<double> sorted_grid = grid;
  std::sort(sorted_grid.begin(), sorted_grid.end());
  std::vector<detail::Cell> cells;
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    if (uses_stepsize(solvers[i])) {
      for (double eta : sorted_grid) cells.push_back({i, eta});
    } else {
      cells.push_back({i, std::nullopt});
    }
  }
  std::vector<BenchRow> results(cells.size());
  const std::size_t batch = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < cells.size(); start += batch) {
    std::vector<std::future<BenchRow>> futures;
    const std::size_t end = std::min(cells.size(), start + batch);
    for (std::size_t c = start; c < end; ++c) {
      futures.push_back(std::async(std::launch::async, [&, c] {
        return detail::run_cell(solvers[cells[c].solver_index], s, prob, cells[c].stepsize);
      }));
    }
    for (std::size_t c = start; c < end; ++c) results[c] = futures[c - start].get();
  }

  std::vector<BenchRow> rows;
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    std::optional<BenchRow> best;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c].solver_index != i) continue;
      BenchRow& r = results[c];
      if (!best) best = std::move(r);
      else if (r.applicable && (!best->applicable || detail::better(r, *best))) best = std::move(r);
    }
    if (best && !best->applicable) best->stepsize.reset();
    rows.push_back(std::move(*best));
  }
  return rows;
}

/// Summary CSV: solver,stepsize,iters,final_gap,grad_evals,wall_time_s.
/// iters is "max" for runs that did not reach the gradient tolerance and
/// "n/a" marks solvers that do not apply to the problem.
inline std::string format_summary(const std::vector<BenchRow>& rows) {
  using osgm::detail::format_double;
  std::string out = "solver,stepsize,iters,final_gap,grad_evals,wall_time_s\n";
  for (const auto& r : rows) {
    out += display_name(r.solver) + ",";
    if (!r.applicable) {
      out += "n/a,n/a,n/a,n/a,n/a\n";
      continue;
    }
    out += (r.stepsize ? format_double(*r.stepsize) : std::string("-")) + ",";
    out += (r.converged ? std::to_string(r.iterations) : std::string("max")) + ",";
    out += osgm::detail::csv_double(r.final_gap) + ",";
    out += std::to_string(r.grad_evals) + ",";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", r.wall_seconds);
    out += buf;
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline std::string format_report(const HindsightReport& r, Eigen::Index n) {
  using osgm::detail::format_double;
  std::ostringstream o;
  o << "n = " << n << "\n"
    << "kappa = " << format_double(r.kappa) << "\n"
    << "kappa_jacobi = " << format_double(r.kappa_jacobi) << "\n"
    << "kappa_star_ub = " << format_double(r.kappa_star_ub) << "\n"
    << "feasibility_margin = " << format_double(r.feasibility_margin) << "\n"
    << "omega_star = " << format_double(r.omega_star) << "\n"
    << "lambda_star = " << format_double(r.lambda_star) << "\n"
    << "diag_precond = ";
  for (Eigen::Index i = 0; i < r.diag_precond.size(); ++i) {
    o << (i ? "," : "") << format_double(r.diag_precond[i]);
  }
  o << "\npattern_top_k = ";
  for (std::size_t i = 0; i < r.pattern.mask.size(); ++i) {
    o << (i ? "," : "") << r.pattern.mask[i].first + 1 << ":" << r.pattern.mask[i].second + 1;
  }
  o << "\npattern_converged = " << (r.pattern.converged ? "true" : "false") << "\n";
  return o.str();
}

struct CliStreams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline void ensure_parent(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

/// Options shared by `run` and `bench` that override the config file.
struct Overrides {
  std::string config_path;
  std::string instance;
  std::string libsvm;
  std::optional<double> lambda;
  std::optional<std::string> pattern, learner, oracle;
  std::optional<double> eta, grad_tol, z;
  std::optional<long> max_iters;
  std::optional<std::uint64_t> init_seed;
  bool heuristic_z = false;
  bool no_timing = false;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "run configuration file");
    app->add_option("--instance", instance, "least-squares instance file");
    app->add_option("--libsvm", libsvm, "LIBSVM data file (squared-hinge SVM)");
    app->add_option("--lambda", lambda, "SVM regularization (default 5/n)");
    app->add_option("--pattern", pattern, "scaling pattern: diagonal, full or a pattern string");
    app->add_option("--learner", learner, "adagrad or ogd");
    app->add_option("--oracle", oracle, "none, simple_comparison, line_search, steepest_descent");
    app->add_option("--eta", eta, "learner stepsize");
    app->add_option("--max-iters", max_iters, "iteration budget");
    app->add_option("--grad-tol", grad_tol, "gradient-norm tolerance");
    app->add_option("--init-seed", init_seed, "seed of the starting point");
    app->add_option("--z", z, "lower bound for osgm-rz / double-loop");
    app->add_flag("--heuristic-z", heuristic_z, "adjust z when it exceeds f(x^k)");
    app->add_flag("--no-timing", no_timing, "record zero wall times");
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_run_config(read_file(config_path));
    if (!instance.empty()) {
      cfg.problem.kind = "instance";
      cfg.problem.path = instance;
    }
    if (!libsvm.empty()) {
      cfg.problem.kind = "libsvm";
      cfg.problem.path = libsvm;
    }
    if (lambda) cfg.problem.lambda = lambda;
    if (pattern) cfg.solver.pattern = *pattern;
    if (learner) cfg.solver.learner = *learner;
    if (oracle) cfg.solver.oracle = *oracle;
    if (eta) cfg.solver.eta = *eta;
    if (max_iters) cfg.solver.max_iters = *max_iters;
    if (grad_tol) cfg.solver.grad_tol = *grad_tol;
    if (init_seed) cfg.solver.init_seed = *init_seed;
    if (z) cfg.solver.z = z;
    if (heuristic_z) cfg.solver.heuristic_z = true;
    if (no_timing) cfg.solver.timing = false;
    validate(cfg);
    return cfg;
  }
};

}  // namespace detail

/// Entry point of the command-line tool. Exit codes: 0 success, 1 usage or
/// input error, 2 verification failure.
inline int run_cli(int argc, const char* const* argv, CliStreams io) {
  CLI::App app{"Online scaled gradient methods: instance generation, solver runs, benchmarks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a least-squares instance");
  int gen_n = 100;
  double gen_sigma = 1e-2;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "dimension")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", gen_sigma, "diagonal shift")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("-o,--output", gen_out, "output file")->required();

  // run
  auto* run = app.add_subcommand("run", "run one solver and write its trace");
  detail::Overrides run_opts;
  run_opts.add_to(run);
  std::string run_solver_name;
  std::string run_out;
  run->add_option("--solver", run_solver_name, "solver name")->required();
  run->add_option("-o,--output", run_out, "trace CSV")->required();

  // bench
  auto* bench = app.add_subcommand("bench", "grid-tuned comparison of all solvers");
  detail::Overrides bench_opts;
  bench_opts.add_to(bench);
  std::string bench_dir;
  bench->add_option("-o,--outdir", bench_dir, "output directory");

  // precond
  auto* precond = app.add_subcommand("precond", "condition numbers and diagonal preconditioner");
  std::string pc_instance;
  int toy_n = 0;
  double toy_scale = 50.0, toy_coupling = 0.1;
  std::uint64_t toy_seed = 0;
  long top_k = -1;
  std::string pc_out;
  precond->add_option("--instance", pc_instance, "least-squares instance file (uses A'A)");
  precond->add_option("--toy-n", toy_n, "near-diagonal toy matrix of this size");
  precond->add_option("--toy-scale", toy_scale, "diagonal range of the toy matrix");
  precond->add_option("--toy-coupling", toy_coupling, "off-diagonal strength of the toy matrix");
  precond->add_option("--seed", toy_seed, "toy matrix seed");
  precond->add_option("--top-k", top_k, "entries in the sparsity mask (default n)");
  precond->add_option("-o,--output", pc_out, "write the report to a file");

  // verify
  auto* verify = app.add_subcommand("verify", "check trajectory inequalities on a trace CSV");
  std::string vf_trace, vf_instance, vf_measure = "fgap";
  std::vector<std::string> vf_bounds;
  std::optional<double> vf_mu, vf_l, vf_dist;
  double vf_tol = 1e-9;
  verify->add_option("--trace", vf_trace, "trace CSV")->required();
  verify->add_option("--bound", vf_bounds, "bound name (repeatable)")->required();
  verify->add_option("--instance", vf_instance, "instance file for mu, L and ||A^{-1}||_F");
  verify->add_option("--mu", vf_mu, "strong convexity");
  verify->add_option("--L", vf_l, "smoothness");
  verify->add_option("--scaling-distance", vf_dist, "||P1 - A^{-1}||_F");
  verify->add_option("--measure", vf_measure, "fgap or gnorm (amgm)");
  verify->add_option("--tol", vf_tol, "allowed relative violation");

  // plot
  auto* plot = app.add_subcommand("plot", "SVG of log10(f gap) per trace");
  std::vector<std::string> pl_traces;
  std::string pl_out, pl_title = "f gap";
  plot->add_option("--trace", pl_traces, "[label=]path (repeatable)")->required();
  plot->add_option("-o,--output", pl_out, "SVG file")->required();
  plot->add_option("--title", pl_title, "plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return 1;
  }

  try {
    if (gen->parsed()) {
      GeneratedInstance inst = gen_least_squares(gen_n, gen_sigma, gen_seed);
      detail::ensure_parent(gen_out);
      write_file(gen_out, serialize_instance(inst));
      io.out << "wrote " << gen_out << "\n";
      return 0;
    }

    if (run->parsed()) {
      RunConfig cfg = run_opts.resolve();
      cfg.solver.names = {run_solver_name};
      validate(cfg);
      Problem prob = build_problem(cfg.problem, cfg.solver.init_seed);
      SolverConfig scfg = solver_config(run_solver_name, cfg.solver, prob);
      SolveResult res = run_solver(scfg, prob.obj, prob.x1);
      detail::ensure_parent(run_out);
      write_file(run_out, trace_to_csv(res.trace));
      cfg.output_dir = std::filesystem::path(run_out).parent_path().string();
      if (cfg.output_dir.empty()) cfg.output_dir = ".";
      write_file(run_out + ".config.ini", to_ini(cfg));
      io.out << display_name(run_solver_name) << ": " << to_string(res.stop) << " after "
             << res.iterations << " iterations, " << res.grad_evals() << " gradients, final gap "
             << osgm::detail::csv_double(res.trace.back().f_gap) << "\n";
      return 0;
    }

    if (bench->parsed()) {
      RunConfig cfg = bench_opts.resolve();
      if (!bench_dir.empty()) cfg.output_dir = bench_dir;
      if (cfg.solver.names.empty()) cfg.solver.names = bench_solvers();
      Problem prob = build_problem(cfg.problem, cfg.solver.init_seed);
      std::vector<BenchRow> rows = run_bench(cfg.solver.names, cfg.solver, cfg.grid, prob);
      std::filesystem::create_directories(cfg.output_dir);
      const std::filesystem::path dir(cfg.output_dir);
      const std::string summary = format_summary(rows);
      write_file((dir / "summary.csv").string(), summary);
      write_file((dir / "config.ini").string(), to_ini(cfg));
      std::vector<PlotSeries> series;
      for (const auto& r : rows) {
        if (!r.applicable) continue;
        write_file((dir / ("trace_" + r.solver + ".csv")).string(), trace_to_csv(r.trace));
        series.push_back({display_name(r.solver), r.trace});
      }
      PlotOptions popt;
      popt.title = prob.label;
      write_file((dir / "convergence.svg").string(), render_svg(series, popt));
      io.out << summary;
      return 0;
    }

    if (precond->parsed()) {
      Mat a;
      if (!pc_instance.empty()) {
        GeneratedInstance inst = load_instance(pc_instance);
        a = inst.a.transpose() * inst.a;
      } else if (toy_n > 1) {
        a = toy_near_diagonal(toy_n, toy_scale, toy_coupling, toy_seed);
      } else {
        io.err << "error: precond needs --instance or --toy-n\n";
        return 1;
      }
      const Eigen::Index k = top_k < 0 ? a.rows() : top_k;
      const std::string report = format_report(hindsight_report(a, k), a.rows());
      if (!pc_out.empty()) {
        detail::ensure_parent(pc_out);
        write_file(pc_out, report);
      }
      io.out << report;
      return 0;
    }

    if (verify->parsed()) {
      std::vector<TraceRecord> trace = load_trace(vf_trace);
      BoundContext ctx;
      if (vf_measure == "gnorm") ctx.measure = Measure::gnorm;
      else if (vf_measure != "fgap") throw Error(ErrorCode::invalid_argument, "--measure must be fgap or gnorm");
      if (!vf_instance.empty()) {
        GeneratedInstance inst = load_instance(vf_instance);
        const Mat h = inst.a.transpose() * inst.a;
        const Vec ev = sym_eigenvalues(h);
        ctx.smoothness = ev[ev.size() - 1];
        ctx.strong_convexity = ev[0];
        if (ev[0] > 0.0) ctx.scaling_distance = h.llt().solve(Mat::Identity(h.rows(), h.cols())).norm();
      }
      if (vf_mu) ctx.strong_convexity = vf_mu;
      if (vf_l) ctx.smoothness = vf_l;
      if (vf_dist) ctx.scaling_distance = vf_dist;
      int code = 0;
      for (const auto& name : vf_bounds) {
        auto bound = parse_bound(name);
        if (!bound) throw Error(ErrorCode::invalid_argument, "unknown bound '" + name + "'");
        VerifyReport rep = verify_trace(trace, *bound, ctx);
        if (!rep.applicable) {
          io.out << name << ": not applicable (" << rep.reason << ")\n";
          code = std::max(code, 1);
          continue;
        }
        const bool ok = rep.passed(vf_tol);
        io.out << name << ": " << (ok ? "pass" : "FAIL") << " checked=" << rep.checked
               << " max_violation=" << osgm::detail::format_double(rep.max_violation)
               << " worst_k=" << rep.worst_k << "\n";
        if (!ok) code = 2;
      }
      return code;
    }

    if (plot->parsed()) {
      std::vector<PlotSeries> series;
      for (const auto& spec : pl_traces) {
        const auto eq = spec.find('=');
        const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
        const std::string label =
            eq == std::string::npos ? std::filesystem::path(spec).stem().string() : spec.substr(0, eq);
        series.push_back({label, load_trace(path)});
      }
      PlotOptions popt;
      popt.title = pl_title;
      detail::ensure_parent(pl_out);
      write_file(pl_out, render_svg(series, popt));
      io.out << "wrote " << pl_out << "\n";
      return 0;
    }
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    io.err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace osgm::cli
