// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <Eigen/QR>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "osgm/cli.hpp"
#include "osgm/osgm.hpp"

using namespace osgm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat random_spd(Rng& rng, int n, double lo, double hi) {
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Mat q = Eigen::HouseholderQR<Mat>(g).householderQ();
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = lo + (hi - lo) * rng.uniform();
  ev[0] = lo;
  ev[n - 1] = hi;
  Mat h = q * ev.asDiagonal() * q.transpose();
  return (0.5 * (h + h.transpose())).eval();
}

Vec random_vec(Rng& rng, int n, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// Steps taken before the first row satisfying pred; -1 when none does.
long steps_until(const std::vector<TraceRecord>& trace,
                 const std::function<bool(const TraceRecord&)>& pred) {
  for (const auto& r : trace)
    if (pred(r)) return r.iter - 1;
  return -1;
}

const std::vector<double> kGrid{1e-3, 1e-2, 1e-1, 1.0, 10.0};

cli::SolverSettings bench_settings(long max_iters) {
  cli::SolverSettings s;
  s.pattern = "diagonal";
  s.learner = "adagrad";
  s.oracle = "simple_comparison";
  s.max_iters = max_iters;
  s.grad_tol = 1e-10;
  s.timing = false;
  return s;
}

SolveResult run_gd(const Objective& obj, const Vec& x1, double grad_tol = 1e-10) {
  SolverConfig cfg;
  cfg.variant = Variant::gd;
  cfg.max_iters = 5000000;
  cfg.grad_tol = grad_tol;
  cfg.record_timing = false;
  return run_baseline(cfg, obj, x1);
}

// Shared instance of criteria 2, 3 and 8.
struct DiagonalCase {
  cli::Problem prob;
  SolveResult gd;
};

const DiagonalCase& diagonal_case() {
  static const DiagonalCase c = [] {
    DiagonalCase out;
    out.prob.obj = log_spaced_diagonal_problem(50, 1.0, 1e4, 7);
    out.prob.x1 = init_point(50, 3);
    out.prob.hessian = out.prob.obj.constant_hessian();
    out.prob.label = "diagonal n=50";
    out.gd = run_gd(out.prob.obj, out.prob.x1);
    return out;
  }();
  return c;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const int n = 20;
  GeneratedInstance inst = gen_least_squares(n, 0.1, 0);
  Objective obj = inst.objective();
  const Mat h = inst.a.transpose() * inst.a;
  const double L = obj.smoothness();
  const double dist = h.llt().solve(Mat::Identity(n, n)).norm();  // ||P1 - A^{-1}||_F with P1 = 0

  SolverConfig cfg;
  cfg.variant = Variant::osgm_r;
  cfg.pattern = std::make_shared<ScalingPattern>(ScalingPattern::full(n));
  cfg.learner = LearnerKind::ogd;
  cfg.learner_eta = 1.0 / (4.0 * L * L);
  cfg.oracle = OracleKind::none;
  cfg.max_iters = 20000;
  cfg.grad_tol = 1e-14;
  cfg.record_timing = false;
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult res = run_osgm(cfg, obj, init_point(n, 1));
  const double secs = seconds_since(t0);

  const auto& tr = res.trace;
  std::size_t end = 0;  // first row with gap < 1e-12
  while (end < tr.size() && !(tr[end].f_gap < 1e-12)) ++end;
  if (end == tr.size()) return {false, "f gap never dropped below 1e-12"};

  // Bound at every K while the gap is at least 1e-12, with relative slack 1e-6.
  double worst = 0.0;
  const double c = 4.0 * L * L * dist * dist;
  for (std::size_t k = 1; k <= end; ++k) {
    const double K = static_cast<double>(k);
    const double log_rhs = std::log(tr[0].f_gap) + K * std::log(c / K) + std::log1p(1e-6);
    const double v = tr[k].f_gap > 0.0 ? std::log(tr[k].f_gap) - log_rhs : -1.0;
    worst = std::max(worst, v);
  }
  bool decreasing = end >= 6;
  std::string ratios;
  for (std::size_t k = end - 4; end >= 6 && k <= end; ++k) {
    const double q = tr[k].f_gap / tr[k - 1].f_gap;
    ratios += num(q) + " ";
    if (k > end - 4 && !(q < tr[k - 1].f_gap / tr[k - 2].f_gap)) decreasing = false;
  }
  const bool ok = worst <= 0.0 && decreasing && secs < 5.0;
  return {ok, "gap<1e-12 after " + std::to_string(end) + " iters, bound log-excess " + num(worst) +
                  ", last ratios " + ratios + "(" + (decreasing ? "decreasing" : "NOT decreasing") +
                  "), " + num(secs) + " s"};
}

Outcome criterion2() {
  const auto& dc = diagonal_case();
  const long gd_iters = dc.gd.iterations;
  if (dc.gd.stop != StopReason::grad_tol) return {false, "GD did not converge"};
  const long budget = gd_iters / 10;
  const auto t0 = std::chrono::steady_clock::now();
  auto rows = cli::run_bench({"osgm-r"}, bench_settings(budget), kGrid, dc.prob);
  const double secs = seconds_since(t0);
  const auto& r = rows.at(0);
  const bool reached = !r.trace.empty() && r.trace.back().grad_norm <= 1e-10;
  const bool ok = reached && r.iterations <= budget && secs < 10.0;
  return {ok, "GD " + std::to_string(gd_iters) + " iters; OSGM-R (eta " +
                  num(r.stepsize.value_or(0.0)) + ") " + std::to_string(r.iterations) +
                  " iters, limit " + std::to_string(budget) + ", tuning " + num(secs) + " s"};
}

Outcome criterion3() {
  const auto& dc = diagonal_case();
  auto below = [](const TraceRecord& r) { return r.f_gap <= 1e-8; };
  const long gd_iters = steps_until(dc.gd.trace, below);
  if (gd_iters < 0) return {false, "GD never reached gap 1e-8"};
  auto rows = cli::run_bench({"osgm-h"}, bench_settings(dc.gd.iterations), kGrid, dc.prob);
  const auto& tr = rows.at(0).trace;
  const long h_iters = steps_until(tr, below);
  bool monotone = true;
  for (std::size_t k = 1; k < tr.size(); ++k)
    if (tr[k].f_value > tr[k - 1].f_value) monotone = false;
  const bool ok = h_iters >= 0 && h_iters <= gd_iters && monotone;
  return {ok, "gap<=1e-8: GD " + std::to_string(gd_iters) + " iters, OSGM-H " +
                  std::to_string(h_iters) + " iters; f trace " +
                  (monotone ? "monotone" : "NOT monotone")};
}

Outcome criterion4() {
  const long K = 200;
  long checks = 0;
  long failures = 0;
  double worst_r = -1e300, worst_h = -1e300;  // max of regret - bound
  for (int inst = 0; inst < 100; ++inst) {
    Rng rng(1000 + inst);
    const int n = 2 + inst % 9;
    const double mu = 0.5 + 0.5 * rng.uniform();
    const double Lh = 2.0 + 2.0 * rng.uniform();
    Objective obj = make_objective<QuadraticInstance>(random_spd(rng, n, mu, Lh), random_vec(rng, n));
    const ConstantsEstimate est = estimate_constants(obj);
    const double L = obj.smoothness();
    const double D = 1.0 / est.strong_convexity;
    auto pattern = std::make_shared<ScalingPattern>(
        (inst % 2 == 0 ? ScalingPattern::full(n) : ScalingPattern::diagonal(n)).with_ball(D));
    const Vec x1 = random_vec(rng, n, 3.0);

    std::vector<Vec> comparators;
    for (int j = 0; j < 20; ++j) {
      Vec dir = random_vec(rng, static_cast<int>(pattern->num_coeffs()));
      comparators.push_back(dir / dir.norm() * D * rng.uniform());
    }

    for (SurrogateKind kind : {SurrogateKind::ratio, SurrogateKind::hyper}) {
      SolverConfig cfg;
      cfg.variant = kind == SurrogateKind::ratio ? Variant::osgm_r : Variant::osgm_h;
      cfg.pattern = pattern;
      cfg.learner = LearnerKind::ogd;
      cfg.learner_eta = theory_stepsize(kind, L, D, K);
      cfg.oracle = kind == SurrogateKind::ratio ? OracleKind::none : OracleKind::simple_comparison;
      cfg.max_iters = K;
      // Below this the hypergradient loss is dominated by cancellation in f(x+) - f(x).
      cfg.grad_tol = 1e-6;
      cfg.record_timing = false;
      cfg.record_steps = true;
      SolveResult res = run_osgm(cfg, obj, x1);
      FrozenLosses losses(obj, kind, res.steps);
      const double k_eff = static_cast<double>(losses.size());
      std::vector<Vec> all = comparators;
      all.push_back(hindsight_best(losses, *pattern, std::nullopt, 2000).coeffs);
      for (const Vec& p : all) {
        const double regret = regret_against(losses, *pattern, p);
        double bound = 0.0;
        if (kind == SurrogateKind::ratio) {
          const double eta = cfg.learner_eta;
          const double dist2 = (materialize(*pattern, p)).squaredNorm();  // P1 = 0
          bound = dist2 / eta + 4.0 * L * L * eta * losses.total(*pattern, p);
          worst_r = std::max(worst_r, regret - bound);
        } else {
          bound = 2.0 * D * (L * D + 1.0) * std::sqrt(k_eff);
          worst_h = std::max(worst_h, regret - bound);
        }
        ++checks;
        if (!(regret <= bound + 1e-6 * k_eff)) ++failures;
      }
    }
  }
  return {failures == 0, std::to_string(checks) + " comparator checks, " + std::to_string(failures) +
                             " violations; max(regret - bound): ratio " + num(worst_r) + ", hyper " +
                             num(worst_h)};
}

Outcome criterion5() {
  long cases = 0;
  long failures = 0;
  double worst = 0.0;
  const char* names[] = {"ratio", "ratio_z", "gnorm", "hyper"};
  for (int kind = 0; kind < 4; ++kind) {
    for (int t = 0; t < 50; ++t) {
      Rng rng(50000 + 100 * kind + t);
      const int n = 2 + t % 7;
      Objective obj;
      if (t % 2 == 0) {
        obj = make_objective<QuadraticInstance>(random_spd(rng, n, 0.5, 4.0), random_vec(rng, n));
      } else {
        obj = make_objective<LeastSquaresInstance>(random_spd(rng, n, 0.5, 2.0), random_vec(rng, n));
      }
      ScalingPattern p = ScalingPattern::full(n);
      switch (t % 4) {
        case 1: p = ScalingPattern::diagonal(n); break;
        case 2: p = ScalingPattern::sparse(n, {{0, 0}, {0, n - 1}, {n - 1, 1}, {1, 1}}); break;
        case 3: {
          Mat u(n, 2);
          for (int i = 0; i < n; ++i) u(i, 0) = rng.normal(), u(i, 1) = rng.normal();
          p = ScalingPattern::diag_plus_low_rank(u);
          break;
        }
        default: break;
      }
      auto pat = std::make_shared<ScalingPattern>(p);
      const double L = obj.smoothness();
      Vec c = random_vec(rng, static_cast<int>(p.num_coeffs()), 0.3 / L);
      const Vec x = random_vec(rng, n);
      const double fx = obj.value(x);
      const Vec gx = obj.grad(x);
      double ref = 0.0;
      if (kind == 0) ref = *obj.f_star();
      if (kind == 1) ref = *obj.f_star() - 1.0 - rng.uniform();

      auto loss = [&](const Vec& coeffs) {
        StepCache sc = StepCache::make(obj, x, fx, gx, ScalingMatrix{pat, coeffs}, ref);
        sc.ensure_g_plus(obj);
        if (kind <= 1) return ratio_value(sc);
        if (kind == 2) return gnorm_value(sc);
        return hyper_value(sc);
      };
      StepCache sc = StepCache::make(obj, x, fx, gx, ScalingMatrix{pat, c}, ref);
      sc.ensure_g_plus(obj);
      Vec analytic;
      if (kind <= 1) analytic = ratio_grad(sc, p);
      else if (kind == 2) analytic = gnorm_grad(sc, obj, p);
      else analytic = hyper_grad(sc, p);

      Vec fd(c.size());
      for (Eigen::Index j = 0; j < c.size(); ++j) {
        const double step = 1e-5 * std::max(1.0, std::abs(c[j])) / L;
        Vec cp = c, cm = c;
        cp[j] += step;
        cm[j] -= step;
        fd[j] = (loss(cp) - loss(cm)) / (2.0 * step);
      }
      const double rel = (analytic - fd).norm() / std::max({analytic.norm(), fd.norm(), 1e-300});
      worst = std::max(worst, rel);
      ++cases;
      if (!(rel <= 1e-5)) {
        ++failures;
        std::printf("  finite difference mismatch: %s case %d rel %.3g\n", names[kind], t, rel);
      }
    }
  }
  return {failures == 0, std::to_string(cases) + " cases over 4 surrogates, max rel err " + num(worst)};
}

Outcome criterion6() {
  long checked = 0;
  long failed = 0;
  double worst = 0.0;
  auto check = [&](const std::vector<TraceRecord>& tr, TraceBound b, const BoundContext& ctx,
                   const std::string& who) {
    VerifyReport rep = verify_trace(tr, b, ctx);
    ++checked;
    worst = std::max(worst, rep.max_violation);
    if (!rep.passed(1e-9)) {
      ++failed;
      std::printf("  %s %s: %s violation %.3g at K=%ld\n", who.c_str(), to_string(b),
                  rep.applicable ? "" : rep.reason.c_str(), rep.max_violation, rep.worst_k);
    }
  };

  std::vector<cli::Problem> problems;
  for (double sigma : {1e-1, 1.0}) {
    cli::ProblemSpec spec;
    spec.n = 30;
    spec.sigma = sigma;
    spec.seed = 5;
    problems.push_back(cli::build_problem(spec, 2));
  }
  {
    cli::ProblemSpec spec;
    spec.kind = "diagonal";
    spec.n = 20;
    spec.h_max = 1e3;
    problems.push_back(cli::build_problem(spec, 2));
  }

  std::vector<std::string> solvers = cli::bench_solvers();
  solvers.push_back("osgm-rz");
  solvers.push_back("double-loop");
  long hyper_traces = 0;
  double theta_excess = -1e300;
  for (const auto& prob : problems) {
    cli::SolverSettings s = bench_settings(20000);
    s.z = 0.0;
    auto rows = cli::run_bench(solvers, s, {1e-2, 1e-1, 1.0}, prob);
    const double mu = prob.obj.strong_convexity();
    for (const auto& r : rows) {
      BoundContext ctx;
      check(r.trace, TraceBound::amgm, ctx, prob.label + " " + r.solver + " fgap");
      ctx.measure = Measure::gnorm;
      check(r.trace, TraceBound::amgm, ctx, prob.label + " " + r.solver + " gnorm");
      if (r.solver == "osgm-h") {
        BoundContext hc;
        hc.strong_convexity = mu;
        check(r.trace, TraceBound::hyper_strongcvx, hc, prob.label + " osgm-h");
        check(r.trace, TraceBound::hyper_cvx_fval, hc, prob.label + " osgm-h");
        check(r.trace, TraceBound::hyper_cvx_gnorm, hc, prob.label + " osgm-h");
        ++hyper_traces;
      }
    }

    // Hindsight floor of the hypergradient losses.
    SolverConfig cfg = cli::solver_config("osgm-h", s, prob, 0.1);
    cfg.record_steps = true;
    cfg.max_iters = 300;
    SolveResult res = run_osgm(cfg, prob.obj, prob.x1);
    FrozenLosses losses(prob.obj, SurrogateKind::hyper, res.steps);
    const double L = prob.obj.smoothness();
    HindsightResult hb = hindsight_best(losses, *cfg.pattern, scaled_identity(*cfg.pattern, 1.0 / L), 500);
    theta_excess = std::max(theta_excess, hb.theta + 1.0 / (2.0 * L));
  }
  const bool ok = failed == 0 && hyper_traces == 3 && theta_excess <= 1e-9;
  return {ok, std::to_string(checked) + " trace checks, " + std::to_string(failed) +
                  " failed, max violation " + num(worst) + "; max theta* + 1/(2L) = " +
                  num(theta_excess)};
}

Outcome criterion7() {
  Rng rng(77);
  const int n = 5;
  Objective obj = make_objective<QuadraticInstance>(random_spd(rng, n, 1.0, 4.0), random_vec(rng, n));
  const Mat h = *obj.constant_hessian();
  const double f_star = *obj.f_star();
  const double L = obj.smoothness();
  const Vec x1 = random_vec(rng, n, 2.0);
  // Reference scaling: the full pattern contains A^{-1}, whose kappa is 1.
  const double R = h.llt().solve(Mat::Identity(n, n)).norm();
  const long K = 500;

  SolverConfig cfg;
  cfg.variant = Variant::double_loop;
  cfg.pattern = std::make_shared<ScalingPattern>(ScalingPattern::full(n));
  cfg.learner = LearnerKind::ogd;
  cfg.learner_eta = theory_stepsize(SurrogateKind::ratio, L, std::nullopt, K, R);
  cfg.oracle = OracleKind::none;
  cfg.max_iters = K;
  cfg.outer_iters = 40;
  cfg.grad_tol = 1e-12;
  cfg.record_timing = false;
  DoubleLoopResult dl = run_double_loop(cfg, obj, x1, f_star - 1.0);

  long bad = 0;
  long gap_case = 0;
  for (const auto& round : dl.history) {
    RoundCheck rc = check_round(round, f_star, 1.0, R, L);
    if (!rc.holds()) ++bad;
    if (rc.case_gap_bound) ++gap_case;
  }
  const double final_gap = dl.f_best - f_star;
  const bool ok = bad == 0 && final_gap <= 1e-6;
  return {ok, std::to_string(dl.history.size()) + " rounds, " + std::to_string(bad) +
                  " without either case (" + std::to_string(gap_case) +
                  " in the gap case), final gap " + num(final_gap)};
}

Outcome criterion8() {
  const auto& dc = diagonal_case();
  const long gd_iters = dc.gd.iterations;
  auto rows = cli::run_bench({"osgm-g"}, bench_settings(gd_iters), kGrid, dc.prob);
  const auto& r = rows.at(0);
  bool monotone = true;
  for (std::size_t k = 1; k < r.trace.size(); ++k)
    if (r.trace[k].grad_norm > r.trace[k - 1].grad_norm) monotone = false;
  const bool reached = !r.trace.empty() && r.trace.back().grad_norm <= 1e-10;
  const bool ok = reached && monotone && r.iterations < gd_iters;
  return {ok, "GD " + std::to_string(gd_iters) + " iters, OSGM-G " + std::to_string(r.iterations) +
                  " iters (eta " + num(r.stepsize.value_or(0.0)) + "), gradient norm " +
                  (monotone ? "monotone" : "NOT monotone")};
}

Outcome criterion9() {
  bool ok = true;
  std::string detail;
  for (double sigma : {1e-2, 1e-1}) {
    cli::ProblemSpec spec;
    spec.n = 50;
    spec.sigma = sigma;
    spec.seed = 2024;
    cli::Problem prob = cli::build_problem(spec, 0);
    SolveResult gd = run_gd(prob.obj, prob.x1);
    const long gd_iters = gd.iterations;
    auto rows = cli::run_bench(cli::bench_solvers(), bench_settings(gd_iters), kGrid, prob);
    const std::string summary = cli::format_summary(rows);
    long lines = -1;  // header
    for (char ch : summary) lines += ch == '\n';
    ok = ok && rows.size() == 8 && lines == 8 && gd.stop == StopReason::grad_tol;
    detail += "sigma " + num(sigma) + ": GD " + std::to_string(gd_iters);
    for (const auto& r : rows) {
      if (r.solver != "osgm-r" && r.solver != "osgm-h") continue;
      const bool stopped = !r.trace.empty() && r.trace.back().grad_norm <= 1e-10;
      ok = ok && stopped && r.iterations <= gd_iters;
      detail += ", " + cli::display_name(r.solver) + " " +
                (stopped ? std::to_string(r.iterations) : std::string("not converged"));
    }
    detail += ", " + std::to_string(rows.size()) + " rows; ";
  }
  const Mat toy = toy_near_diagonal(10, 50.0, 0.1, 0);
  const OptimalDiagonal opt = approx_optimal_diagonal(toy);
  const double kappa = kappa_of(toy);
  const double scale = toy.llt().solve(Mat::Identity(10, 10)).norm();
  const bool feasible = (opt.d.array() > 0.0).all() && opt.feasibility_margin >= -1e-12 * scale;
  ok = ok && feasible && opt.kappa_star_ub < kappa;
  detail += "toy kappa " + num(kappa) + ", kappa_star_ub " + num(opt.kappa_star_ub) + ", margin " +
            num(opt.feasibility_margin);
  return {ok, detail};
}

Outcome criterion10() {
  Rng rng(10);
  SparseDataset ds;
  const double specials[] = {0.0, -0.0, 1e-300, -1e300, 4.9e-324, 0.1, 1.0 / 3.0, 123456789.0};
  for (int line = 0; line < 1000; ++line) {
    const int pick = static_cast<int>(rng.next_u64() % 4);
    double label = pick == 0 ? 1.0 : pick == 1 ? -1.0 : pick == 2 ? 0.0 : rng.normal() * 1e3;
    std::vector<std::pair<long, double>> row;
    long index = 0;
    const int nnz = line % 17 == 0 ? 0 : static_cast<int>(rng.next_u64() % 12);
    for (int t = 0; t < nnz; ++t) {
      index += 1 + static_cast<long>(rng.next_u64() % (line % 50 == 1 ? 1000000 : 5));
      double v = (rng.next_u64() % 5 == 0) ? specials[rng.next_u64() % 8] : rng.normal();
      row.emplace_back(index, v);
    }
    ds.labels.push_back(label);
    ds.rows.push_back(std::move(row));
    ds.num_features = std::max(ds.num_features, index);
  }
  const std::string text = serialize_libsvm(ds);
  const SparseDataset back = parse_libsvm(text);
  bool ok = back == ds && serialize_libsvm(back) == text;

  // Same corpus with comments, blank lines, tabs and CRLF endings.
  std::string noisy = "# corpus\n\n";
  std::size_t start = 0;
  for (int line = 0; start < text.size(); ++line) {
    const std::size_t end = text.find('\n', start);
    std::string l = text.substr(start, end - start);
    start = end + 1;
    if (line % 3 == 0) {
      for (auto& ch : l)
        if (ch == ' ') ch = '\t';
    }
    noisy += l + (line % 5 == 0 ? "  # trailing\r\n" : "\n");
    if (line % 7 == 0) noisy += "   \n";
  }
  ok = ok && parse_libsvm(noisy) == ds;

  struct Bad {
    std::string text;
    std::string where;
  };
  const std::vector<Bad> bad{
      {"1 1:0.5\nx 2:1\n", "line 2, column 1"},
      {"1 1:0.5\n+1 3:1 4\n", "line 2, column 8"},
      {"-1 0:1\n", "line 1, column 4"},
      {"1 2:1 2:3\n", "line 1, column 7"},
      {"1 3:1 2:3\n", "line 1, column 7"},
      {"1 1:abc\n", "line 1, column 5"},
      {"\n\n1\t1:1\t2:\n", "line 3, column 7"},
      {"1 :4\n", "line 1, column 3"},
      {"# c\n1 1:1e999x\n", "line 2, column 5"},
  };
  int positioned = 0;
  for (const auto& b : bad) {
    try {
      (void)parse_libsvm(b.text);
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (e.code() == ErrorCode::parse_error && msg.find(b.where) != std::string::npos) ++positioned;
      else std::printf("  unexpected message: %s (want %s)\n", msg.c_str(), b.where.c_str());
    }
  }
  ok = ok && positioned == static_cast<int>(bad.size());
  return {ok, "1000-line round trip " + std::string(back == ds ? "exact" : "MISMATCH") + ", " +
                  std::to_string(positioned) + "/" + std::to_string(bad.size()) +
                  " malformed inputs with positioned errors"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"superlinear convergence on quadratics", criterion1},
      {"optimal-conditioning speedup", criterion2},
      {"hypergradient acceleration", criterion3},
      {"regret bounds", criterion4},
      {"surrogate gradients", criterion5},
      {"trajectory inequalities", criterion6},
      {"double loop", criterion7},
      {"gradient-norm surrogate on quadratics", criterion8},
      {"benchmark properties", criterion9},
      {"LIBSVM parser", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    std::printf("criterion %zu %s: %s [%s] (%.1f s)\n", i + 1, out.pass ? "PASS" : "FAIL",
                criteria[i].first, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
