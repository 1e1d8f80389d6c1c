#include <cmath>
#include <iomanip>
#include <iostream>

#include "exstop/config.hpp"

namespace exstop::cli {

namespace {

int fail_code(const Error& e, std::ostream& err) {
  err << to_string(e.code()) << ": " << e.what() << "\n";
  return e.code() == ErrorCode::ConfigParse ? 2 : 3;
}

struct Check {
  bool ok;
  std::string line;
};

class DemoReport {
 public:
  explicit DemoReport(std::ostream& out) : out_(out) {}
  void expect(const std::string& label, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    all_ok_ &= ok;
    out_ << (ok ? "[PASS] " : "[FAIL] ") << label << ": computed "
         << format_double(got) << ", expected " << format_double(want)
         << " (tol " << format_double(tol) << ")\n";
  }
  void expect_rel(const std::string& label, double got, double want, double tol) {
    const double rel = std::abs(got - want) / (std::abs(want) + 1e-300);
    const bool ok = rel <= tol;
    all_ok_ &= ok;
    out_ << (ok ? "[PASS] " : "[FAIL] ") << label << ": computed "
         << format_double(got) << ", expected " << format_double(want)
         << " (rel " << format_double(rel) << ")\n";
  }
  void note(const std::string& line) { out_ << "       " << line << "\n"; }
  bool all_ok() const { return all_ok_; }

 private:
  std::ostream& out_;
  bool all_ok_ = true;
};

VectorXd linspace(double a, double b, int n) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v[i] = (n == 1) ? a : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

int cmd_solve(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir, bool quiet,
              std::ostream& out, std::ostream& err) {
  ProblemConfig cfg;
  BuiltProblem problem;
  try {
    cfg = parse_config_file(config_path);
    problem = build_problem(cfg, config_path.parent_path());
    if (!cfg.grid.nx) raise(ErrorCode::ConfigParse, "grid: missing field nx");
    if (!cfg.grid.ns) raise(ErrorCode::ConfigParse, "grid: missing field ns");
    if (!cfg.grid.x_min) raise(ErrorCode::ConfigParse, "grid: missing field x_min");
    if (!cfg.grid.x_max) raise(ErrorCode::ConfigParse, "grid: missing field x_max");
    if (!cfg.grid.s_min) raise(ErrorCode::ConfigParse, "grid: missing field s_min");
    if (!cfg.grid.s_max) raise(ErrorCode::ConfigParse, "grid: missing field s_max");
    if (!problem.model.state_space.contains(*cfg.grid.x_min) ||
        !problem.model.state_space.contains(*cfg.grid.s_max))
      raise(ErrorCode::ConfigParse, "grid: bounds outside the state space");
  } catch (const Error& e) {
    return fail_code(e, err);
  }

  try {
    const VectorXd x_grid = linspace(*cfg.grid.x_min, *cfg.grid.x_max, *cfg.grid.nx);
    const VectorXd s_grid = linspace(*cfg.grid.s_min, *cfg.grid.s_max, *cfg.grid.ns);

    std::vector<VssRow> rows;
    rows.reserve(s_grid.size());
    for (int j = 0; j < s_grid.size(); ++j) {
      const double s = s_grid[j];
      const double b_s = problem.boundary.b(s);
      const VssSolution sol =
          problem.reward.s_dependent
              ? solve_prop2(problem.fp, problem.reward, s, b_s)
              : solve_corollary1(problem.fp, problem.reward, s, b_s);
      rows.push_back({sol.s, sol.l_star, sol.value, sol.gamma_slope, sol.method,
                      sol.boundary_binding});
    }
    const ValueSurface surface = build_surface(
        problem.fp, problem.reward, problem.boundary, x_grid, s_grid);

    std::filesystem::create_directories(out_dir);
    const auto vss_path = out_dir / cfg.output.vss.value_or("vss.csv");
    const auto surf_path = out_dir / cfg.output.surface.value_or("surface.csv");
    write_vss_csv(vss_path, rows);
    write_surface_csv(surf_path, surface);

    if (!quiet) {
      std::int64_t n_stop = 0, n_cont = 0, n_inf = 0;
      for (int j = 0; j < surface.s_grid.size(); ++j)
        for (int i = 0; i < surface.x_grid.size(); ++i) {
          const auto r = static_cast<RegionLabel>(surface.region(i, j));
          if (r == RegionLabel::STOP) ++n_stop;
          else if (r == RegionLabel::CONTINUE) ++n_cont;
          else ++n_inf;
        }
      out << "solve: " << s_grid.size() << " levels, grid " << x_grid.size()
          << "x" << s_grid.size() << " (dx="
          << format_double(x_grid.size() > 1 ? x_grid[1] - x_grid[0] : 0.0)
          << ", ds="
          << format_double(s_grid.size() > 1 ? s_grid[1] - s_grid[0] : 0.0)
          << "; region boundaries carry one-cell uncertainty)\n";
      out << "  cells: " << n_stop << " STOP, " << n_cont << " CONTINUE, "
          << n_inf << " INFEASIBLE\n";
      out << "  s=" << format_double(rows.front().s)
          << ": l*=" << format_double(rows.front().l_star)
          << " value=" << format_double(rows.front().value) << "\n";
      out << "  s=" << format_double(rows.back().s)
          << ": l*=" << format_double(rows.back().l_star)
          << " value=" << format_double(rows.back().value) << "\n";
      out << "  wrote " << vss_path.string() << ", " << surf_path.string() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    return fail_code(e, err);
  }
}

int cmd_simulate(const std::filesystem::path& config_path,
                 std::optional<std::int64_t> paths_override,
                 std::optional<std::uint64_t> seed_override,
                 const std::filesystem::path& out_dir, bool quiet,
                 std::ostream& out, std::ostream& err) {
  ProblemConfig cfg;
  BuiltProblem problem;
  try {
    cfg = parse_config_file(config_path);
    problem = build_problem(cfg, config_path.parent_path());
    if (!cfg.mc.x0) raise(ErrorCode::ConfigParse, "mc: missing field x0");
    if (!cfg.mc.s0) raise(ErrorCode::ConfigParse, "mc: missing field s0");
  } catch (const Error& e) {
    return fail_code(e, err);
  }

  try {
    MCConfig mc;
    mc.n_paths = paths_override.value_or(cfg.mc.n_paths.value_or(10000));
    mc.dt = cfg.mc.dt.value_or(1e-3);
    mc.t_max = cfg.mc.t_max.value_or(100.0);
    mc.seed = seed_override.value_or(cfg.mc.seed.value_or(0));
    mc.antithetic = cfg.mc.antithetic.value_or(false);
    if (cfg.mc.scheme) {
      if (*cfg.mc.scheme == "exact_gbm") mc.scheme = Scheme::ExactGBM;
      else if (*cfg.mc.scheme == "euler") mc.scheme = Scheme::EulerMaruyama;
      else raise(ErrorCode::ConfigParse, "mc: unknown scheme '" + *cfg.mc.scheme + "'");
    } else if (problem.model.kind != DiffusionKind::GBM) {
      mc.scheme = Scheme::EulerMaruyama;
    }
    const double x0 = *cfg.mc.x0, s0 = *cfg.mc.s0;

    const Policy policy = optimal_policy(problem, s0, 8.0 * std::max(s0, 1.0));
    const MCResult res = simulate_policy(problem.model, problem.reward,
                                         problem.boundary, policy, x0, s0, mc);

    // analytic reference: majorant value at (x0, s0) plus the income potential
    const double b_s0 = problem.boundary.b(s0);
    const VssSolution sol =
        problem.reward.s_dependent
            ? solve_prop2(problem.fp, problem.reward, s0, b_s0)
            : solve_corollary1(problem.fp, problem.reward, s0, b_s0);
    double v_analytic = sol.value;
    if (x0 < s0) {
      const Obstacle obs = build_obstacle(problem.fp, problem.reward, s0,
                                          problem.boundary, sol.value);
      const MajorantResult maj = smallest_concave_majorant(obs, problem.reward);
      v_analytic = value_at(maj, problem.fp, x0).first;
    }
    const double total_analytic = v_analytic + problem.reward.fbar(x0, s0);
    const double z = res.std_error > 0.0
                         ? (res.estimate - total_analytic) / res.std_error
                         : 0.0;

    std::filesystem::create_directories(out_dir);
    const auto mc_path = out_dir / cfg.output.mc.value_or("mc.csv");
    write_mc_csv(mc_path, {{x0, s0, res.estimate, res.std_error, res.n_stopped,
                            res.n_absorbed, res.n_censored}});
    if (!quiet) {
      out << "simulate: " << mc.n_paths << " paths, dt=" << format_double(mc.dt)
          << ", seed=" << mc.seed << "\n";
      out << "  estimate " << format_double(res.estimate) << " +- "
          << format_double(res.std_error) << " (stopped " << res.n_stopped
          << ", absorbed " << res.n_absorbed << ", censored " << res.n_censored
          << ")\n";
      out << "  analytic " << format_double(total_analytic)
          << "  z-score " << format_double(z) << "\n";
      if (res.discount_bias_note)
        out << "  note: e^(-q t_max) > 1e-6, censoring bias may matter\n";
      out << "  wrote " << mc_path.string() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    return fail_code(e, err);
  }
}

namespace {

int demo_put(std::ostream& out) {
  DemoReport rep(out);
  const double K = 5.0, s = 5.0;
  const GbmModel g = make_gbm(0.05, 0.25, 0.15);
  const RewardSpec put = make_put_reward(K);
  const VssSolution sol = solve_corollary1(g.fp, put, s, BoundarySpec::none().b(s));
  rep.expect("put stop point x*", s - sol.l_star, 3.57604, 1e-4);
  rep.expect("put threshold l*", sol.l_star, 1.42396, 1e-4);
  const double x_star = g.gamma0 * K / (g.gamma0 - 1.0);
  const double v_closed = (K - x_star) * std::pow(s / x_star, g.gamma0);
  rep.expect_rel("put value V(5,5)", sol.value, v_closed, 1e-8);
  rep.expect("put tangent slope", sol.gamma_slope, 0.0, 1e-10);
  return rep.all_ok() ? 0 : 1;
}

int demo_lookback(std::ostream& out) {
  DemoReport rep(out);
  const GbmModel g = make_gbm(0.05, 0.25, 0.15);
  const RewardSpec lb = make_lookback_reward(0.5);
  double betas[4];
  const double ss[4] = {1.0, 2.0, 5.0, 10.0};
  for (int i = 0; i < 4; ++i) {
    const VssSolution sol = solve_prop2(g.fp, lb, ss[i], BoundarySpec::none().b(ss[i]));
    betas[i] = (ss[i] - sol.l_star) / ss[i];
  }
  const VssSolution sol5 = solve_prop2(g.fp, lb, 5.0, BoundarySpec::none().b(5.0));
  rep.expect("lookback ratio beta (stored reference)", betas[2], 0.784073, 1e-5);
  double spread = 0.0;
  for (int i = 1; i < 4; ++i) spread = std::max(spread, std::abs(betas[i] - betas[0]));
  rep.expect("beta spread across s in {1,2,5,10}", spread, 0.0, 1e-6);
  const auto [v_fit, gamma] = smooth_fit_value(g.fp, lb, 5.0, sol5.l_star);
  rep.expect_rel("smooth-fit value vs maximizer value", v_fit, sol5.value, 1e-8);
  rep.note("tangent slope gamma = " + format_double(gamma) + " (> 0)");
  const double beta5 = betas[2];
  const Policy scaling{[beta5](double m) { return (1.0 - beta5) * m; }};
  const double v_int = policy_value_integral(g.fp, lb, scaling, 5.0);
  rep.expect_rel("threshold-policy integral vs maximizer value", v_int, sol5.value, 1e-4);
  return rep.all_ok() ? 0 : 1;
}

int demo_shepp(std::ostream& out) {
  DemoReport rep(out);
  const GbmModel g = make_gbm(0.05, 0.25, 0.15);
  const RewardSpec ss = make_lookback_reward(0.0);
  const double s = 5.0;
  const VssSolution sol = solve_prop2(g.fp, ss, s, BoundarySpec::none().b(s));
  const double beta = (s - sol.l_star) / s;
  const double delta = g.gamma1 - g.gamma0;
  const double beta_closed =
      std::pow(g.gamma0 * (g.gamma1 - 1.0) / (g.gamma1 * (g.gamma0 - 1.0)),
               1.0 / delta);
  rep.expect("maximum-reward ratio beta", beta, beta_closed, 1e-7);
  const double coeff = (g.gamma1 * std::pow(beta, -g.gamma0) -
                        g.gamma0 * std::pow(beta, -g.gamma1)) /
                       delta;
  rep.expect_rel("V(s,s)/s coefficient", sol.value / s, coeff, 1e-8);
  const double v_xind = solve_x_independent(g.fp, ss, s, sol.l_star);
  rep.expect_rel("x-independent closed form", v_xind, sol.value, 1e-8);
  return rep.all_ok() ? 0 : 1;
}

int demo_invest(std::ostream& out) {
  DemoReport rep(out);
  const DrawdownParams p = make_app(0.05, 0.1, 0.1, 0.8);
  rep.expect("alpha", p.alpha, 13.1148, 1e-4);
  rep.expect("gamma0", p.gamma0, -10.8443, 1e-4);
  rep.expect("gamma1", p.gamma1, 1.84429, 1e-5);
  rep.note(std::string("inflection formula ") +
           (p.r_recomputed ? "recomputed from H''" : "verified, H''(r) = 0"));
  rep.note(std::string("tangency threshold ") +
           (p.u_recomputed ? "recomputed from the chord predicate"
                           : "verified against the chord predicate"));
  rep.note("x_r = F^-1(r) = " + format_double(p.F_inv(p.r)) +
           ", F^-1(u) = " + format_double(p.F_inv(p.u)) +
           ", F^-1(r)/beta = " + format_double(p.F_inv(p.r) / p.beta));
  rep.note("diagonal regime switch s = " + format_double(p.s_switch));

  const GbmModel g = drawdown_gbm(p);
  const RewardSpec reward = drawdown_reward(p);
  for (double s : {0.5, 1.0, 2.0, 5.0}) {
    const VssSolution sol = solve_corollary1(g.fp, reward, s, (1.0 - p.beta) * s);
    rep.expect_rel("V(s,s) closed form vs maximizer at s=" + format_double(s),
                   vss_closed_form(p, s), sol.value, 1e-8);
  }
  const double s_u = p.F_inv(p.u);
  const CaseDescriptor below = classify_case(p, s_u * 0.999);
  const CaseDescriptor above = classify_case(p, s_u * 1.001);
  rep.note(std::string("case below F^-1(u): ") +
           (below.kind == CaseKind::ChordCase ? "chord" : "other") +
           ", above: " +
           (above.kind == CaseKind::TangencyCase ? "tangency" : "other"));
  return rep.all_ok() ? 0 : 1;
}

}  // namespace

int cmd_demo(const std::string& name, bool quiet, std::ostream& out,
             std::ostream& err) {
  (void)quiet;
  try {
    if (name == "put") return demo_put(out);
    if (name == "lookback") return demo_lookback(out);
    if (name == "shepp") return demo_shepp(out);
    if (name == "invest") return demo_invest(out);
  } catch (const Error& e) {
    return fail_code(e, err);
  }
  err << "unknown demo '" << name << "' (choose put, lookback, shepp, invest)\n";
  return 2;
}

}  // namespace exstop::cli
