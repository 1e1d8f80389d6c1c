// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Each check pins its tolerance in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "exstop/config.hpp"
#include "exstop/gbm_drawdown.hpp"
#include "exstop/simulate.hpp"
#include "../tests/oracles.hpp"

using namespace exstop;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int id, std::string title)
      : id_(id), title_(std::move(title)),
        start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    ok_ &= ok;
    notes_.push_back(std::string(ok ? "  [ok]   " : "  [FAIL] ") + detail);
  }
  void note(const std::string& detail) {
    notes_.push_back("  [info] " + detail);
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_).count();
  }
  void finish(double budget_s = 0.0) {
    const double t = elapsed();
    if (budget_s > 0.0) check(t < budget_s, "runtime " + fmt(t) + " s < " + fmt(budget_s) + " s");
    std::printf("%s criterion %d: %s (%.2f s)\n", ok_ ? "[PASS]" : "[FAIL]",
                id_, title_.c_str(), t);
    for (const auto& n : notes_) std::printf("%s\n", n.c_str());
    if (!ok_) ++g_failures;
  }
  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
  }

 private:
  int id_;
  std::string title_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> notes_;
  bool ok_ = true;
};

std::string fmt(double v) { return Criterion::fmt(v); }

double rel_err(double got, double want) {
  return std::abs(got - want) / (std::abs(want) + 1e-300);
}

// ---------------------------------------------------------------------- 1
void criterion1() {
  Criterion c(1, "perpetual put golden numbers");
  const auto g = make_gbm(0.05, 0.25, 0.15);
  const auto put = make_put_reward(5.0);
  const auto sol = solve_corollary1(g.fp, put, 5.0, 5.0 * (1 - 1e-12));
  const double x_star = 5.0 - sol.l_star;
  c.check(std::abs(x_star - 3.57604) <= 1e-4,
          "x* = " + fmt(x_star) + " within 1e-4 of 3.57604");
  c.check(std::abs(sol.l_star - 1.42396) <= 1e-4,
          "l* = " + fmt(sol.l_star) + " within 1e-4 of 1.42396");
  c.finish(1.0);
}

// ---------------------------------------------------------------------- 2
void criterion2() {
  Criterion c(2, "lookback golden number (k = 1/2)");
  const auto g = make_gbm(0.05, 0.25, 0.15);
  const auto lb = make_lookback_reward(0.5);
  std::vector<double> betas;
  for (double s : {1.0, 2.0, 5.0, 10.0}) {
    const auto sol = solve_prop2(g.fp, lb, s, s * (1 - 1e-12));
    betas.push_back((s - sol.l_star) / s);
  }
  const double beta5 = betas[2];
  c.check(std::abs(beta5 - 0.784073) <= 1e-5,
          "beta = " + fmt(beta5) + " within 1e-5 of 0.784073");
  double spread = 0.0;
  for (double b : betas) spread = std::max(spread, std::abs(b - betas[0]));
  c.check(spread < 1e-6, "beta spread across s in {1,2,5,10} = " + fmt(spread));
  // context for the stored constant: the maximizer value strictly exceeds the
  // value of the stored ratio's policy, and both match the closed-form value
  // of their own threshold policies
  const auto sol5 = solve_prop2(g.fp, lb, 5.0, 5.0 * (1 - 1e-12));
  const double val_stored =
      oracles::scaling_policy_value(g.gamma0, g.gamma1, 0.5, 0.784073, 5.0);
  const double val_hat =
      oracles::scaling_policy_value(g.gamma0, g.gamma1, 0.5, beta5, 5.0);
  c.note("maximizer value " + fmt(sol5.value) + " (= policy value " +
         fmt(val_hat) + " at beta = " + fmt(beta5) + ")");
  c.note("policy value at stored beta 0.784073 is " + fmt(val_stored) +
         "; 0.784073 equals the k = 0 threshold " +
         fmt(oracles::shepp_beta(g.gamma0, g.gamma1)));
  c.finish(5.0);
}

// ---------------------------------------------------------------------- 3
void criterion3() {
  Criterion c(3, "maximum-reward consistency (three routes)");
  const auto g = make_gbm(0.05, 0.25, 0.15);
  const auto ss = make_lookback_reward(0.0);
  const double s = 5.0;
  const auto sol = solve_prop2(g.fp, ss, s, s * (1 - 1e-12));
  const double v_xind = solve_x_independent(g.fp, ss, s, sol.l_star);
  const double beta = (s - sol.l_star) / s;
  const double v_closed =
      s * oracles::shepp_coefficient(g.gamma0, g.gamma1, beta);
  c.check(rel_err(sol.value, v_xind) <= 1e-8,
          "maximizer vs x-independent form: rel " + fmt(rel_err(sol.value, v_xind)));
  c.check(rel_err(sol.value, v_closed) <= 1e-8,
          "maximizer vs closed form: rel " + fmt(rel_err(sol.value, v_closed)));
  c.check(rel_err(v_xind, v_closed) <= 1e-8,
          "x-independent vs closed form: rel " + fmt(rel_err(v_xind, v_closed)));
  c.finish();
}

// ---------------------------------------------------------------------- 4
void criterion4() {
  Criterion c(4, "threshold-policy integral matches the maximizer");
  const auto g = make_gbm(0.05, 0.25, 0.15);
  const auto lb = make_lookback_reward(0.5);
  const double s = 5.0;
  const auto sol = solve_prop2(g.fp, lb, s, s * (1 - 1e-12));
  const double beta = (s - sol.l_star) / s;
  Policy p{[beta](double m) { return (1.0 - beta) * m; }};
  const double v = policy_value_integral(g.fp, lb, p, s);
  c.check(rel_err(v, sol.value) <= 1e-4,
          "integral " + fmt(v) + " vs maximizer " + fmt(sol.value) + ": rel " +
              fmt(rel_err(v, sol.value)));
  c.finish();
}

// ---------------------------------------------------------------------- 5
void criterion5() {
  Criterion c(5, "drawdown application internal consistency");
  const auto p = make_app(0.05, 0.1, 0.1, 0.8);
  const auto g = drawdown_gbm(p);
  const auto reward = drawdown_reward(p);

  // residual guards
  const double t1 = std::abs(p.p1 * (p.p1 - 1.0) * std::pow(p.r, p.p1 - 2.0));
  const double t2 = std::abs(p.alpha * p.p2 * (p.p2 - 1.0) * std::pow(p.r, p.p2 - 2.0));
  c.check(std::abs(p.d2H(p.r)) / (t1 + t2) <= 1e-8,
          "H''(r) residual " + fmt(std::abs(p.d2H(p.r)) / (t1 + t2)));
  const double s_u = p.F_inv(p.u);
  {
    const auto below = classify_case(p, s_u * (1.0 - 1e-8));
    const auto above = classify_case(p, s_u * (1.0 + 1e-8));
    double worst = 0.0;
    for (double t = 0.05; t < 1.0; t += 0.06) {
      const double y = below.y_left + t * (below.y_right - below.y_left);
      worst = std::max(worst, rel_err(below.eval(p, y), above.eval(p, y)));
    }
    c.check(below.kind == CaseKind::ChordCase && above.kind == CaseKind::TangencyCase &&
                worst <= 1e-8,
            "case-boundary continuity at s = F^-1(u): rel " + fmt(worst));
  }

  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0, 5.0}) {
    const auto sol = solve_corollary1(g.fp, reward, s, (1.0 - p.beta) * s);
    worst = std::max(worst, rel_err(vss_closed_form(p, s), sol.value));
  }
  c.check(worst <= 1e-8, "closed form vs maximizer on s in {0.5,1,2,5}: rel " + fmt(worst));

  // 400 x 400 region map vs the generic surface
  const int n = 400;
  const VectorXd x_grid = VectorXd::LinSpaced(n, 2.0, 620.0);
  const VectorXd s_grid = VectorXd::LinSpaced(n, 2.0, 620.0);
  const auto map = region_map(p, x_grid, s_grid);
  const auto surf = build_surface(g.fp, reward, BoundarySpec::proportional(p.beta),
                                  x_grid, s_grid, {1024, 0});
  const double cell = x_grid[1] - x_grid[0];
  const double s_r = p.F_inv(p.r) / p.beta;

  bool bands_ok = true, mono_ok = true, match_ok = true;
  double prev_frac = 2.0;
  for (int j = 0; j < n; ++j) {
    const double s = s_grid[j];
    int first_interior_stop = -1;
    for (int i = 0; i < n; ++i) {
      const double x = x_grid[i];
      if (x < p.beta * s + cell || x > s - cell) continue;  // wedge interior
      const auto lbl = static_cast<RegionLabel>(map.region(i, j));
      if (lbl == RegionLabel::STOP && first_interior_stop < 0)
        first_interior_stop = i;
    }
    if (s < s_u - cell) {
      if (first_interior_stop >= 0) bands_ok = false;  // pure-wait band
    } else if (s > s_r + cell) {
      // immediate-stop band: interior cells all stop
      for (int i = 0; i < n; ++i) {
        const double x = x_grid[i];
        if (x < p.beta * s + cell || x > s - cell) continue;
        if (static_cast<RegionLabel>(map.region(i, j)) != RegionLabel::STOP)
          bands_ok = false;
      }
    } else if (s > s_u + cell && s < s_r - cell) {
      // tangency band: a contiguous stop suffix with a monotone boundary
      if (first_interior_stop < 0) {
        bands_ok = false;
      } else {
        const double frac = x_grid[first_interior_stop] / s;
        if (frac > prev_frac + cell / s) mono_ok = false;
        prev_frac = frac;
      }
    }
    // one-cell agreement with the sampled-hull surface
    for (int i = 0; i < n; ++i) {
      const double x = x_grid[i];
      if (x < p.beta * s || x > s) continue;
      if (map.region(i, j) == surf.region(i, j)) continue;
      const auto d = classify_case(p, s);
      double boundary = s;
      if (d.kind == CaseKind::TangencyCase) boundary = p.F_inv(*d.R_s);
      if (d.kind == CaseKind::ConcaveCase) boundary = p.beta * s;
      if (!(std::abs(x - boundary) <= cell || std::abs(x - p.beta * s) <= cell ||
            std::abs(x - s) <= cell))
        match_ok = false;
    }
  }
  c.check(bands_ok, "three-band structure with boundaries at F^-1(u) = " +
                        fmt(s_u) + " and F^-1(r)/beta = " + fmt(s_r));
  c.check(mono_ok, "stop boundary fraction is monotone through the tangency band");
  c.check(match_ok, "region map matches the sampled-hull labels within one cell");
  c.finish(30.0);
}

// ---------------------------------------------------------------------- 6
void criterion6() {
  Criterion c(6, "majorant property suite on randomized instances");
  std::uint64_t state = 20240817ULL;
  auto rnd = [&]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return (state >> 11) * 0x1.0p-53;
  };

  const auto g = make_gbm(0.05, 0.25, 0.15);
  int done = 0, cond_fail = 0, fit_fail = 0;
  while (done < 50) {
    // reward family
    RewardSpec reward;
    const int fam = static_cast<int>(rnd() * 4.0);
    double s = 1.0 + 9.0 * rnd();
    switch (fam) {
      case 0: {
        const double K = 2.0 + 6.0 * rnd();
        reward = make_put_reward(K);
        s = K * (0.7 + 0.9 * rnd());
        break;
      }
      case 1:
        reward = make_lookback_reward(rnd());
        break;
      case 2: {
        // smooth mixed reward increasing in s
        const double c1 = 0.5 + rnd(), c2 = rnd() * c1, c3 = 0.2 + rnd();
        reward = make_lookback_reward(0.0);
        reward.g = [c1, c2, c3](double x, double ss) {
          return c1 * ss - c2 * x + c3;
        };
        reward.h = reward.g;
        reward.dh_dx = [c2](double, double) { return -c2; };
        break;
      }
      default: {
        const double pp = 0.3 + 0.4 * rnd();
        reward = make_power_income_reward(0.05, 0.25, 0.15, pp, TerminalId::Linear,
                                          AbsorptionConvention::RewardAtAbsorption);
        break;
      }
    }
    // boundary family
    BoundarySpec b;
    const int bfam = static_cast<int>(rnd() * 3.0);
    if (bfam == 0) b = BoundarySpec::proportional(0.3 + 0.6 * rnd());
    else if (bfam == 1) b = BoundarySpec::constant((0.2 + 0.6 * rnd()) * s);
    else b = BoundarySpec::none();

    const double b_s = std::min(b.b(s), s * (1 - 1e-12));
    if (!(b_s > 1e-6)) continue;
    VssSolution sol;
    try {
      sol = reward.s_dependent ? solve_prop2(g.fp, reward, s, b_s)
                               : solve_corollary1(g.fp, reward, s, b_s);
    } catch (const Error&) {
      continue;  // assumption rejections do not count as instances
    }
    const auto obs = build_obstacle(g.fp, reward, s, b, sol.value, 1024);
    const auto maj = smallest_concave_majorant(obs, reward);

    // conditions (i) through (v)
    bool ok = true;
    const int nn = static_cast<int>(maj.y_grid.size());
    for (int i = 0; i < nn; ++i)
      ok &= maj.W[i] >= maj.H[i] - 1e-12 * (1.0 + std::abs(maj.H[i]));
    ok &= maj.W[nn - 1] == maj.right_anchor.second;
    ok &= maj.W[0] == maj.left_anchor.second;
    for (int i = 2; i < nn; ++i) {
      const double d1 = (maj.W[i - 1] - maj.W[i - 2]) /
                        (maj.y_grid[i - 1] - maj.y_grid[i - 2]);
      const double d2 =
          (maj.W[i] - maj.W[i - 1]) / (maj.y_grid[i] - maj.y_grid[i - 1]);
      ok &= d2 - d1 <= 1e-10 * (1.0 + std::abs(d1));
    }
    {
      VectorXd pts = maj.H;
      pts[0] = std::max(maj.left_anchor.second, maj.H[0]);
      pts[nn - 1] = std::max(maj.right_anchor.second, maj.H[nn - 1]);
      const VectorXd ref = oracles::jarvis_upper_envelope(maj.y_grid, pts);
      for (int i = 1; i < nn; ++i)
        ok &= std::abs(maj.W[i] - ref[i]) <= 1e-10 * (1.0 + std::abs(ref[i]));
    }
    if (!ok) ++cond_fail;

    // smooth-fit slope agreement at an interior contact after refinement
    if (maj.R_s && fam != 0) {  // differentiable families
      const auto obs2 = build_obstacle(g.fp, reward, s, b, sol.value, 2048);
      const auto maj2 = smallest_concave_majorant(obs2, reward);
      if (maj2.R_s) {
        const double R = *maj2.R_s;
        int kk = 0;
        while (kk < maj2.y_grid.size() && maj2.y_grid[kk] < R) ++kk;
        if (kk >= 1 && kk + 1 < maj2.y_grid.size()) {
          const auto& y = maj2.y_grid;
          const auto& W = maj2.W;
          const double dl = (W[kk] - W[kk - 1]) / (y[kk] - y[kk - 1]);
          const double dr = (W[kk + 1] - W[kk]) / (y[kk + 1] - y[kk]);
          if (std::abs(dr - dl) > 1e-4 * (1.0 + std::abs(dl))) ++fit_fail;
        }
      }
    }
    ++done;
  }
  c.check(cond_fail == 0, "conditions (i)-(v) on 50 instances: " +
                              std::to_string(cond_fail) + " failures");
  c.check(fit_fail == 0, "smooth-fit slope agreement at interior contacts: " +
                             std::to_string(fit_fail) + " failures");
  c.finish();
}

// ---------------------------------------------------------------------- 7
void criterion7() {
  Criterion c(7, "Monte Carlo policy validation");
  MCConfig cfg;
  cfg.n_paths = 100000;
  cfg.dt = 1e-3;
  cfg.seed = 2024;
  cfg.bridge = true;

  {
    const auto g = make_gbm(0.05, 0.25, 0.15);
    const auto put = make_put_reward(5.0);
    const double x_star = g.gamma0 * 5.0 / (g.gamma0 - 1.0);
    Policy p{[x_star](double m) { return m - x_star; }};
    cfg.t_max = 95.0;
    const auto r = simulate_policy(g.model, put, BoundarySpec::none(), p, 5.0, 5.0, cfg);
    const double want = oracles::perpetual_put(5.0, g.gamma0).value_at(5.0, 5.0, g.gamma0);
    const double z = (r.estimate - want) / r.std_error;
    c.check(std::abs(z) <= 3.0, "put at (5,5): z = " + fmt(z) + " (mc " +
                                    fmt(r.estimate) + " +- " + fmt(r.std_error) +
                                    ", analytic " + fmt(want) + ")");
  }
  {
    const auto p = make_app(0.05, 0.1, 0.1, 0.8);
    const auto g = drawdown_gbm(p);
    const auto reward = drawdown_reward(p);
    Policy trailing{[&p](double m) { return (1.0 - p.beta) * m; }};
    cfg.t_max = 150.0;
    const auto r = simulate_policy(g.model, reward, BoundarySpec::proportional(p.beta),
                                   trailing, 1.0, 1.0, cfg);
    const double claim = vss_closed_form(p, 1.0) + reward.fbar(1.0, 1.0);
    const double z = (r.estimate - claim) / r.std_error;
    c.check(std::abs(z) <= 3.0,
            "drawdown total value at (1,1): z = " + fmt(z) + " against the closed form " +
                fmt(claim) + " (mc " + fmt(r.estimate) + " +- " + fmt(r.std_error) + ")");
    // attribution: the same simulation against the excursion-integral value
    // of the executed policy
    const double v_int = policy_value_integral(g.fp, reward, trailing, 1.0) +
                         reward.fbar(1.0, 1.0);
    const double z2 = (r.estimate - v_int) / r.std_error;
    c.note("same run vs the excursion-integral policy value " + fmt(v_int) +
           ": z = " + fmt(z2) +
           (std::abs(z2) <= 3.0 ? " (simulator and integral agree)" : ""));
  }
  c.finish(120.0);
}

// ---------------------------------------------------------------------- 8
void criterion8() {
  Criterion c(8, "lattice dynamic-programming oracle");
  const double dx = 0.005;

  {  // put: values within 2% and boundary within one cell
    const auto g = make_gbm(0.05, 0.25, 0.15);
    const auto put = make_put_reward(5.0);
    const int nx = static_cast<int>(std::lround(20.0 / dx));
    VectorXd x_grid(nx);
    for (int i = 0; i < nx; ++i) x_grid[i] = dx * (i + 1);
    const int j0 = static_cast<int>(std::lround(5.0 / dx));
    const int ns = nx - j0 + 1;
    VectorXd s_grid(ns);
    for (int j = 0; j < ns; ++j) s_grid[j] = dx * (j0 + j);
    const double dt = 0.9 * dx * dx / (0.0625 * 400.0);
    const auto dp = lattice_dp(g.model, put, BoundarySpec::none(), x_grid, s_grid, dt);

    const auto classic = oracles::perpetual_put(5.0, g.gamma0);
    double worst = 0.0;
    for (int jrow = 0; jrow < 2; ++jrow) {
      const double s = jrow == 0 ? 5.0 : 6.5;
      const int j = static_cast<int>(std::lround(s / dx)) - j0;
      for (double x = 1.0; x <= s - 0.25; x += 0.25) {
        const int i = static_cast<int>(std::lround(x / dx)) - 1;
        const double want = classic.value_at(x, 5.0, g.gamma0);
        worst = std::max(worst, std::abs(dp.V_dp(i, j) - want) /
                                    std::max(std::abs(want), 1e-8));
      }
    }
    c.check(worst <= 0.02, "put values on rows s in {5, 6.5}: worst rel " + fmt(worst));

    int first_cont = -1;
    for (int i = 0; i < nx; ++i)
      if (x_grid[i] <= 5.0 && !dp.stop_set(i, 0)) {
        first_cont = i;
        break;
      }
    const double dist =
        std::max({x_grid[first_cont - 1] - classic.x_star,
                  classic.x_star - x_grid[first_cont], 0.0});
    c.check(dist <= dx + 1e-12,
            "put stop boundary brackets x* within one cell: excess " + fmt(dist));
  }

  {  // drawdown instance: the discrete Bellman solve against the surface
    const auto p = make_app(0.05, 0.1, 0.1, 0.8);
    const auto g = drawdown_gbm(p);
    const auto reward = drawdown_reward(p);
    const double s_max = 12.0;  // record truncation enters as (s0/s_max)^2.6
    const int i_lo = static_cast<int>(std::lround(0.6 / dx));
    const int i_hi = static_cast<int>(std::lround(s_max / dx));
    VectorXd x_grid(i_hi - i_lo + 1);
    for (int i = 0; i < x_grid.size(); ++i) x_grid[i] = dx * (i_lo + i);
    const int j_lo = static_cast<int>(std::lround(0.8 / dx));
    VectorXd s_grid(i_hi - j_lo + 1);
    for (int j = 0; j < s_grid.size(); ++j) s_grid[j] = dx * (j_lo + j);
    const double dt = 0.9 * dx * dx / (0.01 * s_max * s_max);
    const auto dp = lattice_dp(g.model, reward, BoundarySpec::proportional(p.beta),
                               x_grid, s_grid, dt);

    // surface rows only where the comparison happens
    const int j_cmp = static_cast<int>(std::lround(2.0 / dx)) - j_lo;
    VectorXd s_cmp(j_cmp + 1);
    for (int j = 0; j <= j_cmp; ++j) s_cmp[j] = s_grid[j];
    const auto surf = build_surface(g.fp, reward, BoundarySpec::proportional(p.beta),
                                    x_grid, s_cmp, {1024, 0});
    double worst = 0.0;
    int interior_stop_cells = 0;
    double worst_vs_integral = 0.0;
    for (int j = 0; j < s_cmp.size(); ++j) {
      const double s = s_cmp[j];
      if (s > 2.0) break;
      Policy trailing{[&p](double m) { return (1.0 - p.beta) * m; }};
      // row reference from the executed-policy integral and two-sided exit
      const double v_row = policy_value_integral(g.fp, reward, trailing, s);
      for (int i = 0; i < x_grid.size(); ++i) {
        const double x = x_grid[i];
        if (x < p.beta * s + 2 * dx || x > s - 2 * dx) continue;
        if (std::isnan(dp.V_dp(i, j))) continue;
        worst = std::max(worst, std::abs(dp.V_dp(i, j) - surf.V(i, j)) /
                                    std::max(std::abs(surf.V(i, j)), 1e-8));
        if (dp.stop_set(i, j)) ++interior_stop_cells;
      }
      const int idiag = static_cast<int>(std::lround(s / dx)) - i_lo;
      if (idiag >= 0 && idiag < x_grid.size() && !std::isnan(dp.V_dp(idiag, j)))
        worst_vs_integral = std::max(
            worst_vs_integral, std::abs(dp.V_dp(idiag, j) - v_row) /
                                   std::max(std::abs(v_row), 1e-8));
    }
    c.check(worst <= 0.02,
            "drawdown values vs closed-form surface on s in [0.8,2]: worst rel " +
                fmt(worst));
    c.check(interior_stop_cells == 0,
            "no interior stop cells on the wait band (matches the region map)");
    c.note("same lattice vs the executed-policy excursion integral on the diagonal: "
           "worst rel " + fmt(worst_vs_integral) +
           (worst_vs_integral <= 0.03 ? " (independent routes agree)" : ""));
  }
  c.finish();
}

// ---------------------------------------------------------------------- 9
void criterion9() {
  Criterion c(9, "seeded simulation is byte-identical across worker counts");
  const auto g = make_gbm(0.05, 0.25, 0.15);
  const auto put = make_put_reward(5.0);
  const double x_star = g.gamma0 * 5.0 / (g.gamma0 - 1.0);
  Policy p{[x_star](double m) { return m - x_star; }};
  MCConfig cfg;
  cfg.n_paths = 20000;
  cfg.dt = 2e-3;
  cfg.t_max = 40.0;
  cfg.seed = 424242;

  std::vector<std::string> bytes;
  for (int workers : {1, 4, 8}) {
    cfg.workers = workers;
    const auto r = simulate_policy(g.model, put, BoundarySpec::none(), p, 5.0, 5.0, cfg);
    const auto path = std::filesystem::temp_directory_path() /
                      ("exstop_acc_mc_" + std::to_string(workers) + ".csv");
    write_mc_csv(path, {{5.0, 5.0, r.estimate, r.std_error, r.n_stopped,
                         r.n_absorbed, r.n_censored}});
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    bytes.push_back(ss.str());
  }
  c.check(bytes[0] == bytes[1] && bytes[1] == bytes[2],
          "mc.csv identical for worker counts 1, 4, 8");
  c.finish();
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures) {
    std::printf("\n%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("\nall criteria passed\n");
  return 0;
}
