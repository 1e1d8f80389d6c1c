#include "exstop/vss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace exstop {

namespace {

// Trims the maximization interval so s - z stays strictly inside the domain.
double clamp_z_hi(const FundamentalPair& fp, double s, double b_s) {
  double z_hi = b_s;
  const double lo = fp.domain.lo;
  if (std::isfinite(lo)) {
    const double margin = 1e-12 * (1.0 + std::abs(s));
    z_hi = std::min(z_hi, s - lo - margin);
  }
  return z_hi;
}

double transformed_reward(const FundamentalPair& fp, const RewardSpec& reward,
                          double x, double s) {
  return reward.h(x, s) / fp.phi(x);
}

// gamma from the explicit-value identity V/phi(s) = gamma dF + h/phi at s-l*.
double gamma_from_value(const FundamentalPair& fp, const RewardSpec& reward,
                        double s, double l_star, double value) {
  if (l_star <= 1e-14 * (1.0 + std::abs(s))) return 0.0;
  const double dFspan = fp.F(s) - fp.F(s - l_star);
  if (dFspan <= 0.0) return 0.0;
  const double g =
      (value / fp.phi(s) - transformed_reward(fp, reward, s - l_star, s)) /
      dFspan;
  // an exact argmax can leave tiny negative noise
  return (g < 0.0 && g > -1e-9) ? 0.0 : g;
}

void mark_binding(VssSolution& sol, double b_s) {
  sol.boundary_binding = (b_s > 0.0) && (sol.l_star >= b_s - 1e-9 * b_s);
}

}  // namespace

double q_factor(const FundamentalPair& fp, double s, double z) {
  fp.require_inside(s, "q_factor: s");
  if (z <= 0.0) return 1.0;
  fp.require_inside(s - z, "q_factor: s - z");
  const double num = fp.dF(s) * fp.dphi(s);
  const double den = fp.d2phi(s) * (fp.F(s) - fp.F(s - z)) + num;
  if (den == 0.0) raise(ErrorCode::DivisionByZero, "q_factor denominator");
  return num / den;
}

VssSolution solve_corollary1(const FundamentalPair& fp, const RewardSpec& reward,
                             double s, double b_s) {
  fp.require_inside(s, "solve_corollary1: s");
  if (reward.s_dependent)
    raise(ErrorCode::RequiresSIndependent, "solve_corollary1");
  if (b_s < 0.0) raise(ErrorCode::EmptyDomain, "solve_corollary1: b_s < 0");

  VssSolution sol;
  sol.s = s;
  sol.method = VssMethod::Corollary1;

  const double z_hi = clamp_z_hi(fp, s, b_s);
  if (z_hi <= 0.0) {
    sol.l_star = 0.0;
    sol.value = reward.h(s, s);
    sol.gamma_slope = 0.0;
    mark_binding(sol, b_s);
    return sol;
  }

  const double phis = fp.phi(s);
  auto objective = [&](double z) {
    const double x = s - z;
    return phis / fp.phi(x) * reward.h(x, s);
  };
  const auto m = maximize_scalar(objective, 0.0, z_hi);
  sol.l_star = m.x;
  sol.value = m.value;
  sol.gamma_slope = gamma_from_value(fp, reward, s, sol.l_star, sol.value);
  mark_binding(sol, b_s);
  return sol;
}

VssSolution solve_prop2(const FundamentalPair& fp, const RewardSpec& reward,
                        double s, double b_s, bool force) {
  fp.require_inside(s, "solve_prop2: s");
  if (b_s < 0.0) raise(ErrorCode::EmptyDomain, "solve_prop2: b_s < 0");

  if (!force) {
    VectorXd s_grid(3), eps_grid(3);
    s_grid << 0.5 * s, s, 1.5 * s;
    eps_grid << 1e-3 * s, 1e-2 * s, 0.1 * s;
    if (std::isfinite(fp.domain.hi)) {
      for (int i = 0; i < 3; ++i)
        s_grid[i] = std::min(s_grid[i], 0.5 * (s + fp.domain.hi));
    }
    const auto rep = check_prop2_assumptions(fp, reward, s_grid, eps_grid);
    if (!rep.pass())
      raise(ErrorCode::AssumptionViolated, rep.counterexample);
  }

  VssSolution sol;
  sol.s = s;
  sol.method = VssMethod::Prop2;

  const double z_hi = clamp_z_hi(fp, s, b_s);
  if (z_hi <= 0.0) {
    sol.l_star = 0.0;
    sol.value = reward.h(s, s);
    mark_binding(sol, b_s);
    return sol;
  }

  const double phis = fp.phi(s);
  const double num = fp.dF(s) * fp.dphi(s);
  const double d2phis = fp.d2phi(s);
  const double Fs = fp.F(s);
  auto objective = [&](double z) {
    const double x = s - z;
    const double den = d2phis * (Fs - fp.F(x)) + num;
    const double Q = (z <= 0.0 || den == 0.0) ? 1.0 : num / den;
    return phis / fp.phi(x) * Q * reward.h(x, s);
  };
  const auto m = maximize_scalar(objective, 0.0, z_hi);
  sol.l_star = m.x;
  sol.value = m.value;
  sol.gamma_slope = gamma_from_value(fp, reward, s, sol.l_star, sol.value);
  mark_binding(sol, b_s);
  return sol;
}

double solve_x_independent(const FundamentalPair& fp, const RewardSpec& reward,
                           double s, double l_star) {
  fp.require_inside(s, "solve_x_independent: s");
  const double x = s - l_star;
  fp.require_inside(x, "solve_x_independent: s - l*");
  const double num = fp.dpsi(x) * fp.phi(s) - fp.psi(s) * fp.dphi(x);
  const double den = fp.dpsi(x) * fp.phi(x) - fp.psi(x) * fp.dphi(x);
  if (den == 0.0)
    raise(ErrorCode::DivisionByZero, "solve_x_independent: Wronskian vanished");
  return num / den * reward.h(x, s);
}

std::pair<double, double> smooth_fit_value(const FundamentalPair& fp,
                                           const RewardSpec& reward, double s,
                                           double l_star) {
  fp.require_inside(s, "smooth_fit_value: s");
  const double x = s - l_star;
  fp.require_inside(x, "smooth_fit_value: s - l*");

  double dh;
  if (reward.dh_dx) {
    dh = reward.dh_dx(x, s);
  } else {
    auto hx = [&](double t) { return reward.h(t, s); };
    const double step = 1e-6 * (1.0 + std::abs(x));
    const double dl = left_derivative(hx, x, step);
    const double dr = right_derivative(hx, x, step);
    if (std::abs(dl - dr) > 1e-4 * (1.0 + std::abs(dl) + std::abs(dr)))
      raise(ErrorCode::NotDifferentiable, "smooth_fit_value: kink at s - l*");
    dh = richardson_derivative(hx, x, step).first;
  }
  const double phix = fp.phi(x);
  const double ratio_prime =
      (dh * phix - reward.h(x, s) * fp.dphi(x)) / (phix * phix);
  const double gamma = ratio_prime / fp.dF(x);
  const double value =
      fp.phi(s) * (gamma * (fp.F(s) - fp.F(x)) + reward.h(x, s) / phix);
  return {value, gamma};
}

namespace {

// First level in (s, hi] where the policy's depth hits zero, if any; scan on a
// fixed grid, smooth policies only need this at the spec's convention edge.
std::optional<double> first_zero_level(const Policy& policy, double s,
                                       double hi) {
  constexpr int kScan = 4096;
  for (int i = 1; i <= kScan; ++i) {
    const double u = s + (hi - s) * i / kScan;
    if (policy.lD(u) <= 0.0) {
      double a = s + (hi - s) * (i - 1) / kScan, b = u;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        (policy.lD(m) <= 0.0 ? b : a) = m;
      }
      return b;
    }
  }
  return std::nullopt;
}

double hazard_at(const FundamentalPair& fp, const Policy& policy, double u) {
  const double l = policy.lD(u);
  if (l <= 0.0)
    raise(ErrorCode::ZeroDenominator, "zero threshold inside integration range");
  const double den = fp.F(u) - fp.F(u - l);
  if (den <= 0.0) raise(ErrorCode::ZeroDenominator, "F span vanished");
  return fp.dF(u) / den;
}

// Cash-Karp embedded RK pair on y' = rhs(m, y), y = (hazard integral,
// accumulated value). One adaptive mesh serves both components.
template <typename Rhs>
void integrate_rk(const Rhs& rhs, double a, double b, double y[2],
                  double abs_tol) {
  static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5, c5 = 1.0,
                      c6 = 7.0 / 8;
  static const double b21 = 1.0 / 5;
  static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
  static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
  static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27,
                      b54 = 35.0 / 27;
  static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512,
                      b63 = 575.0 / 13824, b64 = 44275.0 / 110592,
                      b65 = 253.0 / 4096;
  static const double w1 = 37.0 / 378, w3 = 250.0 / 621, w4 = 125.0 / 594,
                      w6 = 512.0 / 1771;
  static const double e1 = w1 - 2825.0 / 27648, e3 = w3 - 18575.0 / 48384,
                      e4 = w4 - 13525.0 / 55296, e5 = -277.0 / 14336,
                      e6 = w6 - 1.0 / 4;

  double m = a;
  double hstep = (b - a) / 64.0;
  int guard = 0;
  while (m < b && ++guard < 2000000) {
    hstep = std::min(hstep, b - m);
    double k1[2], k2[2], k3[2], k4[2], k5[2], k6[2], yt[2];
    rhs(m, y, k1);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + hstep * b21 * k1[i];
    rhs(m + c2 * hstep, yt, k2);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + hstep * (b31 * k1[i] + b32 * k2[i]);
    rhs(m + c3 * hstep, yt, k3);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + hstep * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
    rhs(m + c4 * hstep, yt, k4);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] +
              hstep * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
    rhs(m + c5 * hstep, yt, k5);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + hstep * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] +
                              b64 * k4[i] + b65 * k5[i]);
    rhs(m + c6 * hstep, yt, k6);

    double err = 0.0, ynew[2];
    for (int i = 0; i < 2; ++i) {
      ynew[i] = y[i] + hstep * (w1 * k1[i] + w3 * k3[i] + w4 * k4[i] +
                                w6 * k6[i]);
      err = std::max(err, std::abs(hstep * (e1 * k1[i] + e3 * k3[i] +
                                            e4 * k4[i] + e5 * k5[i] +
                                            e6 * k6[i])));
    }
    if (err <= abs_tol || hstep <= 1e-14 * (1.0 + std::abs(m))) {
      m += hstep;
      y[0] = ynew[0];
      y[1] = ynew[1];
      hstep *= std::min(5.0, 0.9 * std::pow(abs_tol / std::max(err, 1e-300), 0.2));
    } else {
      hstep *= std::max(0.1, 0.9 * std::pow(abs_tol / err, 0.25));
    }
  }
}

}  // namespace

double survival_probability(const FundamentalPair& fp, const Policy& policy,
                            double s, double m, const QuadratureSpec& quad) {
  fp.require_inside(s, "survival_probability: s");
  if (!(m >= s)) raise(ErrorCode::OutOfDomain, "survival_probability: m < s");
  if (m == s) return 1.0;
  fp.require_inside(m, "survival_probability: m");
  if (policy.lD(s) <= 0.0) return 0.0;
  if (auto u0 = first_zero_level(policy, s, m)) {
    (void)u0;
    return 0.0;  // the maximum cannot pass a level that stops on arrival
  }
  const double expo = adaptive_simpson(
      [&](double u) { return hazard_at(fp, policy, u); }, s, m, quad.abs_tol,
      quad.max_depth);
  return std::exp(-expo);
}

double policy_value_integral(const FundamentalPair& fp, const RewardSpec& reward,
                             const Policy& policy, double s, double m_max,
                             const QuadratureSpec& quad) {
  fp.require_inside(s, "policy_value_integral: s");
  if (policy.lD(s) <= 0.0) return reward.h(s, s);  // immediate stop convention

  const bool auto_truncate = !(m_max > s);
  const double cap = std::isfinite(fp.domain.hi) ? fp.domain.hi * (1 - 1e-9)
                                                 : 1e12 * (1.0 + s);

  const double phis = fp.phi(s);
  auto rhs = [&](double m, const double y[2], double out[2]) {
    const double hz = hazard_at(fp, policy, m);
    const double x = m - policy.lD(m);
    out[0] = hz;
    out[1] = phis / fp.phi(x) * std::exp(-y[0]) * hz * reward.h(x, m);
  };

  double y[2] = {0.0, 0.0};
  std::optional<double> stop_level;

  if (auto_truncate) {
    // extend by doubling until the survival factor is below 1e-10 and the
    // last segment no longer moves the value
    double seg_lo = s;
    double seg_hi = 2.0 * std::max(s, 1.0);
    for (int pass = 0; pass < 60; ++pass) {
      seg_hi = std::min(seg_hi, cap);
      stop_level = first_zero_level(policy, seg_lo, seg_hi);
      if (stop_level) {
        integrate_rk(rhs, seg_lo, *stop_level, y, quad.abs_tol);
        break;
      }
      const double before = y[1];
      integrate_rk(rhs, seg_lo, seg_hi, y, quad.abs_tol);
      const double increment = std::abs(y[1] - before);
      if ((std::exp(-y[0]) < 1e-10 &&
           increment <= std::max(10.0 * quad.abs_tol, 1e-8 * (1.0 + std::abs(y[1])))) ||
          seg_hi >= cap)
        break;
      seg_lo = seg_hi;
      seg_hi *= 2.0;
    }
  } else {
    fp.require_inside(m_max, "policy_value_integral: m_max");
    stop_level = first_zero_level(policy, s, m_max);
    if (!stop_level &&
        survival_probability(fp, policy, s, m_max, quad) > 1e-8)
      raise(ErrorCode::TruncationTooSmall,
            "survival at m_max above 1e-8; result unreliable");
    integrate_rk(rhs, s, stop_level ? *stop_level : m_max, y, quad.abs_tol);
  }

  double value = y[1];
  if (stop_level) {
    // mass that reaches the first zero-threshold level stops there
    const double u0 = *stop_level;
    value += std::exp(-y[0]) * phis / fp.phi(u0) * reward.h(u0, u0);
  }
  return value;
}

Prop2Report check_prop2_assumptions(const FundamentalPair& fp,
                                    const RewardSpec& reward,
                                    const VectorXd& s_grid,
                                    const VectorXd& eps_grid) {
  Prop2Report rep;

  // (1) h nondecreasing in the second argument
  for (int i = 0; i + 1 < s_grid.size() && rep.monotone_in_s; ++i) {
    const double s1 = s_grid[i];
    for (int j = i + 1; j < s_grid.size() && rep.monotone_in_s; ++j) {
      const double s2 = s_grid[j];
      if (!(s2 > s1)) continue;
      for (int k = 1; k <= 16; ++k) {
        double x = s1 * k / 16.0;
        if (!fp.domain.contains(x)) x = fp.domain.lo + (s1 - fp.domain.lo) * k / 17.0;
        if (!fp.domain.contains(x)) continue;
        if (reward.h(x, s2) < reward.h(x, s1) - 1e-12 * (1.0 + std::abs(reward.h(x, s1)))) {
          rep.monotone_in_s = false;
          std::ostringstream os;
          os << "h(" << x << ", " << s2 << ") < h(" << x << ", " << s1 << ")";
          rep.counterexample = os.str();
          break;
        }
      }
    }
  }

  // (2) phi(s)/phi(s+eps) * phi'(s+eps)/phi'(s) < 1
  for (int i = 0; i < s_grid.size() && rep.phi_ratio_ok; ++i) {
    const double s = s_grid[i];
    if (!fp.domain.contains(s)) continue;
    for (int j = 0; j < eps_grid.size(); ++j) {
      const double eps = eps_grid[j];
      if (!(eps > 0.0) || !fp.domain.contains(s + eps)) continue;
      const double ratio =
          fp.phi(s) / fp.phi(s + eps) * fp.dphi(s + eps) / fp.dphi(s);
      if (!(ratio < 1.0)) {
        rep.phi_ratio_ok = false;
        std::ostringstream os;
        os << "phi-ratio condition fails at s=" << s << " eps=" << eps
           << " (ratio=" << ratio << ")";
        rep.counterexample = os.str();
        break;
      }
    }
  }
  return rep;
}

}  // namespace exstop
