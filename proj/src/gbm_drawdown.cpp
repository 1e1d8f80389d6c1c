#include "exstop/gbm_drawdown.hpp"

#include <cmath>

namespace exstop {

double DrawdownParams::F(double x) const { return std::pow(x, delta); }
double DrawdownParams::F_inv(double y) const { return std::pow(y, 1.0 / delta); }
double DrawdownParams::phi(double x) const { return std::pow(x, gamma0); }
double DrawdownParams::H(double y) const {
  return std::pow(y, p1) - alpha * std::pow(y, p2);
}
double DrawdownParams::dH(double y) const {
  return p1 * std::pow(y, p1 - 1.0) - alpha * p2 * std::pow(y, p2 - 1.0);
}
double DrawdownParams::d2H(double y) const {
  return p1 * (p1 - 1.0) * std::pow(y, p1 - 2.0) -
         alpha * p2 * (p2 - 1.0) * std::pow(y, p2 - 2.0);
}

namespace {

// tangent to H at F(s), compared with H at the absorption ordinate F(beta s);
// positive means the tangent passes above the left anchor
double tangent_gap(const DrawdownParams& p, double s) {
  const double yr = p.F(s);
  const double yl = p.F(p.beta * s);
  return p.H(yr) + p.dH(yr) * (yl - yr) - p.H(yl);
}

double rel_d2H(const DrawdownParams& p, double y) {
  const double t1 = std::abs(p.p1 * (p.p1 - 1.0) * std::pow(y, p.p1 - 2.0));
  const double t2 =
      std::abs(p.alpha * p.p2 * (p.p2 - 1.0) * std::pow(y, p.p2 - 2.0));
  return std::abs(p.d2H(y)) / (t1 + t2 + 1e-300);
}

}  // namespace

DrawdownParams make_app(double mu, double sigma, double q, double beta) {
  if (!(sigma > 0.0)) raise(ErrorCode::NonpositiveSigma, "make_app");
  if (!(beta >= 0.0 && beta < 1.0))
    raise(ErrorCode::ConvergenceViolated, "make_app: beta must be in [0,1)");
  const double conv = mu / 2.0 - sigma * sigma / 8.0 - q;
  if (!(conv < 0.0))
    raise(ErrorCode::ConvergenceViolated,
          "make_app: mu/2 - sigma^2/8 - q must be negative");

  const GbmModel gbm = make_gbm(mu, sigma, q);

  DrawdownParams p;
  p.mu = mu;
  p.sigma = sigma;
  p.q = q;
  p.beta = beta;
  p.alpha = -1.0 / conv;
  p.gamma0 = gbm.gamma0;
  p.gamma1 = gbm.gamma1;
  p.delta = gbm.gamma1 - gbm.gamma0;
  p.p1 = (1.0 - p.gamma0) / p.delta;
  p.p2 = (0.5 - p.gamma0) / p.delta;

  // inflection ordinate, printed closed form guarded by its residual
  p.r = std::pow(p.alpha * (0.5 - p.gamma0) * (0.5 - p.gamma1) /
                     ((1.0 - p.gamma0) * (1.0 - p.gamma1)),
                 2.0 * p.delta);
  if (rel_d2H(p, p.r) > 1e-8) {
    p.r_recomputed = true;
    // single sign change of d2H in log-ordinate
    const double base = p.alpha * p.p2 * (1.0 - p.p2) / (p.p1 * (1.0 - p.p1));
    double lo = std::pow(base, 2.0 * p.delta) * 1e-6;
    double hi = std::pow(base, 2.0 * p.delta) * 1e6;
    p.r = bisect_root([&](double y) { return p.d2H(y); }, lo, hi, 1e-14);
  }

  // chord/tangency threshold, printed closed form guarded by the
  // tangent-comparison equality at s = F^{-1}(u)
  const double bd = std::pow(beta, p.delta);
  {
    const double num =
        p.alpha * (p.p2 + std::pow(beta, p.p2) - bd * p.p2 - 1.0);
    const double den = p.p1 + std::pow(beta, p.p1) - bd * p.p1 - 1.0;
    p.u = std::pow(num / den, 2.0 * p.delta);
  }
  auto u_residual = [&](double u) {
    if (!(u > 0.0) || !std::isfinite(u)) return 1.0;
    const double s = p.F_inv(u);
    const double scale = std::abs(p.H(p.F(s))) + std::abs(p.H(p.F(beta * s))) + 1e-300;
    return std::abs(tangent_gap(p, s)) / scale;
  };
  if (u_residual(p.u) > 1e-8) {
    p.u_recomputed = true;
    const double s_scale = p.alpha * p.alpha;  // natural state scale of the model
    const double s_u = bisect_root([&](double s) { return tangent_gap(p, s); },
                                   1e-3 * s_scale, 1e4 * s_scale, 1e-14);
    p.u = p.F(s_u);
  }

  // diagonal regime boundary: branch continuity pins the exponent grouping
  const double root = p.alpha * (1.0 - std::pow(beta, 0.5 - p.gamma0)) /
                      (1.0 - std::pow(beta, 1.0 - p.gamma0));
  p.s_switch = root * root;
  {
    auto branch_gap = [&](double s) {
      const double b1 = std::pow(beta, 1.0 - p.gamma0) * s -
                        p.alpha * std::pow(beta, 0.5 - p.gamma0) * std::sqrt(s);
      const double h = s - p.alpha * std::sqrt(s);
      return std::abs(b1 - h) / (std::abs(h) + 1e-300);
    };
    p.s_switch_squared = branch_gap(root) > 1e-8;  // printed (unsquared) reading fails
    if (branch_gap(p.s_switch) > 1e-8)
      raise(ErrorCode::ConvergenceViolated, "make_app: no continuous regime switch");
  }
  return p;
}

double vss_closed_form(const DrawdownParams& p, double s) {
  if (!(s > 0.0)) raise(ErrorCode::NonpositiveState, "vss_closed_form");
  if (s < p.s_switch)
    return std::pow(p.beta, 1.0 - p.gamma0) * s -
           p.alpha * std::pow(p.beta, 0.5 - p.gamma0) * std::sqrt(s);
  return s - p.alpha * std::sqrt(s);
}

double CaseDescriptor::eval(const DrawdownParams& p, double y) const {
  switch (kind) {
    case CaseKind::ChordCase:
      return chord_icept + chord_slope * y;
    case CaseKind::TangencyCase:
      return (y < *R_s) ? chord_icept + chord_slope * y : p.H(y);
    case CaseKind::ConcaveCase:
      return p.H(y);
  }
  return 0.0;
}

CaseDescriptor classify_case(const DrawdownParams& p, double s) {
  if (!(s > 0.0)) raise(ErrorCode::NonpositiveState, "classify_case");
  CaseDescriptor d;
  d.y_right = p.F(s);
  d.y_left = p.beta > 0.0 ? p.F(p.beta * s) : 0.0;
  const double Hl = p.beta > 0.0 ? p.H(d.y_left) : 0.0;

  if (d.y_left > p.r) {
    d.kind = CaseKind::ConcaveCase;
    return d;
  }
  if (d.y_right <= p.u) {
    d.kind = CaseKind::ChordCase;
    const double Wr = vss_closed_form(p, s) / p.phi(s);
    d.chord_slope = (Wr - Hl) / (d.y_right - d.y_left);
    d.chord_icept = Hl - d.chord_slope * d.y_left;
    return d;
  }
  d.kind = CaseKind::TangencyCase;
  d.R_s = tangency_point(p, s);
  d.chord_slope = p.dH(*d.R_s);
  d.chord_icept = p.H(*d.R_s) - d.chord_slope * *d.R_s;
  return d;
}

double tangency_point(const DrawdownParams& p, double s) {
  const double yr = p.F(s);
  const double yl = p.beta > 0.0 ? p.F(p.beta * s) : 0.0;
  const double Hl = p.beta > 0.0 ? p.H(yl) : 0.0;
  if (!(yr > p.r))
    raise(ErrorCode::NoTangency, "tangency_point: F(s) <= r, wrong case");

  auto g = [&](double y) { return p.dH(y) * (y - yl) - (p.H(y) - Hl); };
  auto dg = [&](double y) { return p.d2H(y) * (y - yl); };
  const double lo = p.r * (1.0 + 1e-12);
  const double R = newton_safeguarded(g, dg, lo, yr, 0.5 * (lo + yr),
                                      1e-12 * (std::abs(Hl) + 1.0));
  const double scale =
      std::abs(p.dH(R) * (R - yl)) + std::abs(p.H(R)) + std::abs(Hl) + 1e-300;
  if (std::abs(g(R)) / scale > 1e-10)
    raise(ErrorCode::NoTangency, "tangency_point: residual too large");
  return R;
}

ValueSurface region_map(const DrawdownParams& p, const VectorXd& x_grid,
                        const VectorXd& s_grid) {
  const int nx = static_cast<int>(x_grid.size());
  const int ns = static_cast<int>(s_grid.size());
  ValueSurface surf;
  surf.x_grid = x_grid;
  surf.s_grid = s_grid;
  surf.V = Eigen::MatrixXd::Zero(nx, ns);
  surf.region.setConstant(nx, ns, static_cast<std::int8_t>(RegionLabel::INFEASIBLE));
  surf.row_recomputed.assign(ns, 0);

  for (int j = 0; j < ns; ++j) {
    const double s = s_grid[j];
    if (!(s > 0.0)) raise(ErrorCode::NonpositiveState, "region_map");
    const CaseDescriptor d = classify_case(p, s);
    for (int i = 0; i < nx; ++i) {
      const double x = x_grid[i];
      if (!(x > 0.0) || x < p.beta * s || x > s) continue;
      const double y = p.F(x);
      const double w = d.eval(p, y);
      const double Hy = p.H(y);
      surf.V(i, j) = p.phi(x) * w;
      const bool stop = (w - Hy) <= 1e-9 * (1.0 + std::abs(Hy));
      surf.region(i, j) = static_cast<std::int8_t>(stop ? RegionLabel::STOP
                                                        : RegionLabel::CONTINUE);
    }
  }
  return surf;
}

GbmModel drawdown_gbm(const DrawdownParams& p) {
  return make_gbm(p.mu, p.sigma, p.q);
}

RewardSpec drawdown_reward(const DrawdownParams& p) {
  return make_power_income_reward(p.mu, p.sigma, p.q, 0.5, TerminalId::Linear,
                                  AbsorptionConvention::RewardAtAbsorption);
}

}  // namespace exstop
