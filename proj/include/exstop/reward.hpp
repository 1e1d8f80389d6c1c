#pragma once

#include <functional>
#include <optional>

#include "exstop/diffusion.hpp"
#include "exstop/numerics.hpp"

namespace exstop {

enum class AbsorptionConvention { ZeroAtAbsorption, RewardAtAbsorption };

using Fn2 = std::function<double(double, double)>;

/// Terminal reward g, running income f, its q-potential fbar, and the net
/// reward h = g - fbar used by every solver.
struct RewardSpec {
  Fn2 g;
  Fn2 f;
  Fn2 fbar;
  Fn2 h;
  Fn2 dh_dx;  // optional analytic x-derivative of h
  bool s_dependent = false;
  AbsorptionConvention absorption = AbsorptionConvention::ZeroAtAbsorption;
  bool stochastic_fbar = false;

  /// Payoff collected when the drawdown exceeds b(S) at state (x, s).
  double absorption_payoff(double x, double s) const {
    return absorption == AbsorptionConvention::RewardAtAbsorption ? h(x, s)
                                                                  : -fbar(x, s);
  }
};

/// g = (K - x)^+, no running income.
RewardSpec make_put_reward(
    double K,
    AbsorptionConvention conv = AbsorptionConvention::ZeroAtAbsorption);

/// g = s - k x with k in [0, 1]; k = 0 is the Shepp-Shiryaev reward.
RewardSpec make_lookback_reward(
    double k,
    AbsorptionConvention conv = AbsorptionConvention::ZeroAtAbsorption);

enum class TerminalId { Linear, Zero };

/// GBM running income f = x^p with closed-form potential fbar = alpha_p x^p,
/// alpha_p = 1 / (q - mu p - sigma^2 p (p-1) / 2); terminal reward per g_id.
/// Throws ConvergenceViolated when the potential diverges.
RewardSpec make_power_income_reward(
    double mu, double sigma, double q, double p, TerminalId g_id,
    AbsorptionConvention conv = AbsorptionConvention::RewardAtAbsorption);

/// Tabulated net reward h(x, s) with bilinear interpolation; g = h, f = 0.
struct RewardTable {
  VectorXd xs, ss;     // strictly increasing axes
  Eigen::MatrixXd h;   // h(i, j) at (xs[i], ss[j])
  double interpolate(double x, double s) const;
};
RewardSpec make_table_reward(
    RewardTable table,
    AbsorptionConvention conv = AbsorptionConvention::ZeroAtAbsorption);

/// Max relative Feynman-Kac residual |(A - q) fbar + f| over sample points,
/// for validating closed-form potentials. Skipped for stochastic fbar.
double feynman_kac_residual(const DiffusionModel& model,
                            const RewardSpec& reward,
                            const std::vector<std::pair<double, double>>& pts);

/// MC-backed potential of an x-only income on a grid, with monotone cubic
/// interpolation between the nodes. Forward-declared config; see simulate.hpp.
struct MCConfig;
Fn2 make_mc_fbar(const DiffusionModel& model,
                 const std::function<double(double)>& f, const VectorXd& x_grid,
                 const MCConfig& cfg);

enum class BoundaryKind { Proportional, Constant, None, Custom };

/// Absorbing drawdown depth b(s) >= 0.
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::None;
  double beta = 0.0;      // Proportional: b(s) = (1 - beta) s
  double c = 0.0;         // Constant depth
  double floor_lo = 0.0;  // None: b(s) = s - floor_lo
  std::function<double(double)> custom;

  double b(double s) const {
    switch (kind) {
      case BoundaryKind::Proportional: return (1.0 - beta) * s;
      case BoundaryKind::Constant: return c;
      case BoundaryKind::None: return s - floor_lo;
      case BoundaryKind::Custom: return custom(s);
    }
    return 0.0;
  }

  static BoundarySpec proportional(double beta);
  static BoundarySpec constant(double depth);
  static BoundarySpec none(double lo = 0.0);
  static BoundarySpec custom_fn(std::function<double(double)> fn);
};

}  // namespace exstop
