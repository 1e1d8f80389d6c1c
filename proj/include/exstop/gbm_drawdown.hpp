#pragma once

#include <optional>

#include "exstop/majorant.hpp"

namespace exstop {

/// Closed-form constants for the GBM drawdown-liquidation model: running
/// income x^{1/2}, terminal reward x, absorption at drawdown (1-beta) S.
struct DrawdownParams {
  double mu = 0.0, sigma = 0.0, q = 0.0, beta = 0.0;
  double alpha = 0.0;   ///< potential coefficient, fbar(x) = alpha sqrt(x)
  double gamma0 = 0.0;  ///< negative exponent, phi(x) = x^gamma0
  double gamma1 = 0.0;  ///< exponent > 1, psi(x) = x^gamma1
  double delta = 0.0;   ///< gamma1 - gamma0
  double p1 = 0.0;      ///< (1 - gamma0) / delta
  double p2 = 0.0;      ///< (1/2 - gamma0) / delta
  double r = 0.0;       ///< inflection ordinate of the transformed reward
  double u = 0.0;       ///< chord/tangency classification threshold
  double s_switch = 0.0;  ///< diagonal-value regime boundary
  bool r_recomputed = false;
  bool u_recomputed = false;
  bool s_switch_squared = false;  ///< printed formula required squaring

  double F(double x) const;
  double F_inv(double y) const;
  double phi(double x) const;
  double H(double y) const;    ///< transformed net reward
  double dH(double y) const;
  double d2H(double y) const;
};

/// Derives all constants. The closed-form expressions for r and u are checked
/// against their defining residuals (H''(r) = 0 and the tangent-comparison
/// equality at s = F^{-1}(u)) to 1e-8 and recomputed from the definitions when
/// the printed form fails. Throws ConvergenceViolated when
/// mu/2 - sigma^2/8 - q >= 0.
DrawdownParams make_app(double mu, double sigma, double q, double beta);

/// V(s,s): beta^{1-g0} s - alpha beta^{1/2-g0} sqrt(s) below s_switch,
/// the net reward s - alpha sqrt(s) above; continuous at the switch.
double vss_closed_form(const DrawdownParams& p, double s);

enum class CaseKind { ChordCase, TangencyCase, ConcaveCase };

/// Closed-form description of W_s on [F(s - b(s)), F(s)].
struct CaseDescriptor {
  CaseKind kind = CaseKind::ChordCase;
  double y_left = 0.0, y_right = 0.0;
  double chord_slope = 0.0, chord_icept = 0.0;  // linear part (Chord/Tangency)
  std::optional<double> R_s;                    // tangency ordinate
  double eval(const DrawdownParams& p, double y) const;
};

CaseDescriptor classify_case(const DrawdownParams& p, double s);

/// Tangency ordinate R_s of the line from the absorption anchor to H,
/// safeguarded Newton on (r, F(s)); defining residual below 1e-10 relative.
double tangency_point(const DrawdownParams& p, double s);

/// STOP/CONTINUE/INFEASIBLE map plus values from the closed-form W_s.
ValueSurface region_map(const DrawdownParams& p, const VectorXd& x_grid,
                        const VectorXd& s_grid);

/// The model/fundamental pair and reward spec matching these parameters.
GbmModel drawdown_gbm(const DrawdownParams& p);
RewardSpec drawdown_reward(const DrawdownParams& p);

}  // namespace exstop
