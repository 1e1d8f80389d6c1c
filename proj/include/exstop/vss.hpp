#pragma once

#include <optional>
#include <string>

#include "exstop/diffusion.hpp"
#include "exstop/reward.hpp"

namespace exstop {

/// Excursion-depth threshold policy: stop when S - X >= lD(S).
struct Policy {
  std::function<double(double)> lD;
};

enum class VssMethod { Corollary1, Prop2, Integral, XIndependent };

/// Diagonal value V(s,s) with the optimal depth threshold at level s.
struct VssSolution {
  double s = 0.0;
  double l_star = 0.0;
  double value = 0.0;
  double gamma_slope = 0.0;  ///< tangent slope of the transformed reward at s - l*
  VssMethod method = VssMethod::Corollary1;
  bool boundary_binding = false;  ///< l_star pinned to b(s)
};

/// Q(s; z) = F'(s) phi'(s) / (phi''(s) [F(s) - F(s-z)] + F'(s) phi'(s)),
/// with Q(s; 0) = 1.
double q_factor(const FundamentalPair& fp, double s, double z);

/// Maximizes z -> phi(s)/phi(s-z) * h(s-z, s) on [0, b_s]. Requires an
/// s-independent net reward.
VssSolution solve_corollary1(const FundamentalPair& fp, const RewardSpec& reward,
                             double s, double b_s);

/// Maximizes z -> phi(s)/phi(s-z) * Q(s;z) * h(s-z, s) on [0, b_s]. The
/// assumption check runs on a small default grid unless force is set.
VssSolution solve_prop2(const FundamentalPair& fp, const RewardSpec& reward,
                        double s, double b_s, bool force = false);

/// Closed form for x-independent rewards at a known threshold:
/// [psi'(s-l) phi(s) - psi(s) phi'(s-l)] /
/// [psi'(s-l) phi(s-l) - psi(s-l) phi'(s-l)] * h(s).
double solve_x_independent(const FundamentalPair& fp, const RewardSpec& reward,
                           double s, double l_star);

/// Smooth-fit representation at an interior threshold: returns {value, gamma}
/// where gamma is the transformed-reward slope at s - l_star and
/// value = phi(s) [gamma (F(s) - F(s-l*)) + h(s-l*, s)/phi(s-l*)].
std::pair<double, double> smooth_fit_value(const FundamentalPair& fp,
                                           const RewardSpec& reward, double s,
                                           double l_star);

struct QuadratureSpec {
  double abs_tol = 1e-9;
  int max_depth = 48;
};

/// exp(-int_s^m F'(u) / (F(u) - F(u - lD(u))) du); 1 at m = s, nonincreasing.
double survival_probability(const FundamentalPair& fp, const Policy& policy,
                            double s, double m, const QuadratureSpec& quad = {});

/// Value of an explicit threshold policy from the excursion integral
///   int_s^{m_max} phi(s)/phi(m-lD(m)) exp(-int_s^m hazard) hazard(m)
///                 h(m-lD(m), m) dm,
/// hazard(u) = F'(u)/(F(u)-F(u-lD(u))), with the inner exponent accumulated
/// on the same adaptive mesh. m_max <= s requests automatic truncation at
/// survival < 1e-10 (found by doubling); an explicit m_max with survival
/// above 1e-8 throws TruncationTooSmall. lD(u) = 0 is treated as immediate
/// stopping at level u.
double policy_value_integral(const FundamentalPair& fp, const RewardSpec& reward,
                             const Policy& policy, double s, double m_max = 0.0,
                             const QuadratureSpec& quad = {});

struct Prop2Report {
  bool monotone_in_s = true;
  bool phi_ratio_ok = true;
  std::string counterexample;
  bool pass() const { return monotone_in_s && phi_ratio_ok; }
};

/// Checks (1) h nondecreasing in s on the grid and (2) the phi-ratio
/// inequality phi(s)/phi(s+eps) * phi'(s+eps)/phi'(s) < 1 for all grid pairs.
Prop2Report check_prop2_assumptions(const FundamentalPair& fp,
                                    const RewardSpec& reward,
                                    const VectorXd& s_grid,
                                    const VectorXd& eps_grid);

}  // namespace exstop
