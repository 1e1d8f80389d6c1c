#pragma once

#include <cstdint>

#include "exstop/vss.hpp"

namespace exstop {

enum class Scheme { ExactGBM, EulerMaruyama };

struct MCConfig {
  std::int64_t n_paths = 10000;
  double dt = 1e-3;
  double t_max = 100.0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::ExactGBM;
  bool antithetic = false;
  /// Brownian-bridge treatment of the per-step maximum of log X and of
  /// barrier crossings (exact for GBM). Acceptance tolerances assume it.
  bool bridge = true;
  int workers = 0;  // 0 = auto, capped by EXCURSION_STOP_THREADS
};

struct MCResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_stopped = 0;
  std::int64_t n_absorbed = 0;
  std::int64_t n_censored = 0;
  bool discount_bias_note = false;  ///< e^{-q t_max} > 1e-6
};

/// Runs the threshold policy on simulated (X, S) paths: accumulates the
/// discounted running income by trapezoid, stops when S - X >= lD(S) with
/// payoff e^{-q tau} g, absorbs when S - X > b(S) with payoff per the
/// absorption convention, censors at t_max. Ties (stop depth equal to the
/// absorbing depth) resolve to stopping. Deterministic for a fixed
/// (seed, n_paths) for any worker count: per-path streams are derived from
/// the master seed by path index and reduced in index order.
MCResult simulate_policy(const DiffusionModel& model, const RewardSpec& reward,
                         const BoundarySpec& b_spec, const Policy& policy,
                         double x0, double s0, const MCConfig& cfg);

/// MC estimate of the q-potential of f at (x0, s0): {value, std_error}.
std::pair<double, double> estimate_fbar(const DiffusionModel& model, const Fn2& f,
                                        double x0, double s0,
                                        const MCConfig& cfg);

struct LatticeDPResult {
  VectorXd x_grid, s_grid;
  Eigen::MatrixXd V_dp;  // V(ix, is); NaN outside the feasible wedge
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> stop_set;
};

/// Markov-chain-approximation oracle for the net-reward stopping problem:
/// stopping pays h(x, s), crossing the drawdown boundary pays the absorption
/// convention value, the diagonal couples each row to the row above. Grids
/// must share one uniform spacing with every s on the x grid; the top row is
/// closed with immediate stopping. The explicit-chain monotonicity condition
/// sigma(x)^2 dt <= dx^2 (plus the drift bound) is checked and throws
/// UnstableScheme. Each row's discrete Bellman equation is solved exactly by
/// policy iteration on a tridiagonal system, which reaches the same fixed
/// point as sup-norm value iteration at tolerance 1e-10.
LatticeDPResult lattice_dp(const DiffusionModel& model, const RewardSpec& reward,
                           const BoundarySpec& b_spec, const VectorXd& x_grid,
                           const VectorXd& s_grid, double dt);

struct HittingReport {
  double analytic = 0.0;
  double mc = 0.0;
  double std_error = 0.0;
  double z_score = 0.0;
  bool pass = false;  ///< |z| <= 3
};

/// MC check of E[e^{-q T_z}] against psi(x)/psi(z) (x <= z) or phi(x)/phi(z).
HittingReport verify_hitting_identity(const DiffusionModel& model,
                                      const FundamentalPair& fp, double x,
                                      double z, const MCConfig& cfg);

}  // namespace exstop
