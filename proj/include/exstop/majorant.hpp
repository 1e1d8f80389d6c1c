#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "exstop/vss.hpp"

namespace exstop {

enum class RegionLabel : std::int8_t { STOP = 0, CONTINUE = 1, INFEASIBLE = 2 };

/// Sampled transformed obstacle H_s(y) = h(F^{-1}(y), s) / phi(F^{-1}(y)) on
/// [F(s - b(s)), F(s)] with the absorption and diagonal anchor values.
struct Obstacle {
  double s = 0.0;
  double x_left = 0.0;  ///< s - b(s), clamped inside the state space
  VectorXd y;           ///< strictly increasing sample ordinates
  VectorXd x;           ///< F^{-1}(y)
  VectorXd H;
  double left_anchor = 0.0;   ///< value at y[0] per the absorption convention
  double right_anchor = 0.0;  ///< V(s,s)/phi(s)
};

/// Smallest concave majorant of the obstacle anchored at both ends.
struct MajorantResult {
  double s = 0.0;
  VectorXd y_grid;
  VectorXd H;
  VectorXd W;
  std::pair<double, double> left_anchor;   // (y, value)
  std::pair<double, double> right_anchor;  // (y, value)
  std::optional<double> R_s;               // smallest interior contact ordinate
  std::vector<std::int8_t> labels;         // per-sample STOP/CONTINUE
  std::vector<int> hull;                   // hull vertex indices into y_grid
  bool anchor_raised = false;  ///< right anchor lifted to the hull fixed point

  // captured for exact W - H recomputation in value_at
  Fn2 h;
};

/// Samples H_s with >= min_samples points, 4x denser near kinks of h detected
/// by one-sided derivative jumps. vss_value is V(s,s) from the vss solver.
Obstacle build_obstacle(const FundamentalPair& fp, const RewardSpec& reward,
                        double s, const BoundarySpec& b_spec, double vss_value,
                        int min_samples = 1024);

/// Upper concave envelope of the samples and anchors via monotone-chain hull.
/// Labels STOP where W - H <= 1e-9 (1 + |H|). Throws AnchorBelowObstacle when
/// the diagonal anchor sits below the obstacle beyond tolerance.
MajorantResult smallest_concave_majorant(const Obstacle& obstacle,
                                         const RewardSpec& reward);

/// V(x, s) = phi(x) W(F(x)) with exact linear evaluation on hull segments and
/// monotone cubic interpolation along contact stretches.
std::pair<double, RegionLabel> value_at(const MajorantResult& majorant,
                                        const FundamentalPair& fp, double x);

struct ValueSurface {
  VectorXd x_grid, s_grid;
  Eigen::MatrixXd V;                                  // V(ix, is)
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> region;
  std::vector<std::uint8_t> row_recomputed;           // anchor fixed-point rows
};

struct SurfaceOptions {
  int min_samples = 1024;
  int workers = 0;  // 0 = auto, capped by EXCURSION_STOP_THREADS
};

/// Row-by-row construction: V(s,s) from the vss solver (Corollary 1 for
/// s-independent rewards, Proposition 2 otherwise), then the majorant fills
/// the row. Rows are independent and merged by index.
ValueSurface build_surface(const FundamentalPair& fp, const RewardSpec& reward,
                           const BoundarySpec& b_spec, const VectorXd& x_grid,
                           const VectorXd& s_grid,
                           const SurfaceOptions& opts = {});

}  // namespace exstop
