#include "exstop/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "exstop/parallel.hpp"

namespace exstop {

namespace {

constexpr double kContactTol = 1e-9;

double contact_tol(double H) { return kContactTol * (1.0 + std::abs(H)); }

}  // namespace

Obstacle build_obstacle(const FundamentalPair& fp, const RewardSpec& reward,
                        double s, const BoundarySpec& b_spec, double vss_value,
                        int min_samples) {
  fp.require_inside(s, "build_obstacle: s");
  const double b_s = b_spec.b(s);
  if (!(b_s > 0.0)) raise(ErrorCode::DegenerateInterval, "build_obstacle: b(s) <= 0");

  double x_left = s - b_s;
  if (std::isfinite(fp.domain.lo)) {
    const double margin = std::max(1e-10, 1e-8 * (s - fp.domain.lo));
    x_left = std::max(x_left, fp.domain.lo + margin);
  }
  const double y_lo = fp.F(x_left);
  const double y_hi = fp.F(s);
  if (!(y_hi - y_lo > 1e-12 * (1.0 + std::abs(y_hi))))
    raise(ErrorCode::DegenerateInterval, "build_obstacle: F span below 1e-12");

  const int n0 = std::max(min_samples, 16);

  // uniform in x; uniform ordinates would crush the low-x end under a
  // power-law F
  std::vector<double> xs(n0 + 1);
  for (int i = 0; i <= n0; ++i) xs[i] = x_left + (s - x_left) * i / n0;
  xs.back() = s;

  // kink cells of h: one-sided slope jump above threshold
  std::vector<std::uint8_t> kink(n0 + 1, 0);
  {
    auto hx = [&](double x) { return reward.h(x, s); };
    for (int i = 1; i < n0; ++i) {
      const double step = 1e-6 * (1.0 + std::abs(xs[i]));
      const double dl = left_derivative(hx, xs[i], step);
      const double dr = right_derivative(hx, xs[i], step);
      if (std::abs(dr - dl) > 1e-3 * (1.0 + std::abs(dl)))
        kink[i] = 1;
    }
  }

  std::vector<double> dense;
  dense.reserve(xs.size() * 2);
  for (int i = 0; i < n0; ++i) {
    dense.push_back(xs[i]);
    if (kink[i] || kink[i + 1]) {
      const double step = (xs[i + 1] - xs[i]) / 4.0;
      dense.push_back(xs[i] + step);
      dense.push_back(xs[i] + 2 * step);
      dense.push_back(xs[i] + 3 * step);
    }
  }
  dense.push_back(s);

  Obstacle obs;
  obs.s = s;
  obs.x_left = x_left;
  const int n = static_cast<int>(dense.size());
  obs.y.resize(n);
  obs.x.resize(n);
  obs.H.resize(n);
  for (int i = 0; i < n; ++i) {
    obs.x[i] = dense[i];
    obs.y[i] = fp.F(dense[i]);
    obs.H[i] = reward.h(dense[i], s) / fp.phi(dense[i]);
  }

  obs.left_anchor =
      reward.absorption == AbsorptionConvention::RewardAtAbsorption
          ? reward.h(x_left, s) / fp.phi(x_left)
          : -reward.fbar(x_left, s) / fp.phi(x_left);
  obs.right_anchor = vss_value / fp.phi(s);
  return obs;
}

MajorantResult smallest_concave_majorant(const Obstacle& obstacle,
                                         const RewardSpec& reward) {
  const int n = static_cast<int>(obstacle.y.size());
  MajorantResult out;
  out.s = obstacle.s;
  out.y_grid = obstacle.y;
  out.H = obstacle.H;
  out.h = reward.h;
  out.left_anchor = {obstacle.y[0], obstacle.left_anchor};
  out.right_anchor = {obstacle.y[n - 1], obstacle.right_anchor};

  if (obstacle.right_anchor < obstacle.H[n - 1] - 1e-8 * (1.0 + std::abs(obstacle.H[n - 1])))
    raise(ErrorCode::AnchorBelowObstacle,
          "V(s,s) below the obstacle at F(s); solver output inconsistent");

  // hull points: obstacle samples with both anchor values imposed at the ends.
  // A left anchor below the obstacle (killing discontinuity under the zero
  // convention) is kept out of the hull and reimposed afterwards.
  VectorXd yv = obstacle.y;
  VectorXd hv = obstacle.H;
  hv[n - 1] = std::max(obstacle.right_anchor, obstacle.H[n - 1]);
  const bool left_below =
      obstacle.left_anchor < obstacle.H[0] - contact_tol(obstacle.H[0]);
  if (!left_below) hv[0] = std::max(obstacle.left_anchor, obstacle.H[0]);

  out.hull = upper_concave_hull(yv, hv);

  // piecewise-linear envelope on the sample grid
  out.W.resize(n);
  for (size_t k = 0; k + 1 < out.hull.size(); ++k) {
    const int i = out.hull[k], j = out.hull[k + 1];
    const double slope = (hv[j] - hv[i]) / (yv[j] - yv[i]);
    for (int t = i; t <= j; ++t) out.W[t] = hv[i] + slope * (yv[t] - yv[i]);
  }
  if (out.hull.size() == 1) out.W[0] = hv[0];

  // condition (ii) is an equality at F(s); when the hull itself exceeds the
  // supplied anchor the anchor was too small and the hull value is the
  // consistent fixed point
  if (out.W[n - 1] > obstacle.right_anchor + 1e-8 * (1.0 + std::abs(obstacle.right_anchor))) {
    out.anchor_raised = true;
    out.right_anchor.second = out.W[n - 1];
  }
  if (left_below) out.W[0] = obstacle.left_anchor;  // value jump at absorption

  out.labels.assign(n, static_cast<std::int8_t>(RegionLabel::CONTINUE));
  for (int i = 0; i < n; ++i)
    if (out.W[i] - obstacle.H[i] <= contact_tol(obstacle.H[i]))
      out.labels[i] = static_cast<std::int8_t>(RegionLabel::STOP);

  for (int i = 1; i + 1 < n; ++i) {
    if (out.labels[i] == static_cast<std::int8_t>(RegionLabel::STOP)) {
      out.R_s = obstacle.y[i];
      break;
    }
  }
  return out;
}

std::pair<double, RegionLabel> value_at(const MajorantResult& majorant,
                                        const FundamentalPair& fp, double x) {
  const int n = static_cast<int>(majorant.y_grid.size());
  const double y = fp.F(x);
  const double y_lo = majorant.y_grid[0], y_hi = majorant.y_grid[n - 1];
  const double span_tol = 1e-12 * (1.0 + std::abs(y_hi));
  if (y < y_lo - span_tol || y > y_hi + span_tol)
    raise(ErrorCode::OutOfExcursionRange, "value_at");
  const double yq = std::clamp(y, y_lo, y_hi);

  // locate bracketing samples
  int lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (majorant.y_grid[mid] <= yq ? lo : hi) = mid;
  }

  // hull segment containing the cell decides the interpolation rule
  size_t seg = 0;
  while (seg + 2 < majorant.hull.size() && majorant.hull[seg + 1] <= lo) ++seg;
  const int i = majorant.hull[seg], j = majorant.hull[seg + 1 < majorant.hull.size() ? seg + 1 : seg];
  const bool contact_cell = (j <= i + 1) && majorant.hull.size() > 2;

  const double Hx = majorant.h(x, majorant.s) / fp.phi(x);
  double w;
  if (!contact_cell) {
    // genuine linear piece of the envelope
    const double slope =
        (majorant.W[j] - majorant.W[i]) / (majorant.y_grid[j] - majorant.y_grid[i]);
    w = majorant.W[i] + slope * (yq - majorant.y_grid[i]);
  } else {
    // contact stretch: W follows the obstacle samples; monotone cubic
    // locally, floored by the exact obstacle it coincides with
    const int a = std::max(lo - 1, 0);
    const int b = std::min(lo + 2, n - 1);
    const int m = b - a + 1;
    VectorXd xs(m), ws(m);
    for (int t = 0; t < m; ++t) {
      xs[t] = majorant.y_grid[a + t];
      ws[t] = majorant.W[a + t];
    }
    w = std::max(PchipInterpolant(xs, ws)(yq), Hx);
  }

  const double value = fp.phi(x) * w;
  const RegionLabel label = (contact_cell || w - Hx <= contact_tol(Hx))
                                ? RegionLabel::STOP
                                : RegionLabel::CONTINUE;
  return {value, label};
}

ValueSurface build_surface(const FundamentalPair& fp, const RewardSpec& reward,
                           const BoundarySpec& b_spec, const VectorXd& x_grid,
                           const VectorXd& s_grid, const SurfaceOptions& opts) {
  for (int j = 1; j < s_grid.size(); ++j)
    if (!(s_grid[j] > s_grid[j - 1]))
      raise(ErrorCode::OutOfDomain, "build_surface: s_grid not increasing");

  const int nx = static_cast<int>(x_grid.size());
  const int ns = static_cast<int>(s_grid.size());
  ValueSurface surf;
  surf.x_grid = x_grid;
  surf.s_grid = s_grid;
  surf.V = Eigen::MatrixXd::Zero(nx, ns);
  surf.region.setConstant(nx, ns, static_cast<std::int8_t>(RegionLabel::INFEASIBLE));
  surf.row_recomputed.assign(ns, 0);

  std::vector<std::exception_ptr> row_error(ns);

  parallel_for(ns, opts.workers, [&](std::int64_t j) {
    try {
      const double s = s_grid[j];
      fp.require_inside(s, "build_surface: s row");
      const double b_s = b_spec.b(s);
      const VssSolution vss = reward.s_dependent
                                  ? solve_prop2(fp, reward, s, b_s)
                                  : solve_corollary1(fp, reward, s, b_s);
      const Obstacle obs =
          build_obstacle(fp, reward, s, b_spec, vss.value, opts.min_samples);
      const MajorantResult maj = smallest_concave_majorant(obs, reward);
      if (maj.anchor_raised) surf.row_recomputed[j] = 1;

      const double x_lo = obs.x_left;
      for (int i = 0; i < nx; ++i) {
        const double x = x_grid[i];
        if (x < x_lo || x > s || !fp.domain.contains(x)) continue;
        const auto [v, label] = value_at(maj, fp, x);
        surf.V(i, j) = v;
        surf.region(i, j) = static_cast<std::int8_t>(label);
      }
    } catch (...) {
      row_error[j] = std::current_exception();
    }
  });

  for (int j = 0; j < ns; ++j) {
    if (row_error[j]) {
      try {
        std::rethrow_exception(row_error[j]);
      } catch (const Error& e) {
        raise(e.code(), "row " + std::to_string(j) + ": " + e.what());
      }
    }
  }
  return surf;
}

}  // namespace exstop
