#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

namespace exstop {

using Eigen::VectorXd;
using ScalarFn = std::function<double(double)>;

/// Result of a bounded 1-D maximization.
struct MaximizeResult {
  double x = 0.0;
  double value = 0.0;
  bool at_lo = false;  ///< maximum attained at the lower endpoint
  bool at_hi = false;  ///< maximum attained at the upper endpoint
};

/// Maximizes f on [lo, hi]: coarse scan, golden-section refinement, one
/// parabolic polish step. Plateaus and ties resolve to the smallest x.
MaximizeResult maximize_scalar(const ScalarFn& f, double lo, double hi,
                               int n_scan = 256, double xtol = 0.0);

/// Bracketed bisection for f(x)=0 on [lo, hi]; requires a sign change.
double bisect_root(const ScalarFn& f, double lo, double hi,
                   double xtol_rel = 1e-12, int max_iter = 200);

/// Newton iteration falling back to bisection whenever the step leaves the
/// bracket or fails to contract it.
double newton_safeguarded(const ScalarFn& f, const ScalarFn& df, double lo,
                          double hi, double x0, double ftol = 1e-12,
                          int max_iter = 100);

/// Centered finite difference with one step-halving Richardson pass.
/// Returns {derivative, error_estimate}.
std::pair<double, double> richardson_derivative(const ScalarFn& f, double x,
                                                double h0);

/// One-sided difference quotients, used for kink detection.
double left_derivative(const ScalarFn& f, double x, double h);
double right_derivative(const ScalarFn& f, double x, double h);

/// Adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const ScalarFn& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 48);

/// Indices of the upper concave hull (monotone chain) of the polyline
/// (x[i], y[i]) with x strictly increasing. First and last index included.
std::vector<int> upper_concave_hull(const VectorXd& x, const VectorXd& y);

/// Monotone (Fritsch-Carlson) piecewise-cubic interpolant.
class PchipInterpolant {
 public:
  PchipInterpolant() = default;
  PchipInterpolant(VectorXd x, VectorXd y);
  double operator()(double xq) const;
  const VectorXd& x() const { return x_; }
  const VectorXd& y() const { return y_; }

 private:
  VectorXd x_, y_, d_;  // nodes, values, node slopes
};

}  // namespace exstop
