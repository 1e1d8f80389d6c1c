#pragma once

#include <functional>
#include <utility>

#include "exstop/errors.hpp"
#include "exstop/numerics.hpp"

namespace exstop {

/// Open state-space interval (lo, hi); endpoints are inaccessible.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x > lo && x < hi; }
};

enum class DiffusionKind { GBM, ABM, Custom };

/// dX = mu(X) dt + sigma(X) dB, discounted at rate q, living on state_space.
struct DiffusionModel {
  DiffusionKind kind = DiffusionKind::Custom;
  std::function<double(double)> mu;
  std::function<double(double)> sigma;
  double q = 0.0;
  Interval state_space;
  // constant coefficients for GBM/ABM, used by the exact simulation schemes
  double mu_const = 0.0;
  double sigma_const = 0.0;
};

/// Increasing/decreasing positive solutions psi, phi of (A - q)v = 0 together
/// with the derivatives the solvers need, F = psi/phi and its inverse.
struct FundamentalPair {
  std::function<double(double)> psi, phi;
  std::function<double(double)> dpsi, dphi, d2phi;
  std::function<double(double)> F, dF, F_inv;
  Interval domain;

  void require_inside(double x, const char* who) const {
    if (!domain.contains(x)) raise(ErrorCode::OutOfDomain, who);
  }
};

struct GbmModel {
  DiffusionModel model;
  FundamentalPair fp;
  double gamma0 = 0.0;  ///< negative root, phi(x) = x^gamma0
  double gamma1 = 0.0;  ///< root > 1, psi(x) = x^gamma1
};

struct AbmModel {
  DiffusionModel model;
  FundamentalPair fp;
  double theta_plus = 0.0;   ///< psi(x) = exp(theta_plus x)
  double theta_minus = 0.0;  ///< phi(x) = exp(theta_minus x)
};

/// Inputs for a user-supplied fundamental pair. mu/sigma are optional; when
/// present the generator residual is validated on the sample grid.
struct CustomSpec {
  std::function<double(double)> psi, phi;
  std::function<double(double)> dpsi, dphi, d2phi;
  Interval state_space;
  std::function<double(double)> mu;     // optional
  std::function<double(double)> sigma;  // optional
  double q = 0.0;
  Interval finv_bracket;  // defaults to a trimmed state_space
  int n_check = 64;       // validation sample count
};

/// GBM with psi(x)=x^gamma1, phi(x)=x^gamma0 on (0, inf).
/// Requires real roots with gamma0 < 0 < 1 < gamma1 (q > mu and q > 0).
GbmModel make_gbm(double mu, double sigma, double q);

/// ABM with psi(x)=exp(theta+ x), phi(x)=exp(theta- x) on (-inf, inf).
AbmModel make_abm(double mu, double sigma, double q);

/// Wraps caller-supplied solutions; validates positivity, monotonicity,
/// derivative consistency and (when mu/sigma given) the generator residual
/// on a sample grid, failing loudly.
std::pair<DiffusionModel, FundamentalPair> make_custom(const CustomSpec& spec);

/// E[e^{-q tau_z}] starting from x: psi(x)/psi(z) for x<=z, phi(x)/phi(z) above.
double hitting_laplace(const FundamentalPair& fp, double x, double z);

/// A Borel function pushed to the transformed plane: Z(y) = (z/phi)(F^{-1}(y)).
struct TransformedFunction {
  Interval domain;  ///< [F(c), F(d)] in y-coordinates
  std::function<double(double)> eval;      ///< y -> Z(y)
  std::function<double(double)> slope_at;  ///< x -> (1/F'(x)) (z/phi)'(x)
};

/// dz is optional; when absent (z/phi)' uses a Richardson-extrapolated
/// central difference.
TransformedFunction to_transformed(const FundamentalPair& fp,
                                   std::function<double(double)> z, double c,
                                   double d,
                                   std::function<double(double)> dz = nullptr);

}  // namespace exstop
