#include "exstop/diffusion.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace exstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Roots of (sigma^2/2) g^2 + (mu - sigma^2/2) g - q = 0.
std::pair<double, double> gbm_roots(double mu, double sigma, double q) {
  const double a = 0.5 * sigma * sigma;
  const double b = mu - 0.5 * sigma * sigma;
  const double disc = b * b + 4.0 * a * q;
  if (disc <= 0.0) raise(ErrorCode::DegenerateRoots, "complex exponents");
  const double sq = std::sqrt(disc);
  return {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)};
}

}  // namespace

GbmModel make_gbm(double mu, double sigma, double q) {
  if (!(sigma > 0.0)) raise(ErrorCode::NonpositiveSigma, "make_gbm");
  if (q < 0.0) raise(ErrorCode::DegenerateRoots, "make_gbm: q < 0");
  auto [g0, g1] = gbm_roots(mu, sigma, q);
  if (!(g0 < 0.0 && g1 > 1.0))
    raise(ErrorCode::DegenerateRoots,
          "make_gbm: need gamma0 < 0 < 1 < gamma1 (q too small for this drift)");

  GbmModel out;
  out.gamma0 = g0;
  out.gamma1 = g1;
  out.model.kind = DiffusionKind::GBM;
  out.model.mu = [mu](double x) { return mu * x; };
  out.model.sigma = [sigma](double x) { return sigma * x; };
  out.model.q = q;
  out.model.state_space = {0.0, kInf};
  out.model.mu_const = mu;
  out.model.sigma_const = sigma;

  const double delta = g1 - g0;
  FundamentalPair fp;
  fp.domain = {0.0, kInf};
  fp.psi = [g1](double x) { return std::pow(x, g1); };
  fp.phi = [g0](double x) { return std::pow(x, g0); };
  fp.dpsi = [g1](double x) { return g1 * std::pow(x, g1 - 1.0); };
  fp.dphi = [g0](double x) { return g0 * std::pow(x, g0 - 1.0); };
  fp.d2phi = [g0](double x) { return g0 * (g0 - 1.0) * std::pow(x, g0 - 2.0); };
  fp.F = [delta](double x) { return std::pow(x, delta); };
  fp.dF = [delta](double x) { return delta * std::pow(x, delta - 1.0); };
  fp.F_inv = [delta](double y) { return std::pow(y, 1.0 / delta); };
  out.fp = std::move(fp);
  return out;
}

AbmModel make_abm(double mu, double sigma, double q) {
  if (!(sigma > 0.0)) raise(ErrorCode::NonpositiveSigma, "make_abm");
  if (!(q > 0.0)) raise(ErrorCode::DegenerateRoots, "make_abm: q must be > 0");
  const double s2 = sigma * sigma;
  const double sq = std::sqrt(mu * mu + 2.0 * q * s2);
  const double tp = (-mu + sq) / s2;
  const double tm = (-mu - sq) / s2;

  AbmModel out;
  out.theta_plus = tp;
  out.theta_minus = tm;
  out.model.kind = DiffusionKind::ABM;
  out.model.mu = [mu](double) { return mu; };
  out.model.sigma = [sigma](double) { return sigma; };
  out.model.q = q;
  out.model.state_space = {-kInf, kInf};
  out.model.mu_const = mu;
  out.model.sigma_const = sigma;

  const double span = tp - tm;
  FundamentalPair fp;
  fp.domain = {-kInf, kInf};
  fp.psi = [tp](double x) { return std::exp(tp * x); };
  fp.phi = [tm](double x) { return std::exp(tm * x); };
  fp.dpsi = [tp](double x) { return tp * std::exp(tp * x); };
  fp.dphi = [tm](double x) { return tm * std::exp(tm * x); };
  fp.d2phi = [tm](double x) { return tm * tm * std::exp(tm * x); };
  fp.F = [span](double x) { return std::exp(span * x); };
  fp.dF = [span](double x) { return span * std::exp(span * x); };
  fp.F_inv = [span](double y) { return std::log(y) / span; };
  out.fp = std::move(fp);
  return out;
}

std::pair<DiffusionModel, FundamentalPair> make_custom(const CustomSpec& spec) {
  if (!spec.psi || !spec.phi || !spec.dpsi || !spec.dphi || !spec.d2phi)
    raise(ErrorCode::InconsistentDerivatives, "make_custom: missing function");

  Interval dom = spec.state_space;
  Interval bracket = spec.finv_bracket;
  if (bracket.lo == 0.0 && bracket.hi == 0.0) {
    // trim unbounded edges so validation points stay representable
    const double lo = std::isfinite(dom.lo) ? dom.lo : -1e8;
    const double hi = std::isfinite(dom.hi) ? dom.hi : 1e8;
    const double w = hi - lo;
    bracket = {lo + 1e-9 * w, hi - 1e-9 * w};
  }

  const int n = std::max(spec.n_check, 8);
  double prev_F = -kInf;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) / n;
    const double x = bracket.lo + t * (bracket.hi - bracket.lo);
    const double psi = spec.psi(x), phi = spec.phi(x);
    if (!(psi > 0.0) || !(phi > 0.0))
      raise(ErrorCode::NonmonotoneF, "make_custom: psi/phi not positive");
    if (!(spec.dpsi(x) > 0.0) || !(spec.dphi(x) < 0.0))
      raise(ErrorCode::NonmonotoneF, "make_custom: psi must increase, phi decrease");
    const double Fx = psi / phi;
    if (!(Fx > prev_F))
      raise(ErrorCode::NonmonotoneF, "make_custom: F not strictly increasing");
    prev_F = Fx;

    const double h = 1e-5 * (1.0 + std::abs(x));
    auto check_fd = [&](const std::function<double(double)>& fn,
                        const std::function<double(double)>& dfn,
                        const char* name) {
      const auto [fd, err] = richardson_derivative(fn, x, h);
      const double scale = std::abs(dfn(x)) + std::abs(fd) + 1e-30;
      if (std::abs(fd - dfn(x)) > 1e-5 * scale + 4.0 * err)
        raise(ErrorCode::InconsistentDerivatives,
              std::string("make_custom: ") + name);
    };
    check_fd(spec.psi, spec.dpsi, "dpsi");
    check_fd(spec.phi, spec.dphi, "dphi");
    check_fd(spec.dphi, spec.d2phi, "d2phi");

    if (spec.mu && spec.sigma) {
      auto residual = [&](const std::function<double(double)>& v,
                          const std::function<double(double)>& dv,
                          double d2v) {
        const double gen = 0.5 * spec.sigma(x) * spec.sigma(x) * d2v +
                           spec.mu(x) * dv(x) - spec.q * v(x);
        return std::abs(gen) / (std::abs(spec.q * v(x)) + std::abs(v(x)) + 1e-30);
      };
      const auto [d2psi_fd, e2] = richardson_derivative(spec.dpsi, x, h);
      (void)e2;
      if (residual(spec.psi, spec.dpsi, d2psi_fd) > 1e-6 ||
          residual(spec.phi, spec.dphi, spec.d2phi(x)) > 1e-6)
        raise(ErrorCode::InconsistentDerivatives,
              "make_custom: generator residual");
    }
  }

  DiffusionModel model;
  model.kind = DiffusionKind::Custom;
  model.mu = spec.mu;
  model.sigma = spec.sigma;
  model.q = spec.q;
  model.state_space = dom;

  FundamentalPair fp;
  fp.domain = dom;
  fp.psi = spec.psi;
  fp.phi = spec.phi;
  fp.dpsi = spec.dpsi;
  fp.dphi = spec.dphi;
  fp.d2phi = spec.d2phi;
  auto psi = spec.psi;
  auto phi = spec.phi;
  auto dpsi = spec.dpsi;
  auto dphi = spec.dphi;
  fp.F = [psi, phi](double x) { return psi(x) / phi(x); };
  fp.dF = [psi, phi, dpsi, dphi](double x) {
    const double p = phi(x);
    return (dpsi(x) * p - psi(x) * dphi(x)) / (p * p);
  };
  auto F = fp.F;
  fp.F_inv = [F, bracket](double y) {
    return bisect_root([&](double x) { return F(x) - y; }, bracket.lo,
                       bracket.hi, 1e-12);
  };
  return {std::move(model), std::move(fp)};
}

double hitting_laplace(const FundamentalPair& fp, double x, double z) {
  fp.require_inside(x, "hitting_laplace: x");
  fp.require_inside(z, "hitting_laplace: z");
  if (x == z) return 1.0;
  return (x < z) ? fp.psi(x) / fp.psi(z) : fp.phi(x) / fp.phi(z);
}

TransformedFunction to_transformed(const FundamentalPair& fp,
                                   std::function<double(double)> z, double c,
                                   double d, std::function<double(double)> dz) {
  fp.require_inside(c, "to_transformed: c");
  fp.require_inside(d, "to_transformed: d");
  if (!(c < d)) raise(ErrorCode::OutOfDomain, "to_transformed: need c < d");

  TransformedFunction out;
  out.domain = {fp.F(c), fp.F(d)};
  auto phi = fp.phi;
  auto dphi = fp.dphi;
  auto F_inv = fp.F_inv;
  auto dF = fp.dF;
  out.eval = [z, phi, F_inv](double y) {
    const double x = F_inv(y);
    return z(x) / phi(x);
  };
  out.slope_at = [z, dz, phi, dphi, dF](double x) {
    double zp;
    if (dz) {
      zp = dz(x);
    } else {
      zp = richardson_derivative(z, x, 1e-5 * (1.0 + std::abs(x))).first;
    }
    const double p = phi(x);
    const double ratio_prime = (zp * p - z(x) * dphi(x)) / (p * p);
    return ratio_prime / dF(x);
  };
  return out;
}

}  // namespace exstop
