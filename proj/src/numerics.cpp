#include "exstop/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "exstop/errors.hpp"

namespace exstop {

namespace {
constexpr double kGolden = 0.6180339887498949;  // 1/phi
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonpositiveSigma: return "NonpositiveSigma";
    case ErrorCode::DegenerateRoots: return "DegenerateRoots";
    case ErrorCode::InconsistentDerivatives: return "InconsistentDerivatives";
    case ErrorCode::NonmonotoneF: return "NonmonotoneF";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::RequiresSIndependent: return "RequiresSIndependent";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::TruncationTooSmall: return "TruncationTooSmall";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::DegenerateInterval: return "DegenerateInterval";
    case ErrorCode::AnchorBelowObstacle: return "AnchorBelowObstacle";
    case ErrorCode::OutOfExcursionRange: return "OutOfExcursionRange";
    case ErrorCode::ConvergenceViolated: return "ConvergenceViolated";
    case ErrorCode::NonpositiveState: return "NonpositiveState";
    case ErrorCode::NoTangency: return "NoTangency";
    case ErrorCode::AlreadyAbsorbed: return "AlreadyAbsorbed";
    case ErrorCode::NonpositiveDt: return "NonpositiveDt";
    case ErrorCode::UnstableScheme: return "UnstableScheme";
    case ErrorCode::ConfigParse: return "ConfigParse";
  }
  return "UnknownError";
}

MaximizeResult maximize_scalar(const ScalarFn& f, double lo, double hi,
                               int n_scan, double xtol) {
  if (!(hi >= lo)) raise(ErrorCode::EmptyDomain, "maximize_scalar: hi < lo");
  if (xtol <= 0.0) xtol = 1e-12 * (1.0 + std::abs(hi - lo));
  if (hi - lo <= xtol) {
    MaximizeResult r{lo, f(lo), true, hi == lo};
    return r;
  }

  n_scan = std::max(n_scan, 8);
  const double step = (hi - lo) / n_scan;
  int best = 0;
  double fbest = f(lo);
  for (int i = 1; i <= n_scan; ++i) {
    const double x = (i == n_scan) ? hi : lo + i * step;
    const double fx = f(x);
    if (fx > fbest) {  // strict: ties keep the smaller x
      fbest = fx;
      best = i;
    }
  }

  double a = lo + std::max(best - 1, 0) * step;
  double b = (best >= n_scan) ? hi : lo + (best + 1) * step;

  // golden-section on [a,b]
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 >= f2) {  // >= pushes plateaus toward smaller x
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
  }

  double xm = (f1 >= f2) ? x1 : x2;
  double fm = std::max(f1, f2);

  // one parabolic step through (a, xm, b)
  {
    const double fa = f(a), fb = f(b);
    const double d1 = (xm - a) * (fm - fb);
    const double d2 = (xm - b) * (fm - fa);
    const double denom = 2.0 * (d1 - d2);
    if (denom != 0.0) {
      const double xp = xm - ((xm - a) * d1 - (xm - b) * d2) / denom;
      if (xp > lo && xp < hi && std::isfinite(xp)) {
        const double fp = f(xp);
        if (fp > fm) {
          xm = xp;
          fm = fp;
        }
      }
    }
  }

  // value comparisons flatten near a smooth maximum at sqrt(eps); a sign
  // change of the centered difference pins the argmax one step further
  {
    const double hd = std::max(1e-6 * (hi - lo), 8.0 * xtol);
    double aa = std::max(lo, xm - 64.0 * hd);
    double bb = std::min(hi, xm + 64.0 * hd);
    if (aa + 2.0 * hd < bb - 2.0 * hd) {
      auto dsign = [&](double z) { return f(z + hd) - f(z - hd); };
      if (dsign(aa) > 0.0 && dsign(bb) < 0.0) {
        while (bb - aa > xtol) {
          const double mid = 0.5 * (aa + bb);
          (dsign(mid) > 0.0 ? aa : bb) = mid;
        }
        const double cand = 0.5 * (aa + bb);
        const double fc = f(cand);
        if (fc >= fm - 1e-9 * (1.0 + std::abs(fm))) {
          xm = cand;
          fm = std::max(fm, fc);
        }
      }
    }
  }

  // endpoints compete exactly
  MaximizeResult r;
  const double f_lo = f(lo), f_hi = f(hi);
  if (f_lo >= fm && f_lo >= f_hi) {
    r = {lo, f_lo, true, false};
  } else if (f_hi > fm) {
    r = {hi, f_hi, false, true};
  } else {
    r = {xm, fm, false, false};
    const double edge = 1e-9 * (1.0 + std::abs(hi - lo));
    if (xm - lo <= edge) r.at_lo = true;
    if (hi - xm <= edge) r.at_hi = true;
  }
  return r;
}

double bisect_root(const ScalarFn& f, double lo, double hi, double xtol_rel,
                   int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    raise(ErrorCode::NoTangency, "bisect_root: no sign change on bracket");
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0 || (hi - lo) <= xtol_rel * (1.0 + std::abs(mid))) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

double newton_safeguarded(const ScalarFn& f, const ScalarFn& df, double lo,
                          double hi, double x0, double ftol, int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo * fhi > 0.0)
    raise(ErrorCode::NoTangency, "newton_safeguarded: root not bracketed");
  double x = std::clamp(x0, lo, hi);
  for (int i = 0; i < max_iter; ++i) {
    const double fx = f(x);
    if (std::abs(fx) <= ftol) return x;
    if (flo * fx < 0.0) {
      hi = x;
    } else {
      lo = x;
      flo = fx;
    }
    const double dfx = df(x);
    double xn = (dfx != 0.0) ? x - fx / dfx : lo - 1.0;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * (1.0 + std::abs(x))) return x;
    x = xn;
  }
  return x;
}

std::pair<double, double> richardson_derivative(const ScalarFn& f, double x,
                                                double h0) {
  auto central = [&](double h) { return (f(x + h) - f(x - h)) / (2.0 * h); };
  const double d1 = central(h0);
  const double d2 = central(0.5 * h0);
  const double extrap = (4.0 * d2 - d1) / 3.0;
  return {extrap, std::abs(d2 - d1)};
}

double left_derivative(const ScalarFn& f, double x, double h) {
  return (f(x) - f(x - h)) / h;
}

double right_derivative(const ScalarFn& f, double x, double h) {
  return (f(x + h) - f(x)) / h;
}

namespace {
double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const ScalarFn& f, double a, double fa, double b, double fb,
                   double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * tol)
    return left + right + err / 15.0;
  return simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const ScalarFn& f, double a, double b, double abs_tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = simpson(a, fa, b, fb, fm);
  return simpson_rec(f, a, fa, b, fb, fm, whole, abs_tol, max_depth);
}

std::vector<int> upper_concave_hull(const VectorXd& x, const VectorXd& y) {
  const int n = static_cast<int>(x.size());
  std::vector<int> hull;
  hull.reserve(n);
  for (int i = 0; i < n; ++i) {
    // pop while the turn through the last two hull points is non-concave
    while (hull.size() >= 2) {
      const int j = hull[hull.size() - 2];
      const int k = hull[hull.size() - 1];
      const double cross = (x[k] - x[j]) * (y[i] - y[j]) -
                           (y[k] - y[j]) * (x[i] - x[j]);
      if (cross >= 0.0) {
        hull.pop_back();  // k lies on/below chord j->i
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  return hull;
}

PchipInterpolant::PchipInterpolant(VectorXd x, VectorXd y)
    : x_(std::move(x)), y_(std::move(y)) {
  const int n = static_cast<int>(x_.size());
  d_.resize(n);
  if (n == 1) {
    d_[0] = 0.0;
    return;
  }
  VectorXd h(n - 1), m(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    h[i] = x_[i + 1] - x_[i];
    m[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_[0] = m[0];
  d_[n - 1] = m[n - 2];
  for (int i = 1; i < n - 1; ++i) {
    if (m[i - 1] * m[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
    }
  }
}

double PchipInterpolant::operator()(double xq) const {
  const int n = static_cast<int>(x_.size());
  if (n == 1) return y_[0];
  int lo = 0, hi = n - 1;
  if (xq <= x_[0]) {
    hi = 1;
  } else if (xq >= x_[n - 1]) {
    lo = n - 2;
  } else {
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (x_[mid] <= xq ? lo : hi) = mid;
    }
  }
  const double h = x_[hi] - x_[lo];
  const double t = (xq - x_[lo]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[lo] + h10 * h * d_[lo] + h01 * y_[hi] + h11 * h * d_[hi];
}

}  // namespace exstop
