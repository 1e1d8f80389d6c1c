#include "exstop/reward.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace exstop {

namespace {
Fn2 zero2() {
  return [](double, double) { return 0.0; };
}
}  // namespace

RewardSpec make_put_reward(double K, AbsorptionConvention conv) {
  RewardSpec r;
  r.g = [K](double x, double) { return std::max(K - x, 0.0); };
  r.f = zero2();
  r.fbar = zero2();
  r.h = r.g;
  r.dh_dx = [K](double x, double) { return x < K ? -1.0 : 0.0; };
  r.s_dependent = false;
  r.absorption = conv;
  return r;
}

RewardSpec make_lookback_reward(double k, AbsorptionConvention conv) {
  RewardSpec r;
  r.g = [k](double x, double s) { return s - k * x; };
  r.f = zero2();
  r.fbar = zero2();
  r.h = r.g;
  r.dh_dx = [k](double, double) { return -k; };
  r.s_dependent = true;
  r.absorption = conv;
  return r;
}

RewardSpec make_power_income_reward(double mu, double sigma, double q, double p,
                                    TerminalId g_id, AbsorptionConvention conv) {
  const double denom = q - mu * p - 0.5 * sigma * sigma * p * (p - 1.0);
  if (!(denom > 0.0))
    raise(ErrorCode::ConvergenceViolated,
          "power income potential diverges: q - mu p - sigma^2 p(p-1)/2 <= 0");
  const double alpha = 1.0 / denom;

  RewardSpec r;
  r.f = [p](double x, double) { return std::pow(x, p); };
  r.fbar = [alpha, p](double x, double) { return alpha * std::pow(x, p); };
  switch (g_id) {
    case TerminalId::Linear:
      r.g = [](double x, double) { return x; };
      r.h = [alpha, p](double x, double) { return x - alpha * std::pow(x, p); };
      r.dh_dx = [alpha, p](double x, double) {
        return 1.0 - alpha * p * std::pow(x, p - 1.0);
      };
      break;
    case TerminalId::Zero:
      r.g = zero2();
      r.h = [alpha, p](double x, double) { return -alpha * std::pow(x, p); };
      r.dh_dx = [alpha, p](double x, double) {
        return -alpha * p * std::pow(x, p - 1.0);
      };
      break;
  }
  r.s_dependent = false;
  r.absorption = conv;
  return r;
}

double RewardTable::interpolate(double x, double s) const {
  auto locate = [](const VectorXd& v, double q) {
    const int n = static_cast<int>(v.size());
    if (q <= v[0]) return 0;
    if (q >= v[n - 1]) return n - 2;
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      (v[mid] <= q ? lo : hi) = mid;
    }
    return lo;
  };
  const int i = locate(xs, x);
  const int j = locate(ss, s);
  const double tx = std::clamp((x - xs[i]) / (xs[i + 1] - xs[i]), 0.0, 1.0);
  const double ts = std::clamp((s - ss[j]) / (ss[j + 1] - ss[j]), 0.0, 1.0);
  return (1 - tx) * (1 - ts) * h(i, j) + tx * (1 - ts) * h(i + 1, j) +
         (1 - tx) * ts * h(i, j + 1) + tx * ts * h(i + 1, j + 1);
}

RewardSpec make_table_reward(RewardTable table, AbsorptionConvention conv) {
  for (int i = 1; i < table.xs.size(); ++i)
    if (!(table.xs[i] > table.xs[i - 1]))
      raise(ErrorCode::ConfigParse, "reward table: x axis not increasing");
  for (int j = 1; j < table.ss.size(); ++j)
    if (!(table.ss[j] > table.ss[j - 1]))
      raise(ErrorCode::ConfigParse, "reward table: s axis not increasing");

  auto shared = std::make_shared<RewardTable>(std::move(table));
  RewardSpec r;
  r.g = [shared](double x, double s) { return shared->interpolate(x, s); };
  r.f = zero2();
  r.fbar = zero2();
  r.h = r.g;
  r.s_dependent = true;
  r.absorption = conv;
  return r;
}

double feynman_kac_residual(const DiffusionModel& model,
                            const RewardSpec& reward,
                            const std::vector<std::pair<double, double>>& pts) {
  if (reward.stochastic_fbar) return 0.0;
  double worst = 0.0;
  for (const auto& [x, s] : pts) {
    auto fbar_x = [&](double t) { return reward.fbar(t, s); };
    const double h = 1e-4 * (1.0 + std::abs(x));
    const double d1 = richardson_derivative(fbar_x, x, h).first;
    const double d2 =
        (fbar_x(x + h) - 2.0 * fbar_x(x) + fbar_x(x - h)) / (h * h);
    const double gen = 0.5 * model.sigma(x) * model.sigma(x) * d2 +
                       model.mu(x) * d1 - model.q * reward.fbar(x, s);
    const double resid = gen + reward.f(x, s);
    const double scale =
        std::abs(reward.f(x, s)) + std::abs(model.q * reward.fbar(x, s)) + 1e-12;
    worst = std::max(worst, std::abs(resid) / scale);
  }
  return worst;
}

BoundarySpec BoundarySpec::proportional(double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    raise(ErrorCode::ConfigParse, "boundary: beta must be in [0,1)");
  BoundarySpec b;
  b.kind = BoundaryKind::Proportional;
  b.beta = beta;
  return b;
}

BoundarySpec BoundarySpec::constant(double depth) {
  if (!(depth >= 0.0)) raise(ErrorCode::ConfigParse, "boundary: depth < 0");
  BoundarySpec b;
  b.kind = BoundaryKind::Constant;
  b.c = depth;
  return b;
}

BoundarySpec BoundarySpec::none(double lo) {
  BoundarySpec b;
  b.kind = BoundaryKind::None;
  b.floor_lo = lo;
  return b;
}

BoundarySpec BoundarySpec::custom_fn(std::function<double(double)> fn) {
  BoundarySpec b;
  b.kind = BoundaryKind::Custom;
  b.custom = std::move(fn);
  return b;
}

}  // namespace exstop
