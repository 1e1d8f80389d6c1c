#include "exstop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "exstop/parallel.hpp"

namespace exstop {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ stream seeded from (master seed, path index); antithetic
/// streams mirror the normals and uniforms of their even partner.
class PathRng {
 public:
  PathRng(std::uint64_t master, std::uint64_t path, bool antithetic) {
    std::uint64_t sm = master ^ (0xD1342543DE82EF95ULL * (path + 1));
    for (auto& w : st_) w = splitmix64(sm);
    anti_ = antithetic;
  }

  double uniform() {
    const double u = 0x1.0p-53 * static_cast<double>(next() >> 11);
    return anti_ ? 1.0 - u : u;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return anti_ ? -spare_ : spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * raw_uniform() - 1.0;
      v = 2.0 * raw_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    const double z = u * f;
    return anti_ ? -z : z;
  }

 private:
  std::uint64_t next() {
    auto rotl = [](std::uint64_t x, int k) {
      return (x << k) | (x >> (64 - k));
    };
    const std::uint64_t result = rotl(st_[0] + st_[3], 23) + st_[0];
    const std::uint64_t t = st_[1] << 17;
    st_[2] ^= st_[0];
    st_[3] ^= st_[1];
    st_[1] ^= st_[2];
    st_[0] ^= st_[3];
    st_[2] ^= t;
    st_[3] = rotl(st_[3], 45);
    return result;
  }
  double raw_uniform() { return 0x1.0p-53 * static_cast<double>(next() >> 11); }

  std::uint64_t st_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
  bool anti_ = false;
};

struct MomentAccumulator {
  // per-path totals kept by index so the reduction order never depends on
  // the thread schedule
  std::vector<double> totals;
  std::vector<std::int8_t> outcome;  // 0 stop, 1 absorb, 2 censor
};

MCResult reduce(const MomentAccumulator& acc, double q, double t_max) {
  MCResult r;
  const std::int64_t n = static_cast<std::int64_t>(acc.totals.size());
  double sum = 0.0;
  for (double t : acc.totals) sum += t;
  const double mean = (n > 0) ? sum / n : 0.0;
  double ss = 0.0;
  for (double t : acc.totals) ss += (t - mean) * (t - mean);
  r.estimate = mean;
  r.std_error = (n > 1) ? std::sqrt(ss / (n - 1) / n) : 0.0;
  for (auto o : acc.outcome) {
    if (o == 0) ++r.n_stopped;
    else if (o == 1) ++r.n_absorbed;
    else ++r.n_censored;
  }
  r.discount_bias_note = std::exp(-q * t_max) > 1e-6;
  return r;
}

// P(bridge of a BM with step variance var crosses level c), endpoints a, b on
// the same side above c
inline double bridge_cross_below(double a, double b, double c, double var) {
  const double g = (a - c) * (b - c);
  return g <= 0.0 ? 1.0 : std::exp(-2.0 * g / var);
}

}  // namespace

MCResult simulate_policy(const DiffusionModel& model, const RewardSpec& reward,
                         const BoundarySpec& b_spec, const Policy& policy,
                         double x0, double s0, const MCConfig& cfg) {
  if (!(cfg.dt > 0.0)) raise(ErrorCode::NonpositiveDt, "simulate_policy");
  if (!(s0 >= x0)) raise(ErrorCode::OutOfDomain, "simulate_policy: s0 < x0");
  if (!(x0 > s0 - b_spec.b(s0)))
    raise(ErrorCode::AlreadyAbsorbed, "simulate_policy");
  if (cfg.scheme == Scheme::ExactGBM && model.kind != DiffusionKind::GBM)
    raise(ErrorCode::UnstableScheme, "ExactGBM scheme requires a GBM model");

  const std::int64_t n = cfg.n_paths;
  MomentAccumulator acc;
  acc.totals.assign(n, 0.0);
  acc.outcome.assign(n, 2);

  const double q = model.q;
  const double dt = cfg.dt;
  const double decay = std::exp(-q * dt);
  const std::int64_t max_steps = static_cast<std::int64_t>(cfg.t_max / dt);
  const bool has_income = static_cast<bool>(reward.f);

  // immediate stop: the start state is already inside the stopping set
  if (s0 - x0 >= policy.lD(s0)) {
    for (std::int64_t i = 0; i < n; ++i) {
      acc.totals[i] = reward.g(x0, s0);
      acc.outcome[i] = 0;
    }
    return reduce(acc, q, cfg.t_max);
  }

  const bool exact_gbm = cfg.scheme == Scheme::ExactGBM;
  const double mu_c = model.mu_const, sigma_c = model.sigma_const;
  const double log_drift = (mu_c - 0.5 * sigma_c * sigma_c) * dt;
  const double log_vol = sigma_c * std::sqrt(dt);
  const double log_var = sigma_c * sigma_c * dt;
  const double far = 7.0 * log_vol;  // crossing odds below 2^-64 past this gap

  parallel_for(n, cfg.workers, [&](std::int64_t i) {
    PathRng rng(cfg.seed, cfg.antithetic ? static_cast<std::uint64_t>(i / 2)
                                         : static_cast<std::uint64_t>(i),
                cfg.antithetic && (i & 1));
    double income = 0.0;
    double disc = 1.0;
    double f_prev = has_income ? reward.f(x0, s0) : 0.0;

    if (exact_gbm) {
      double lx = std::log(x0), ls = std::log(s0);
      double S = s0;
      double l_level = policy.lD(S);
      double b_level = b_spec.b(S);
      double log_stop = std::log(S - l_level);
      double log_abs = (S - b_level > 0.0) ? std::log(S - b_level)
                                           : -std::numeric_limits<double>::infinity();
      for (std::int64_t step = 0; step < max_steps; ++step) {
        const double a = lx;
        const double b = a + log_drift + log_vol * rng.normal();

        // barrier crossing inside the step; the higher barrier is met first
        const bool stop_first = log_stop >= log_abs;
        const double c = std::max(log_stop, log_abs);
        bool crossed = b <= c;
        if (!crossed && std::min(a, b) - c < far && c > -1e300) {
          crossed = rng.uniform() < bridge_cross_below(a, b, c, log_var);
        }
        if (crossed) {
          const double tau = (step + 0.5) * dt;
          const double dfac = disc * std::exp(-0.5 * q * dt);
          const double x_hit = std::exp(c);
          if (has_income) income += 0.5 * dt * (disc * f_prev);
          if (stop_first) {
            acc.totals[i] = income + dfac * reward.g(x_hit, S);
            acc.outcome[i] = 0;
          } else {
            acc.totals[i] =
                income + dfac * (reward.absorption ==
                                         AbsorptionConvention::RewardAtAbsorption
                                     ? reward.g(x_hit, S)
                                     : 0.0);
            acc.outcome[i] = 1;
          }
          (void)tau;
          return;
        }

        // running-maximum update, bridge max sampled only when reachable
        double ls_new = ls;
        if (std::max(a, b) > ls - far) {
          const double u = rng.uniform();
          const double m =
              0.5 * ((a + b) +
                     std::sqrt((a - b) * (a - b) -
                               2.0 * log_var * std::log(std::max(u, 1e-300))));
          ls_new = std::max(ls, m);
        }
        lx = b;
        disc *= decay;
        if (has_income) {
          const double f_now = reward.f(std::exp(lx), std::exp(ls_new));
          income += 0.5 * dt * (disc / decay * f_prev + disc * f_now);
          f_prev = f_now;
        }
        if (ls_new > ls) {
          ls = ls_new;
          S = std::exp(ls);
          l_level = policy.lD(S);
          b_level = b_spec.b(S);
          log_stop = std::log(std::max(S - l_level, 1e-300));
          log_abs = (S - b_level > 0.0)
                        ? std::log(S - b_level)
                        : -std::numeric_limits<double>::infinity();
          // thresholds move with S; the end state may already be inside
          if (lx <= log_stop) {
            acc.totals[i] = income + disc * reward.g(std::exp(lx), S);
            acc.outcome[i] = 0;
            return;
          }
        }
      }
      acc.totals[i] = income;  // censored: income only
      acc.outcome[i] = 2;
    } else {
      // Euler-Maruyama in levels for general coefficients
      double x = x0, S = s0;
      const double sq_dt = std::sqrt(dt);
      for (std::int64_t step = 0; step < max_steps; ++step) {
        const double z = rng.normal();
        const double x_new = x + model.mu(x) * dt + model.sigma(x) * sq_dt * z;
        const double S_new = std::max(S, x_new);
        disc *= decay;
        if (has_income) {
          const double f_now = reward.f(x_new, S_new);
          income += 0.5 * dt * (disc / decay * f_prev + disc * f_now);
          f_prev = f_now;
        }
        x = x_new;
        S = S_new;
        if (S - x >= policy.lD(S)) {
          acc.totals[i] = income + disc * reward.g(x, S);
          acc.outcome[i] = 0;
          return;
        }
        if (S - x > b_spec.b(S)) {
          acc.totals[i] =
              income + disc * (reward.absorption ==
                                       AbsorptionConvention::RewardAtAbsorption
                                   ? reward.g(x, S)
                                   : 0.0);
          acc.outcome[i] = 1;
          return;
        }
      }
      acc.totals[i] = income;
      acc.outcome[i] = 2;
    }
  });

  return reduce(acc, q, cfg.t_max);
}

std::pair<double, double> estimate_fbar(const DiffusionModel& model, const Fn2& f,
                                        double x0, double s0,
                                        const MCConfig& cfg) {
  if (!(cfg.dt > 0.0)) raise(ErrorCode::NonpositiveDt, "estimate_fbar");
  const std::int64_t n = cfg.n_paths;
  std::vector<double> totals(n, 0.0);
  const double q = model.q;
  const double dt = cfg.dt;
  const double decay = std::exp(-q * dt);
  const std::int64_t max_steps = static_cast<std::int64_t>(cfg.t_max / dt);
  const bool exact_gbm =
      cfg.scheme == Scheme::ExactGBM && model.kind == DiffusionKind::GBM;
  const double log_drift =
      (model.mu_const - 0.5 * model.sigma_const * model.sigma_const) * dt;
  const double log_vol = model.sigma_const * std::sqrt(dt);

  parallel_for(n, cfg.workers, [&](std::int64_t i) {
    PathRng rng(cfg.seed, cfg.antithetic ? static_cast<std::uint64_t>(i / 2)
                                         : static_cast<std::uint64_t>(i),
                cfg.antithetic && (i & 1));
    double income = 0.0, disc = 1.0;
    if (exact_gbm) {
      double lx = std::log(x0), ls = std::log(s0);
      double f_prev = f(x0, s0);
      for (std::int64_t step = 0; step < max_steps; ++step) {
        lx += log_drift + log_vol * rng.normal();
        ls = std::max(ls, lx);
        disc *= decay;
        const double f_now = f(std::exp(lx), std::exp(ls));
        income += 0.5 * dt * (disc / decay * f_prev + disc * f_now);
        f_prev = f_now;
      }
    } else {
      double x = x0, S = s0;
      double f_prev = f(x0, s0);
      const double sq_dt = std::sqrt(dt);
      for (std::int64_t step = 0; step < max_steps; ++step) {
        x += model.mu(x) * dt + model.sigma(x) * sq_dt * rng.normal();
        S = std::max(S, x);
        disc *= decay;
        const double f_now = f(x, S);
        income += 0.5 * dt * (disc / decay * f_prev + disc * f_now);
        f_prev = f_now;
      }
    }
    totals[i] = income;
  });

  double sum = 0.0;
  for (double t : totals) sum += t;
  const double mean = sum / n;
  double ss = 0.0;
  for (double t : totals) ss += (t - mean) * (t - mean);
  const double se = (n > 1) ? std::sqrt(ss / (n - 1) / n) : 0.0;
  return {mean, se};
}

Fn2 make_mc_fbar(const DiffusionModel& model,
                 const std::function<double(double)>& f, const VectorXd& x_grid,
                 const MCConfig& cfg) {
  VectorXd vals(x_grid.size());
  for (int i = 0; i < x_grid.size(); ++i) {
    Fn2 f2 = [&f](double x, double) { return f(x); };
    vals[i] = estimate_fbar(model, f2, x_grid[i], x_grid[i], cfg).first;
  }
  auto interp = std::make_shared<PchipInterpolant>(x_grid, vals);
  return [interp](double x, double) { return (*interp)(x); };
}

namespace {

void thomas_solve(std::vector<double>& sub, std::vector<double>& diag,
                  std::vector<double>& sup, std::vector<double>& rhs,
                  std::vector<double>& out) {
  const int n = static_cast<int>(diag.size());
  for (int i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  out.resize(n);
  out[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i)
    out[i] = (rhs[i] - sup[i] * out[i + 1]) / diag[i];
}

}  // namespace

LatticeDPResult lattice_dp(const DiffusionModel& model, const RewardSpec& reward,
                           const BoundarySpec& b_spec, const VectorXd& x_grid,
                           const VectorXd& s_grid, double dt) {
  if (!(dt > 0.0)) raise(ErrorCode::NonpositiveDt, "lattice_dp");
  const int nx = static_cast<int>(x_grid.size());
  const int ns = static_cast<int>(s_grid.size());
  if (nx < 3) raise(ErrorCode::OutOfDomain, "lattice_dp: x_grid too small");
  const double dx = x_grid[1] - x_grid[0];
  for (int i = 1; i < nx; ++i)
    if (std::abs(x_grid[i] - x_grid[i - 1] - dx) > 1e-9 * dx)
      raise(ErrorCode::OutOfDomain, "lattice_dp: x_grid not uniform");
  auto x_index = [&](double v) {
    const double t = (v - x_grid[0]) / dx;
    const int i = static_cast<int>(std::lround(t));
    if (i < 0 || i >= nx || std::abs(t - i) > 1e-6)
      raise(ErrorCode::OutOfDomain, "lattice_dp: s value off the x grid");
    return i;
  };
  if (ns > 1) {
    for (int j = 1; j < ns; ++j)
      if (std::abs(s_grid[j] - s_grid[j - 1] - dx) > 1e-9 * dx)
        raise(ErrorCode::OutOfDomain,
              "lattice_dp: s_grid spacing must equal the x spacing");
  }

  // explicit-chain monotonicity over the feasible range
  for (int i = 0; i < nx; ++i) {
    const double sg2 = model.sigma(x_grid[i]) * model.sigma(x_grid[i]);
    const double load =
        sg2 * dt / (dx * dx) + std::abs(model.mu(x_grid[i])) * dt / dx;
    if (sg2 * dt > dx * dx * (1.0 + 1e-12) || load > 1.0 + 1e-12)
      raise(ErrorCode::UnstableScheme, "lattice_dp: sigma^2 dt > dx^2");
  }

  LatticeDPResult out;
  out.x_grid = x_grid;
  out.s_grid = s_grid;
  out.V_dp.setConstant(nx, ns, kNaN);
  out.stop_set.setZero(nx, ns);

  const double e = std::exp(-model.q * dt);
  const double theta = -std::expm1(-model.q * dt) / dt;  // (1 - e)/dt, stable

  double v_diag_above = 0.0;
  std::vector<double> sub, diag, sup, rhs, v, h;
  std::vector<std::uint8_t> stop;

  for (int j = ns - 1; j >= 0; --j) {
    const double s = s_grid[j];
    const double x_abs = s - b_spec.b(s);
    const int i_hi = x_index(s);
    int i_lo = 0;
    while (i_lo < i_hi && x_grid[i_lo] <= x_abs + 1e-12 * (1.0 + std::abs(x_abs)))
      ++i_lo;
    if (i_lo >= i_hi) {
      out.V_dp(i_hi, j) = reward.h(s, s);
      out.stop_set(i_hi, j) = 1;
      v_diag_above = out.V_dp(i_hi, j);
      continue;
    }
    const int m = i_hi - i_lo + 1;
    const double absorb_value =
        reward.absorption_payoff(std::max(x_abs, x_grid[0] - dx), s);

    h.resize(m);
    for (int k = 0; k < m; ++k) h[k] = reward.h(x_grid[i_lo + k], s);

    if (j == ns - 1) {
      // truncation closure: the top row stops at once; its influence on lower
      // rows decays with the record survival factor
      for (int k = 0; k < m; ++k) {
        out.V_dp(i_lo + k, j) = h[k];
        out.stop_set(i_lo + k, j) = 1;
      }
      v_diag_above = h[m - 1];
      continue;
    }

    // generator coefficients; central unless the drift breaks monotonicity
    std::vector<double> lo_c(m), up_c(m);
    for (int k = 0; k < m; ++k) {
      const double x = x_grid[i_lo + k];
      const double sg2 = model.sigma(x) * model.sigma(x);
      const double mu = model.mu(x);
      const double half = 0.5 * sg2 / (dx * dx);
      if (std::abs(mu) * dx <= sg2) {
        lo_c[k] = half - 0.5 * mu / dx;
        up_c[k] = half + 0.5 * mu / dx;
      } else {
        lo_c[k] = half + std::max(-mu, 0.0) / dx;
        up_c[k] = half + std::max(mu, 0.0) / dx;
      }
    }

    stop.assign(m, 0);
    v.assign(h.begin(), h.end());
    for (int it = 0; it < 500; ++it) {
      sub.assign(m, 0.0);
      diag.assign(m, 1.0);
      sup.assign(m, 0.0);
      rhs.assign(m, 0.0);
      for (int k = 0; k < m; ++k) {
        if (stop[k]) {
          rhs[k] = h[k];
          continue;
        }
        diag[k] = theta + e * (lo_c[k] + up_c[k]);
        // left neighbour
        if (k == 0) {
          rhs[k] += e * lo_c[k] * absorb_value;
        } else if (stop[k - 1]) {
          rhs[k] += e * lo_c[k] * h[k - 1];
        } else {
          sub[k] = -e * lo_c[k];
        }
        // right neighbour; the diagonal cell couples to the row above
        if (k == m - 1) {
          rhs[k] += e * up_c[k] * v_diag_above;
        } else if (stop[k + 1]) {
          rhs[k] += e * up_c[k] * h[k + 1];
        } else {
          sup[k] = -e * up_c[k];
        }
      }
      thomas_solve(sub, diag, sup, rhs, v);
      // greedy policy update against the one-step continuation value; on a
      // stop cell v equals h, so the comparison must use the neighbours
      bool changed = false;
      for (int k = 0; k < m; ++k) {
        const double left = (k == 0) ? absorb_value : v[k - 1];
        const double right = (k == m - 1) ? v_diag_above : v[k + 1];
        const double cont = e * (lo_c[k] * left + up_c[k] * right) /
                            (theta + e * (lo_c[k] + up_c[k]));
        const std::uint8_t want =
            h[k] >= cont - 1e-13 * (1.0 + std::abs(h[k])) ? 1 : 0;
        if (want != stop[k]) {
          stop[k] = want;
          changed = true;
        }
      }
      if (!changed) break;
    }
    for (int k = 0; k < m; ++k) {
      out.V_dp(i_lo + k, j) = std::max(v[k], h[k]);
      out.stop_set(i_lo + k, j) = stop[k];
    }
    v_diag_above = out.V_dp(i_hi, j);
  }
  return out;
}

HittingReport verify_hitting_identity(const DiffusionModel& model,
                                      const FundamentalPair& fp, double x,
                                      double z, const MCConfig& cfg) {
  HittingReport rep;
  rep.analytic = hitting_laplace(fp, x, z);
  if (x == z) {
    rep.mc = 1.0;
    rep.std_error = 0.0;
    rep.z_score = 0.0;
    rep.pass = true;
    return rep;
  }

  const std::int64_t n = cfg.n_paths;
  std::vector<double> totals(n, 0.0);
  const double q = model.q;
  const double dt = cfg.dt;
  const double decay = std::exp(-q * dt);
  const std::int64_t max_steps = static_cast<std::int64_t>(cfg.t_max / dt);
  const bool up = x < z;
  const bool exact_gbm =
      cfg.scheme == Scheme::ExactGBM && model.kind == DiffusionKind::GBM;

  parallel_for(n, cfg.workers, [&](std::int64_t i) {
    PathRng rng(cfg.seed, static_cast<std::uint64_t>(i), false);
    double disc = 1.0;
    if (exact_gbm) {
      const double log_drift =
          (model.mu_const - 0.5 * model.sigma_const * model.sigma_const) * dt;
      const double log_vol = model.sigma_const * std::sqrt(dt);
      const double log_var = log_vol * log_vol;
      const double c = std::log(z);
      double lx = std::log(x);
      for (std::int64_t step = 0; step < max_steps; ++step) {
        const double a = lx;
        const double b = a + log_drift + log_vol * rng.normal();
        bool hit = up ? b >= c : b <= c;
        if (!hit && cfg.bridge) {
          const double g = up ? (c - a) * (c - b) : (a - c) * (b - c);
          if (g < 24.5 * log_var)  // beyond that the odds are negligible
            hit = rng.uniform() < std::exp(-2.0 * g / log_var);
        }
        if (hit) {
          totals[i] = disc * std::exp(-0.5 * q * dt);
          return;
        }
        lx = b;
        disc *= decay;
      }
    } else {
      const double sq_dt = std::sqrt(dt);
      double xx = x;
      for (std::int64_t step = 0; step < max_steps; ++step) {
        const double sig = model.sigma(xx);
        const double var = sig * sig * dt;
        const double a = xx;
        const double b = a + model.mu(xx) * dt + sig * sq_dt * rng.normal();
        bool hit = up ? b >= z : b <= z;
        if (!hit && cfg.bridge) {
          const double g = up ? (z - a) * (z - b) : (a - z) * (b - z);
          if (g < 24.5 * var) hit = rng.uniform() < std::exp(-2.0 * g / var);
        }
        if (hit) {
          totals[i] = disc * std::exp(-0.5 * q * dt);
          return;
        }
        xx = b;
        disc *= decay;
      }
    }
  });

  double sum = 0.0;
  for (double t : totals) sum += t;
  rep.mc = sum / n;
  double ss = 0.0;
  for (double t : totals) ss += (t - rep.mc) * (t - rep.mc);
  rep.std_error = (n > 1) ? std::sqrt(ss / (n - 1) / n) : 0.0;
  rep.z_score = rep.std_error > 0.0 ? (rep.mc - rep.analytic) / rep.std_error : 0.0;
  rep.pass = std::abs(rep.z_score) <= 3.0;
  return rep;
}

}  // namespace exstop
