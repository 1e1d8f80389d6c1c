#include "exstop/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace exstop {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  raise(ErrorCode::ConfigParse, "line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) parse_fail(line, "trailing characters in number '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    parse_fail(line, "expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) parse_fail(line, "trailing characters in integer '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    parse_fail(line, "expected an integer, got '" + v + "'");
  }
}

std::uint64_t to_uint(const std::string& v, int line) {
  try {
    size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size() || (!v.empty() && v[0] == '-'))
      parse_fail(line, "trailing characters in seed '" + v + "'");
    return d;
  } catch (const std::logic_error&) {
    parse_fail(line, "expected an unsigned integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  parse_fail(line, "expected a boolean, got '" + v + "'");
}

}  // namespace

ProblemConfig parse_config_text(const std::string& text) {
  ProblemConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_fail(line_no, "expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) parse_fail(line_no, "empty value for '" + key + "'");
    const auto dot = key.find('.');
    if (dot == std::string::npos) parse_fail(line_no, "key '" + key + "' has no section");
    const std::string sec = key.substr(0, dot);
    const std::string fld = key.substr(dot + 1);

    if (sec == "model") {
      if (fld == "kind") cfg.model.kind = val;
      else if (fld == "mu") cfg.model.mu = to_double(val, line_no);
      else if (fld == "sigma") cfg.model.sigma = to_double(val, line_no);
      else if (fld == "q") cfg.model.q = to_double(val, line_no);
      else parse_fail(line_no, "unknown model field '" + fld + "'");
    } else if (sec == "reward") {
      if (fld == "id") cfg.reward.id = val;
      else if (fld == "K") cfg.reward.K = to_double(val, line_no);
      else if (fld == "k") cfg.reward.k = to_double(val, line_no);
      else if (fld == "p") cfg.reward.p = to_double(val, line_no);
      else if (fld == "g_id") cfg.reward.g_id = val;
      else if (fld == "table") cfg.reward.table = val;
      else if (fld == "absorption") cfg.reward.absorption = val;
      else parse_fail(line_no, "unknown reward field '" + fld + "'");
    } else if (sec == "boundary") {
      if (fld == "kind") cfg.boundary.kind = val;
      else if (fld == "beta") cfg.boundary.beta = to_double(val, line_no);
      else if (fld == "c") cfg.boundary.c = to_double(val, line_no);
      else parse_fail(line_no, "unknown boundary field '" + fld + "'");
    } else if (sec == "grid") {
      if (fld == "x_min") cfg.grid.x_min = to_double(val, line_no);
      else if (fld == "x_max") cfg.grid.x_max = to_double(val, line_no);
      else if (fld == "s_min") cfg.grid.s_min = to_double(val, line_no);
      else if (fld == "s_max") cfg.grid.s_max = to_double(val, line_no);
      else if (fld == "nx") cfg.grid.nx = static_cast<int>(to_int(val, line_no));
      else if (fld == "ns") cfg.grid.ns = static_cast<int>(to_int(val, line_no));
      else parse_fail(line_no, "unknown grid field '" + fld + "'");
    } else if (sec == "mc") {
      if (fld == "n_paths") cfg.mc.n_paths = to_int(val, line_no);
      else if (fld == "dt") cfg.mc.dt = to_double(val, line_no);
      else if (fld == "t_max") cfg.mc.t_max = to_double(val, line_no);
      else if (fld == "seed") cfg.mc.seed = to_uint(val, line_no);
      else if (fld == "scheme") cfg.mc.scheme = val;
      else if (fld == "antithetic") cfg.mc.antithetic = to_bool(val, line_no);
      else if (fld == "x0") cfg.mc.x0 = to_double(val, line_no);
      else if (fld == "s0") cfg.mc.s0 = to_double(val, line_no);
      else parse_fail(line_no, "unknown mc field '" + fld + "'");
    } else if (sec == "output") {
      if (fld == "dir") cfg.output.dir = val;
      else if (fld == "vss") cfg.output.vss = val;
      else if (fld == "surface") cfg.output.surface = val;
      else if (fld == "mc") cfg.output.mc = val;
      else parse_fail(line_no, "unknown output field '" + fld + "'");
    } else {
      parse_fail(line_no, "unknown section '" + sec + "'");
    }
  }
  return cfg;
}

ProblemConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ConfigParse, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ProblemConfig& c) {
  std::ostringstream o;
  o << "model.kind = " << c.model.kind << "\n";
  o << "model.mu = " << format_double(c.model.mu) << "\n";
  o << "model.sigma = " << format_double(c.model.sigma) << "\n";
  o << "model.q = " << format_double(c.model.q) << "\n";
  o << "reward.id = " << c.reward.id << "\n";
  auto opt_d = [&](const char* k, const std::optional<double>& v) {
    if (v) o << k << " = " << format_double(*v) << "\n";
  };
  auto opt_s = [&](const char* k, const std::optional<std::string>& v) {
    if (v) o << k << " = " << *v << "\n";
  };
  opt_d("reward.K", c.reward.K);
  opt_d("reward.k", c.reward.k);
  opt_d("reward.p", c.reward.p);
  opt_s("reward.g_id", c.reward.g_id);
  opt_s("reward.table", c.reward.table);
  o << "reward.absorption = " << c.reward.absorption << "\n";
  o << "boundary.kind = " << c.boundary.kind << "\n";
  opt_d("boundary.beta", c.boundary.beta);
  opt_d("boundary.c", c.boundary.c);
  opt_d("grid.x_min", c.grid.x_min);
  opt_d("grid.x_max", c.grid.x_max);
  opt_d("grid.s_min", c.grid.s_min);
  opt_d("grid.s_max", c.grid.s_max);
  if (c.grid.nx) o << "grid.nx = " << *c.grid.nx << "\n";
  if (c.grid.ns) o << "grid.ns = " << *c.grid.ns << "\n";
  if (c.mc.n_paths) o << "mc.n_paths = " << *c.mc.n_paths << "\n";
  opt_d("mc.dt", c.mc.dt);
  opt_d("mc.t_max", c.mc.t_max);
  if (c.mc.seed) o << "mc.seed = " << *c.mc.seed << "\n";
  opt_s("mc.scheme", c.mc.scheme);
  if (c.mc.antithetic) o << "mc.antithetic = " << (*c.mc.antithetic ? "true" : "false") << "\n";
  opt_d("mc.x0", c.mc.x0);
  opt_d("mc.s0", c.mc.s0);
  opt_s("output.dir", c.output.dir);
  opt_s("output.vss", c.output.vss);
  opt_s("output.surface", c.output.surface);
  opt_s("output.mc", c.output.mc);
  return o.str();
}

namespace {

[[noreturn]] void missing(const std::string& section, const std::string& field) {
  raise(ErrorCode::ConfigParse, section + ": missing field " + field);
}

RewardTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ConfigParse, "cannot open table '" + path.string() + "'");
  std::vector<double> xs, ss, hs;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (first && line.find_first_not_of("0123456789+-.eE, \t") != std::string::npos) {
      first = false;  // header row
      continue;
    }
    first = false;
    std::istringstream ls(line);
    std::string tok;
    double v[3];
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(ls, tok, ','))
        raise(ErrorCode::ConfigParse, "table row needs x,s,h: '" + line + "'");
      v[i] = std::stod(trim(tok));
    }
    xs.push_back(v[0]);
    ss.push_back(v[1]);
    hs.push_back(v[2]);
  }
  std::vector<double> ux = xs, us = ss;
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  RewardTable t;
  t.xs = Eigen::Map<VectorXd>(ux.data(), ux.size());
  t.ss = Eigen::Map<VectorXd>(us.data(), us.size());
  t.h = Eigen::MatrixXd::Zero(ux.size(), us.size());
  if (xs.size() != ux.size() * us.size())
    raise(ErrorCode::ConfigParse, "table must cover the full x-s grid");
  for (size_t r = 0; r < xs.size(); ++r) {
    const auto ix = std::lower_bound(ux.begin(), ux.end(), xs[r]) - ux.begin();
    const auto is = std::lower_bound(us.begin(), us.end(), ss[r]) - us.begin();
    t.h(ix, is) = hs[r];
  }
  return t;
}

}  // namespace

BuiltProblem build_problem(const ProblemConfig& cfg,
                           const std::filesystem::path& base_dir) {
  BuiltProblem p;
  if (cfg.model.kind.empty()) missing("model", "kind");
  if (cfg.model.kind == "gbm") {
    GbmModel g = make_gbm(cfg.model.mu, cfg.model.sigma, cfg.model.q);
    p.model = g.model;
    p.fp = g.fp;
    p.gamma0 = g.gamma0;
    p.gamma1 = g.gamma1;
  } else if (cfg.model.kind == "abm") {
    AbmModel a = make_abm(cfg.model.mu, cfg.model.sigma, cfg.model.q);
    p.model = a.model;
    p.fp = a.fp;
  } else {
    raise(ErrorCode::ConfigParse, "model: unknown kind '" + cfg.model.kind + "'");
  }

  AbsorptionConvention conv;
  if (cfg.reward.absorption == "zero") conv = AbsorptionConvention::ZeroAtAbsorption;
  else if (cfg.reward.absorption == "reward") conv = AbsorptionConvention::RewardAtAbsorption;
  else raise(ErrorCode::ConfigParse, "reward: unknown absorption '" + cfg.reward.absorption + "'");

  if (cfg.reward.id == "put") {
    if (!cfg.reward.K) missing("reward", "K");
    p.reward = make_put_reward(*cfg.reward.K, conv);
  } else if (cfg.reward.id == "lookback") {
    if (!cfg.reward.k) missing("reward", "k");
    p.reward = make_lookback_reward(*cfg.reward.k, conv);
  } else if (cfg.reward.id == "power_income") {
    if (!cfg.reward.p) missing("reward", "p");
    TerminalId gid = TerminalId::Linear;
    if (cfg.reward.g_id) {
      if (*cfg.reward.g_id == "linear") gid = TerminalId::Linear;
      else if (*cfg.reward.g_id == "zero") gid = TerminalId::Zero;
      else raise(ErrorCode::ConfigParse, "reward: unknown g_id '" + *cfg.reward.g_id + "'");
    }
    p.reward = make_power_income_reward(cfg.model.mu, cfg.model.sigma,
                                        cfg.model.q, *cfg.reward.p, gid, conv);
  } else if (cfg.reward.id == "custom_table") {
    if (!cfg.reward.table) missing("reward", "table");
    p.reward = make_table_reward(load_table(base_dir / *cfg.reward.table), conv);
  } else if (cfg.reward.id.empty()) {
    missing("reward", "id");
  } else {
    raise(ErrorCode::ConfigParse, "reward: unknown id '" + cfg.reward.id + "'");
  }

  if (cfg.boundary.kind == "proportional") {
    if (!cfg.boundary.beta) missing("boundary", "beta");
    p.boundary = BoundarySpec::proportional(*cfg.boundary.beta);
  } else if (cfg.boundary.kind == "constant") {
    if (!cfg.boundary.c) missing("boundary", "c");
    p.boundary = BoundarySpec::constant(*cfg.boundary.c);
  } else if (cfg.boundary.kind == "none" || cfg.boundary.kind.empty()) {
    const double lo = std::isfinite(p.model.state_space.lo) ? p.model.state_space.lo : 0.0;
    p.boundary = BoundarySpec::none(lo);
  } else {
    raise(ErrorCode::ConfigParse, "boundary: unknown kind '" + cfg.boundary.kind + "'");
  }
  return p;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {
const char* method_name(VssMethod m) {
  switch (m) {
    case VssMethod::Corollary1: return "corollary1";
    case VssMethod::Prop2: return "prop2";
    case VssMethod::Integral: return "integral";
    case VssMethod::XIndependent: return "x_independent";
  }
  return "?";
}
const char* region_name(std::int8_t r) {
  switch (static_cast<RegionLabel>(r)) {
    case RegionLabel::STOP: return "STOP";
    case RegionLabel::CONTINUE: return "CONTINUE";
    case RegionLabel::INFEASIBLE: return "INFEASIBLE";
  }
  return "?";
}
}  // namespace

void write_vss_csv(const std::filesystem::path& path,
                   const std::vector<VssRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  out << "s,l_star,value,gamma_slope,method,boundary_binding\n";
  for (const auto& r : rows) {
    out << format_double(r.s) << ',' << format_double(r.l_star) << ','
        << format_double(r.value) << ',' << format_double(r.gamma_slope) << ','
        << method_name(r.method) << ',' << (r.boundary_binding ? "true" : "false")
        << '\n';
  }
}

void write_surface_csv(const std::filesystem::path& path,
                       const ValueSurface& surface) {
  std::ofstream out(path, std::ios::binary);
  out << "x,s,value,region\n";
  for (int j = 0; j < surface.s_grid.size(); ++j) {
    for (int i = 0; i < surface.x_grid.size(); ++i) {
      out << format_double(surface.x_grid[i]) << ','
          << format_double(surface.s_grid[j]) << ','
          << format_double(surface.V(i, j)) << ','
          << region_name(surface.region(i, j)) << '\n';
    }
  }
}

void write_mc_csv(const std::filesystem::path& path,
                  const std::vector<McRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  out << "x0,s0,estimate,stderr,n_stopped,n_absorbed,n_censored\n";
  for (const auto& r : rows) {
    out << format_double(r.x0) << ',' << format_double(r.s0) << ','
        << format_double(r.estimate) << ',' << format_double(r.std_error) << ','
        << r.n_stopped << ',' << r.n_absorbed << ',' << r.n_censored << '\n';
  }
}

Policy optimal_policy(const BuiltProblem& problem, double s0, double m_hi,
                      int n_nodes) {
  auto levels = std::make_shared<std::vector<std::pair<double, double>>>();
  levels->reserve(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    const double m = s0 + (m_hi - s0) * i / (n_nodes - 1);
    const double b_m = problem.boundary.b(m);
    const VssSolution sol =
        problem.reward.s_dependent
            ? solve_prop2(problem.fp, problem.reward, m, b_m)
            : solve_corollary1(problem.fp, problem.reward, m, b_m);
    levels->emplace_back(m, sol.l_star);
  }
  auto boundary = problem.boundary;
  return Policy{[levels, boundary](double m) {
    const auto& v = *levels;
    double l;
    if (m <= v.front().first) {
      l = v.front().second;
    } else if (m >= v.back().first) {
      l = v.back().second + (m - v.back().first);  // keep the stop level fixed
    } else {
      size_t lo = 0, hi = v.size() - 1;
      while (hi - lo > 1) {
        const size_t mid = (lo + hi) / 2;
        (v[mid].first <= m ? lo : hi) = mid;
      }
      const double t = (m - v[lo].first) / (v[hi].first - v[lo].first);
      l = (1 - t) * v[lo].second + t * v[hi].second;
    }
    return std::clamp(l, 0.0, boundary.b(m));
  }};
}

}  // namespace exstop
