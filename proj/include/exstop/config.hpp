#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exstop/gbm_drawdown.hpp"
#include "exstop/simulate.hpp"

namespace exstop {

/// Line-oriented problem description: `section.key = value`, '#' comments.
/// The exact grammar is documented in the README.
struct ProblemConfig {
  struct Model {
    std::string kind;  // gbm | abm
    double mu = 0.0, sigma = 0.0, q = 0.0;
    bool operator==(const Model&) const = default;
  } model;

  struct Reward {
    std::string id;  // put | lookback | power_income | custom_table
    std::optional<double> K, k, p;
    std::optional<std::string> g_id;   // linear | zero
    std::optional<std::string> table;  // csv path for custom_table
    std::string absorption = "zero";   // zero | reward
    bool operator==(const Reward&) const = default;
  } reward;

  struct Boundary {
    std::string kind;  // proportional | constant | none
    std::optional<double> beta, c;
    bool operator==(const Boundary&) const = default;
  } boundary;

  struct Grid {
    std::optional<double> x_min, x_max, s_min, s_max;
    std::optional<int> nx, ns;
    bool operator==(const Grid&) const = default;
  } grid;

  struct Mc {
    std::optional<std::int64_t> n_paths;
    std::optional<double> dt, t_max, x0, s0;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;  // exact_gbm | euler
    std::optional<bool> antithetic;
    bool operator==(const Mc&) const = default;
  } mc;

  struct Output {
    std::optional<std::string> dir, vss, surface, mc;
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const ProblemConfig&) const = default;
};

/// Throws Error(ConfigParse) with a "line N:" or "section: missing field"
/// diagnostic.
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig parse_config_file(const std::filesystem::path& path);
std::string serialize_config(const ProblemConfig& cfg);

struct BuiltProblem {
  DiffusionModel model;
  FundamentalPair fp;
  RewardSpec reward;
  BoundarySpec boundary;
  double gamma0 = 0.0, gamma1 = 0.0;  // populated for GBM
};

/// Materializes model, fundamental pair, reward and boundary. base_dir
/// resolves relative table paths.
BuiltProblem build_problem(const ProblemConfig& cfg,
                           const std::filesystem::path& base_dir = ".");

/// Shortest round-trip decimal formatting (std::to_chars).
std::string format_double(double v);

struct VssRow {
  double s, l_star, value, gamma_slope;
  VssMethod method;
  bool boundary_binding;
};
void write_vss_csv(const std::filesystem::path& path,
                   const std::vector<VssRow>& rows);
void write_surface_csv(const std::filesystem::path& path,
                       const ValueSurface& surface);
struct McRow {
  double x0, s0, estimate, std_error;
  std::int64_t n_stopped, n_absorbed, n_censored;
};
void write_mc_csv(const std::filesystem::path& path,
                  const std::vector<McRow>& rows);

/// Derives the optimal threshold policy l*(m) on [s0, m_hi] from the vss
/// solver with linear interpolation between solved levels.
Policy optimal_policy(const BuiltProblem& problem, double s0, double m_hi,
                      int n_nodes = 129);

namespace cli {

/// solve <cfg>: writes vss.csv and surface.csv, prints a summary.
/// Exit 0; 2 on config errors; 3 on solver errors.
int cmd_solve(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir, bool quiet,
              std::ostream& out, std::ostream& err);

/// simulate <cfg> [--paths N] [--seed S]: writes mc.csv and prints the
/// analytic-vs-MC comparison with z-scores.
int cmd_simulate(const std::filesystem::path& config_path,
                 std::optional<std::int64_t> paths_override,
                 std::optional<std::uint64_t> seed_override,
                 const std::filesystem::path& out_dir, bool quiet,
                 std::ostream& out, std::ostream& err);

/// demo <put|lookback|shepp|invest>: runs the packaged example with its
/// reference parameters and prints pass/fail against stored expectations.
/// Exit 0 when all expectations hold, 1 otherwise, 2 for unknown names.
int cmd_demo(const std::string& name, bool quiet, std::ostream& out,
             std::ostream& err);

}  // namespace cli

}  // namespace exstop
