#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace kpkvb {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind {
  diameter_scaling,
  coupling,
  crossing_recursion,
  degree,
  W_size,
  L0_to_K,
  activity_vs_formula,
};

std::string to_string(ExperimentKind kind);
/// Accepts the names printed by to_string ("diameter-scaling", "W-size", ...). Throws ConfigError.
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::degree;
  std::string name;  ///< output file stem; defaults to the kind name
  std::vector<std::uint64_t> n_grid{1024};
  std::vector<double> alpha_grid{0.8};
  std::vector<double> nu_grid{1.3};
  std::vector<int> h_grid;  ///< crossing-recursion only
  std::uint64_t replicates = 10;
  std::map<std::string, double> tolerances;  ///< defaults filled in by parse_config
  std::map<std::string, double> options;     ///< kind-specific knobs (pair counts, ...)

  double tolerance(const std::string& key) const;
  double option(const std::string& key) const;
};

struct ExperimentConfig {
  std::uint64_t base_seed = 1;
  unsigned threads = 1;
  std::string output;  ///< may be empty; the CLI decides the default
  std::vector<ExperimentSpec> experiments;
};

/// Validates and fills defaults. Throws ConfigError on unknown kinds or keys,
/// empty grids, replicates < 1 and out-of-range parameters.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Default tolerances and options of a kind (documented in README.md).
std::map<std::string, double> default_tolerances(ExperimentKind kind);
std::map<std::string, double> default_options(ExperimentKind kind);

struct Cell {
  std::size_t index = 0;
  std::uint64_t n = 0;
  double alpha = 0.0;
  double nu = 0.0;
  double lambda() const;
  double radius() const;
};

/// hash(base seed, kind, cell coordinates, replicate)
std::uint64_t replicate_seed(std::uint64_t base_seed, ExperimentKind kind, const Cell& cell, std::uint64_t replicate);

struct Record {
  std::size_t cell = 0;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  ///< aligned with RunReport::columns
};

struct Criterion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  ExperimentSpec spec;
  std::uint64_t base_seed = 0;
  std::vector<Cell> cells;
  std::vector<std::string> columns;
  std::vector<Record> records;  ///< sorted by (cell, replicate, row)
  nlohmann::json cell_summaries = nlohmann::json::array();
  std::vector<Criterion> criteria;

  bool passed() const;
  std::size_t column(const std::string& name) const;
};

/// Checks every cell of the grid against the kind's preconditions (alpha range,
/// N > nu, dissection size, h + 1 <= ell_tilde). Throws ConfigError.
void validate_experiment(const ExperimentSpec& spec);

RunReport run_experiment(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);

RunReport run_diameter_scaling(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_coupling_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_activity_vs_formula(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_crossing_recursion(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_W_size_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_L0_to_K_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);
RunReport run_degree_study(const ExperimentSpec& spec, std::uint64_t base_seed, unsigned threads);

/// 2 alpha^2 nu / (pi (alpha - 1/2)^2), the limiting mean degree for alpha > 1/2.
double expected_mean_degree(double alpha, double nu);

/// Closed-form probability that a layer-i box is active:
/// 1 - exp(-lambda b (1 - 2^-alpha) / alpha 2^{(1-alpha) i}).
double activity_probability(double alpha, double lambda, double b, int layer);
/// Lower bound 1 - exp(-lambda 2^{(1-alpha) i} / 12).
double activity_lower_bound(double alpha, double lambda, int layer);

/// CSV: "kind,cell,N,alpha,nu,lambda,R,replicate,seed,<columns>", numbers with
/// 10 significant digits, '.' separator.
void write_csv(std::ostream& out, const RunReport& report);
nlohmann::json summary_json(const RunReport& report);

struct ConfigOutcome {
  bool all_passed = true;
  std::vector<std::string> files;
  nlohmann::json summary;
};

/// Runs every experiment of the config, writing <name>.csv and
/// <name>.summary.json per experiment plus summary.json into out_dir.
ConfigOutcome run_config(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream* log = nullptr);

// small statistics helpers shared with the acceptance suite
double median(std::vector<double> v);
double mean(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);
/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> v, double q);
/// Least-squares slope of y on x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kpkvb
