#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "eemf/diagnostics.hpp"
#include "eemf/filters.hpp"

namespace eemf {

// Raised for invalid experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Banana, L96 };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Banana;
  // Column order of the output CSV: EnEMF-G, EnEMF-U, EnGMF, EnKF.
  std::vector<FilterConfig> filters;
  // Dimensions (banana) or particle counts (Lorenz '96).
  std::vector<int> sweep;
  int mc_runs = 1;
  std::uint64_t base_seed = 1;
  int workers = 1;
  std::string output_path;

  int particles = 100;  // banana ensemble size
  int windows = 440;    // Lorenz '96 assimilation cycles
  int discard = 40;     // leading cycles excluded from the RMSE
  double dt = 0.2;
  double substep = 0.05;
  double localization_radius = 0.0;  // <= 0 disables localization

  /// Desk-scale banana sweep: n = 1..20, 100 runs, N = 100, EKF updates,
  /// s_E = 0.4 (G) and 0.5 (U).
  static ExperimentConfig banana_defaults();
  /// Desk-scale Lorenz '96 sweep: N in {150, 300}, 8 runs, 440 cycles with
  /// 40 discarded, BRUF(5), r = 4, alpha_inf = 1.01, s_E = 0.15 (G), 2.5 (U).
  static ExperimentConfig l96_defaults();

  void validate() const;
};

struct RunRecord {
  std::string filter;
  int sweep_value = 0;
  int mc_index = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  bool diverged = false;
  DiagnosticCounters diagnostics;
};

struct SweepResult {
  std::string sweep_column;            // "nsT" or "Ns"
  std::vector<std::string> columns;    // one per filter
  std::vector<int> sweep;
  std::vector<RunRecord> records;      // ordered by (sweep, mc, filter)
  std::vector<std::vector<double>> mean_rmse;  // [sweep][filter]
  std::vector<std::vector<int>> diverged;      // [sweep][filter]
  double wall_seconds = 0.0;
};

/// sqrt( (1/K) sum_k ||estimate_k - truth_k||^2 ).
double spatial_rmse(const std::vector<Eigen::VectorXd>& estimates,
                    const std::vector<Eigen::VectorXd>& truths);

SweepResult run_banana_sweep(const ExperimentConfig& cfg);
SweepResult run_l96_sweep(const ExperimentConfig& cfg);
SweepResult run_sweep(const ExperimentConfig& cfg);

/// Header plus one row per sweep value; numbers printed with 17
/// significant digits.
std::string sweep_csv(const SweepResult& result);

/// Plain-text report: seeds, run counts, diverged runs, fallbacks, wall time.
std::string sweep_summary(const ExperimentConfig& cfg, const SweepResult& result);

/// Rows (n, Gaussian bandwidth, Epanechnikov bandwidth, Gaussian efficiency)
/// for ensemble size N.
std::string kernel_table_csv(const std::vector<int>& dims, int N);

/// "a:b", "a:b:step" or "a,b,c" into a list of positive integers.
std::vector<int> parse_int_list(const std::string& text);

/// Applies an INI-style config file on top of cfg. Sections: [experiment],
/// [EnEMF-G], [EnEMF-U], [EnGMF], [EnKF]. Throws ConfigError.
void apply_config_file(const std::string& path, ExperimentConfig& cfg);
void apply_config_stream(std::istream& in, ExperimentConfig& cfg);

/// Default CSV path: ./results/<experiment>-<timestamp>.csv.
std::string default_output_path(const std::string& experiment);

/// Writes a file, creating parent directories as needed.
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace eemf
