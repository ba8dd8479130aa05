#pragma once

// Monte Carlo replication harness: simulate R seeded histories per sample
// size, fit, and summarize; plus the asymptotic-normality diagnostic.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pafit/graph_core.hpp"
#include "pafit/hpam_infer.hpp"
#include "pafit/pa_sim.hpp"

namespace pafit {

struct ExperimentConfig {
  Model model = Model::BO;              // BO or HPAM
  std::vector<double> bo_a;             // BO: one or more true values of a
  std::optional<HpamParams> hpam;       // HPAM: true parameters
  std::vector<std::uint64_t> sample_sizes;  // strictly increasing, each >= 2
  std::size_t replications = 0;
  std::uint64_t base_seed = 0;
  std::string output_path;              // directory for raw_estimates.csv and summary.csv
  BoDomain domain;
  Denominator denominator = Denominator::exact;

  void validate() const;
};

/// Parses and validates the JSON form:
///   {"model": "BO"|"HPAM", "true_params": {"a": x | [x...]} | {"pi": [...], "gamma": [...]},
///    "sample_sizes": [...], "replications": R, "base_seed": S, "output_path": "dir",
///    "domain": {"eps": e, "max": m}, "denominator": "exact"|"scaled"}
/// domain and denominator are optional. Violations throw ConfigError with the field path.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig read_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& config);

struct RawEstimate {
  std::uint64_t n = 0;
  std::size_t replication = 0;
  std::string parameter;
  double true_value = 0.0;
  double value = 0.0;
  bool converged = true;

  friend bool operator==(const RawEstimate&, const RawEstimate&) = default;
};

struct SummaryRow {
  std::uint64_t n = 0;
  std::string parameter;
  double true_value = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;  // sample standard deviation (R - 1 denominator)
  std::size_t count = 0;         // converged replications
  std::size_t nonconverged = 0;  // excluded from the statistics
};

struct ExperimentResult {
  std::vector<RawEstimate> raw;  // ordered by (true value, n, replication, parameter)
  std::vector<SummaryRow> summary;
  std::vector<std::string> warnings;
};

/// Seed of replication r at size n: derive_seed(base_seed, tag, n, r) where the
/// tag names the model and its true parameters (e.g. "BO/a=0.5").
std::string experiment_tag(const ExperimentConfig& config, std::size_t true_index = 0);

ExperimentResult run_bo_experiment(const ExperimentConfig& config);
ExperimentResult run_hpam_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Groups raw rows by (true value, n, parameter) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<RawEstimate>& raw, std::vector<std::string>* warnings = nullptr);

/// CSV forms: raw `n,replication,parameter,true_value,value,converged` and
/// summary `n,parameter,true_value,mean,median,std,count,nonconverged`.
/// Reals are printed with 17 significant digits so they round-trip exactly.
std::string raw_estimates_csv(const std::vector<RawEstimate>& raw);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<RawEstimate> parse_raw_estimates_csv(const std::string& text);
/// Writes <dir>/raw_estimates.csv and <dir>/summary.csv atomically.
void write_experiment_outputs(const ExperimentResult& result, const std::string& dir);

/// Worker threads: available parallelism, or PA_THREADS (1..256) when set.
std::size_t worker_count();

struct NormalityReport {
  std::size_t count = 0;
  double sigma2 = 0.0;
  double beta = 0.0;
  double mean = 0.0;  // of z
  double std = 0.0;   // of z
  double ks_distance = 0.0;
  bool degenerate = false;  // all estimates identical
  std::vector<std::pair<double, double>> qq;  // (normal quantile, sorted z)
};

/// z_r = sqrt(n) (a_r - a0) beta / sigma, compared with the standard normal.
/// Needs at least 50 estimates.
NormalityReport normality_diagnostic(const std::vector<double>& estimates, std::uint64_t n, double a0);

}  // namespace pafit
