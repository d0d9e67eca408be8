#ifndef TWINBOOT_EXPERIMENT_HPP
#define TWINBOOT_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "twinboot/engine.hpp"
#include "twinboot/inference.hpp"
#include "twinboot/problems.hpp"

namespace twinboot {

/// Fully resolved description of one experiment. Every field has a value
/// after preset/override resolution and is echoed verbatim into every
/// output artifact.
struct ExperimentConfig {
  std::string preset = "custom";
  std::string problem = "gaussian";  // gaussian | two-basin | seismic | mlp
  bool twin_boot = true;             // false = "standard" single-model baseline

  // training
  int epochs = 5;
  std::size_t batch_size = 0;  // 0 = full batch
  std::string optimizer = "sgd";
  double learning_rate = 0.01;
  std::string lr_schedule = "constant";  // constant | exponential | step
  double lr_decay_rate = 1.0;
  double lr_step_factor = 0.5;
  int lr_step_every = 0;
  std::vector<int> lr_step_epochs;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::string grouping = "default";  // default | whole | layers | units | patches
  std::string reset_schedule = "none";  // none | every | epochs | adaptive
  int reset_every = 1;
  std::vector<int> reset_epochs;
  int reset_k0 = 50;
  double reset_growth = 2.0;
  std::string update_rule = "center";  // center | sampled
  bool sample_weights = true;

  // problem parameters
  std::size_t dataset_size = 400;  // gaussian / two-basin sample count
  double data_variance = 120.0;    // gaussian per-dimension variance
  double data_noise = 0.5;         // two-basin offset noise sigma_data
  double basin_distance = 2.0;
  double well_width = 1.0;
  std::size_t grid = 30;
  std::size_t measurements = 4096;
  double beta = 1.0;
  double noise_sigma = 0.01;
  double kernel_width = 2.0;
  double smooth_width = 3.0;
  double test_fraction = 0.2;
  std::size_t patch = 3;
  std::string nonlinearity = "tanh";  // tanh | cubic
  std::vector<std::size_t> layer_sizes = {2, 32, 32, 2};
  std::size_t train_points = 500;
  std::size_t val_points = 500;
  double spiral_noise = 0.25;
  double spiral_turns = 1.0;

  // inference and logging
  std::size_t mc_samples = 64;
  std::string mc_granularity = "per-group";  // per-group | whole-vector
  std::size_t reliability_bins = 10;
  bool log_steps = false;
  int log_stride = 1;
  int workers = 2;

  std::string canonical_json() const;
  std::string hash() const;  // FNV-1a over the canonical form
};

/// Named presets pinning experiment defaults.
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Applies one `key=value` override; throws std::invalid_argument for
/// unknown keys or unparsable values.
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

ExperimentConfig config_from_json_text(const std::string& text);

std::unique_ptr<Problem> build_problem(const ExperimentConfig& cfg,
                                       std::uint64_t seed);
TrainConfig to_train_config(const ExperimentConfig& cfg, std::uint64_t seed);

/// Result of a single (config, seed) run plus derived evaluation metrics.
struct RunRecord {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<EpochLog> epochs;
  std::vector<StepLog> steps;
  std::vector<int> reset_epochs;
  std::map<std::string, double> metrics;
  std::vector<double> final_sigma_sq;
  std::vector<double> final_mean_weights;
  bool diverged = false;
  std::string divergence_info;
  ReliabilityReport reliability_report;  // mlp runs only
  bool has_reliability = false;
  // named row-major grids (seismic: truth, recon, abs_error, sigma_map)
  std::vector<std::pair<std::string, std::vector<double>>> grids;
  std::size_t grid_width = 0;
};

/// Deterministic per (config, seed); a diverged run is returned flagged
/// rather than thrown.
RunRecord run_experiment_seed(const ExperimentConfig& cfg, std::uint64_t seed);

/// Runs all seeds (concurrently up to cfg.workers) and returns records in
/// seed order, independent of scheduling.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg,
                                      std::span<const std::uint64_t> seeds);

struct SweepPoint {
  double axis_value = 0.0;
  double sigma_mean = 0.0;
  double sigma_std = 0.0;
  double sigma_theory = 0.0;  // NaN when no closed form applies
  std::size_t n_seeds = 0;
};

struct SweepTable {
  std::string axis;
  std::vector<SweepPoint> points;
};

std::vector<std::string> sweep_axes();

/// Final sigma statistics across seeds for each value of one numeric config
/// axis, with the closed-form reference where one exists.
SweepTable run_sweep(const ExperimentConfig& base, const std::string& axis,
                     std::span<const double> values,
                     std::span<const std::uint64_t> seeds);

// --- output emission -------------------------------------------------------

std::string format_double(double v);  // shortest round-trip, "NaN" for NaN

void write_history_csv(const std::string& path, const RunRecord& record);
void write_sweep_csv(const std::string& path, const SweepTable& table);
void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunRecord& record);
void write_weights_csv(const std::string& path,
                       std::span<const double> weights);
void write_grid_csv(const std::string& path, std::span<const double> values,
                    std::size_t width);
void write_reliability_json(const std::string& path,
                            const ReliabilityReport& report);

/// Writes the full artifact set for one run under dir/seed_<seed>/.
void emit_run_outputs(const std::string& dir, const ExperimentConfig& cfg,
                      const RunRecord& record);

// --- aggregation (report) --------------------------------------------------

/// Two-sided 97.5% Student-t quantile (for 95% confidence intervals).
double t_quantile_975(std::size_t dof);

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double ci95 = 0.0;  // half-width
  std::size_t n = 0;
};

struct ModeSummary {
  std::string mode;  // "twin-boot" or "standard"
  std::vector<MetricSummary> metrics;
};

/// Mean and 95% CI per metric, grouped by mode, from summary.json files
/// found under the given directory.
std::vector<ModeSummary> aggregate_report(const std::string& dir);
std::string render_report(const std::vector<ModeSummary>& report);

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec);

}  // namespace twinboot

#endif
