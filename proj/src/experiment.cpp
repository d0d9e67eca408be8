#include "twinboot/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "twinboot/theory.hpp"

namespace twinboot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCodeVersion = "twinboot 0.1.0";

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["problem"] = c.problem;
  j["twin_boot"] = c.twin_boot;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["optimizer"] = c.optimizer;
  j["learning_rate"] = c.learning_rate;
  j["lr_schedule"] = c.lr_schedule;
  j["lr_decay_rate"] = c.lr_decay_rate;
  j["lr_step_factor"] = c.lr_step_factor;
  j["lr_step_every"] = c.lr_step_every;
  j["lr_step_epochs"] = c.lr_step_epochs;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_epsilon"] = c.adam_epsilon;
  j["grouping"] = c.grouping;
  j["reset_schedule"] = c.reset_schedule;
  j["reset_every"] = c.reset_every;
  j["reset_epochs"] = c.reset_epochs;
  j["reset_k0"] = c.reset_k0;
  j["reset_growth"] = c.reset_growth;
  j["update_rule"] = c.update_rule;
  j["sample_weights"] = c.sample_weights;
  j["dataset_size"] = c.dataset_size;
  j["data_variance"] = c.data_variance;
  j["data_noise"] = c.data_noise;
  j["basin_distance"] = c.basin_distance;
  j["well_width"] = c.well_width;
  j["grid"] = c.grid;
  j["measurements"] = c.measurements;
  j["beta"] = c.beta;
  j["noise_sigma"] = c.noise_sigma;
  j["kernel_width"] = c.kernel_width;
  j["smooth_width"] = c.smooth_width;
  j["test_fraction"] = c.test_fraction;
  j["patch"] = c.patch;
  j["nonlinearity"] = c.nonlinearity;
  j["layer_sizes"] = c.layer_sizes;
  j["train_points"] = c.train_points;
  j["val_points"] = c.val_points;
  j["spiral_noise"] = c.spiral_noise;
  j["spiral_turns"] = c.spiral_turns;
  j["mc_samples"] = c.mc_samples;
  j["mc_granularity"] = c.mc_granularity;
  j["reliability_bins"] = c.reliability_bins;
  j["log_steps"] = c.log_steps;
  j["log_stride"] = c.log_stride;
  j["workers"] = c.workers;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  j.at("preset").get_to(c.preset);
  j.at("problem").get_to(c.problem);
  j.at("twin_boot").get_to(c.twin_boot);
  j.at("epochs").get_to(c.epochs);
  j.at("batch_size").get_to(c.batch_size);
  j.at("optimizer").get_to(c.optimizer);
  j.at("learning_rate").get_to(c.learning_rate);
  j.at("lr_schedule").get_to(c.lr_schedule);
  j.at("lr_decay_rate").get_to(c.lr_decay_rate);
  j.at("lr_step_factor").get_to(c.lr_step_factor);
  j.at("lr_step_every").get_to(c.lr_step_every);
  j.at("lr_step_epochs").get_to(c.lr_step_epochs);
  j.at("adam_beta1").get_to(c.adam_beta1);
  j.at("adam_beta2").get_to(c.adam_beta2);
  j.at("adam_epsilon").get_to(c.adam_epsilon);
  j.at("grouping").get_to(c.grouping);
  j.at("reset_schedule").get_to(c.reset_schedule);
  j.at("reset_every").get_to(c.reset_every);
  j.at("reset_epochs").get_to(c.reset_epochs);
  j.at("reset_k0").get_to(c.reset_k0);
  j.at("reset_growth").get_to(c.reset_growth);
  j.at("update_rule").get_to(c.update_rule);
  j.at("sample_weights").get_to(c.sample_weights);
  j.at("dataset_size").get_to(c.dataset_size);
  j.at("data_variance").get_to(c.data_variance);
  j.at("data_noise").get_to(c.data_noise);
  j.at("basin_distance").get_to(c.basin_distance);
  j.at("well_width").get_to(c.well_width);
  j.at("grid").get_to(c.grid);
  j.at("measurements").get_to(c.measurements);
  j.at("beta").get_to(c.beta);
  j.at("noise_sigma").get_to(c.noise_sigma);
  j.at("kernel_width").get_to(c.kernel_width);
  j.at("smooth_width").get_to(c.smooth_width);
  j.at("test_fraction").get_to(c.test_fraction);
  j.at("patch").get_to(c.patch);
  j.at("nonlinearity").get_to(c.nonlinearity);
  j.at("layer_sizes").get_to(c.layer_sizes);
  j.at("train_points").get_to(c.train_points);
  j.at("val_points").get_to(c.val_points);
  j.at("spiral_noise").get_to(c.spiral_noise);
  j.at("spiral_turns").get_to(c.spiral_turns);
  j.at("mc_samples").get_to(c.mc_samples);
  j.at("mc_granularity").get_to(c.mc_granularity);
  j.at("reliability_bins").get_to(c.reliability_bins);
  j.at("log_steps").get_to(c.log_steps);
  j.at("log_stride").get_to(c.log_stride);
  j.at("workers").get_to(c.workers);
  return c;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const {
  return config_to_json(*this).dump();
}

std::string ExperimentConfig::hash() const {
  const std::string s = canonical_json();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "figure1") {
    // Gaussian mean tracking, single-run settings.
    c.problem = "gaussian";
    c.epochs = 5;
    c.batch_size = 200;
    c.optimizer = "sgd";
    c.learning_rate = 0.07;
    c.dataset_size = 400;
    c.data_variance = 120.0;
    c.reset_schedule = "none";
    c.log_steps = true;
    c.log_stride = 4;
  } else if (name == "figure2" || name == "figure3") {
    // Two-basin landscape; figure2 logs trajectories, figure3 is the sweep base.
    c.problem = "two-basin";
    c.epochs = 40;
    c.batch_size = 10;
    c.optimizer = "sgd";
    c.learning_rate = 0.2;
    c.lr_schedule = "step";
    c.lr_step_factor = 0.5;
    c.lr_step_epochs = {20, 30};
    c.dataset_size = 100;
    c.data_noise = 0.5;
    c.basin_distance = 2.0;
    c.well_width = 1.0;
    c.reset_schedule = "epochs";
    c.reset_epochs = {1, 2, 6, 12};
    c.log_steps = name == "figure2";
  } else if (name == "table1" || name == "figure6") {
    // Deep-training inversion with sparse training rows: the standard
    // optimizer interpolates measurement noise while the twin run is held
    // back by its sampled-weight regularization.
    c.problem = "seismic";
    c.epochs = 2500;
    c.batch_size = 32;
    c.optimizer = "adam";
    c.learning_rate = 0.001;
    c.lr_schedule = "exponential";
    c.lr_decay_rate = 0.9998;
    c.reset_schedule = "adaptive";
    c.reset_k0 = 50;
    c.reset_growth = 2.0;
    c.grouping = "patches";
    c.kernel_width = 1.5;
    c.noise_sigma = 0.05;
    c.test_fraction = 0.95;
  } else if (name == "mlp-calibration") {
    // Overparameterized low-data spirals: hot start decaying to a cold
    // tail, so the baseline memorizes while the twins' uncertainty spikes
    // early and settles.
    c.problem = "mlp";
    c.epochs = 1200;
    c.batch_size = 8;
    c.optimizer = "sgd";
    c.learning_rate = 1.0;
    c.lr_schedule = "exponential";
    c.lr_decay_rate = 0.995;
    c.layer_sizes = {2, 48, 48, 2};
    c.train_points = 500;
    c.val_points = 1000;
    c.spiral_noise = 0.25;
    c.spiral_turns = 1.0;
    c.reset_schedule = "every";
    c.reset_every = 1;
    c.grouping = "layers";
    c.mc_samples = 64;
  } else if (name == "custom") {
    // plain defaults
  } else {
    std::string known;
    for (const auto& p : preset_names()) known += " " + p;
    throw std::invalid_argument("unknown preset '" + name + "'; known:" + known);
  }
  return c;
}

std::vector<std::string> preset_names() {
  return {"figure1", "figure2", "figure3", "table1", "figure6",
          "mlp-calibration", "custom"};
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::stringstream ss(value);
  T out;
  ss >> out;
  if (ss.fail() || !ss.eof()) {
    throw std::invalid_argument("cannot parse value '" + value + "' for key '" +
                                key + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw std::invalid_argument("cannot parse boolean '" + value + "' for key '" +
                              key + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  return out;
}

}  // namespace

void apply_override(ExperimentConfig& c, const std::string& key,
                    const std::string& value) {
  if (key == "problem") c.problem = value;
  else if (key == "twin_boot") c.twin_boot = parse_bool(key, value);
  else if (key == "epochs") c.epochs = parse_number<int>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "optimizer") c.optimizer = value;
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "lr_schedule") c.lr_schedule = value;
  else if (key == "lr_decay_rate") c.lr_decay_rate = parse_number<double>(key, value);
  else if (key == "lr_step_factor") c.lr_step_factor = parse_number<double>(key, value);
  else if (key == "lr_step_every") c.lr_step_every = parse_number<int>(key, value);
  else if (key == "lr_step_epochs") c.lr_step_epochs = parse_list<int>(key, value);
  else if (key == "adam_beta1") c.adam_beta1 = parse_number<double>(key, value);
  else if (key == "adam_beta2") c.adam_beta2 = parse_number<double>(key, value);
  else if (key == "adam_epsilon") c.adam_epsilon = parse_number<double>(key, value);
  else if (key == "grouping") c.grouping = value;
  else if (key == "reset_schedule") c.reset_schedule = value;
  else if (key == "reset_every") c.reset_every = parse_number<int>(key, value);
  else if (key == "reset_epochs") c.reset_epochs = parse_list<int>(key, value);
  else if (key == "reset_k0") c.reset_k0 = parse_number<int>(key, value);
  else if (key == "reset_growth") c.reset_growth = parse_number<double>(key, value);
  else if (key == "update_rule") c.update_rule = value;
  else if (key == "sample_weights") c.sample_weights = parse_bool(key, value);
  else if (key == "dataset_size") c.dataset_size = parse_number<std::size_t>(key, value);
  else if (key == "data_variance") c.data_variance = parse_number<double>(key, value);
  else if (key == "data_noise") c.data_noise = parse_number<double>(key, value);
  else if (key == "basin_distance") c.basin_distance = parse_number<double>(key, value);
  else if (key == "well_width") c.well_width = parse_number<double>(key, value);
  else if (key == "grid") c.grid = parse_number<std::size_t>(key, value);
  else if (key == "measurements") c.measurements = parse_number<std::size_t>(key, value);
  else if (key == "beta") c.beta = parse_number<double>(key, value);
  else if (key == "noise_sigma") c.noise_sigma = parse_number<double>(key, value);
  else if (key == "kernel_width") c.kernel_width = parse_number<double>(key, value);
  else if (key == "smooth_width") c.smooth_width = parse_number<double>(key, value);
  else if (key == "test_fraction") c.test_fraction = parse_number<double>(key, value);
  else if (key == "patch") c.patch = parse_number<std::size_t>(key, value);
  else if (key == "nonlinearity") c.nonlinearity = value;
  else if (key == "layer_sizes") c.layer_sizes = parse_list<std::size_t>(key, value);
  else if (key == "train_points") c.train_points = parse_number<std::size_t>(key, value);
  else if (key == "val_points") c.val_points = parse_number<std::size_t>(key, value);
  else if (key == "spiral_noise") c.spiral_noise = parse_number<double>(key, value);
  else if (key == "spiral_turns") c.spiral_turns = parse_number<double>(key, value);
  else if (key == "mc_samples") c.mc_samples = parse_number<std::size_t>(key, value);
  else if (key == "mc_granularity") c.mc_granularity = value;
  else if (key == "reliability_bins") c.reliability_bins = parse_number<std::size_t>(key, value);
  else if (key == "log_steps") c.log_steps = parse_bool(key, value);
  else if (key == "log_stride") c.log_stride = parse_number<int>(key, value);
  else if (key == "workers") c.workers = parse_number<int>(key, value);
  else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig config_from_json_text(const std::string& text) {
  return config_from_json(json::parse(text));
}

std::unique_ptr<Problem> build_problem(const ExperimentConfig& c,
                                       std::uint64_t seed) {
  if (c.problem == "gaussian") {
    return std::make_unique<GaussianMeanProblem>(
        c.dataset_size, c.data_variance, std::array<double, 2>{0.0, 0.0}, seed);
  }
  if (c.problem == "two-basin") {
    const double half = 0.5 * c.basin_distance;
    return std::make_unique<TwoBasinProblem>(
        std::array<double, 2>{-half, 0.0}, std::array<double, 2>{half, 0.0},
        c.well_width, c.dataset_size, c.data_noise, seed);
  }
  if (c.problem == "seismic") {
    SeismicConfig sc;
    sc.grid = c.grid;
    sc.measurements = c.measurements;
    sc.beta = c.beta;
    sc.noise_sigma = c.noise_sigma;
    sc.kernel_width = c.kernel_width;
    sc.smooth_width = c.smooth_width;
    sc.test_fraction = c.test_fraction;
    sc.patch = c.patch;
    if (c.nonlinearity == "tanh") {
      sc.nonlinearity = SeismicNonlinearity::tanh;
    } else if (c.nonlinearity == "cubic") {
      sc.nonlinearity = SeismicNonlinearity::cubic;
    } else {
      throw std::invalid_argument("unknown nonlinearity '" + c.nonlinearity +
                                  "' (tanh|cubic)");
    }
    return std::make_unique<SeismicProblem>(seed, sc);
  }
  if (c.problem == "mlp") {
    MlpConfig mc;
    mc.layer_sizes = c.layer_sizes;
    mc.train_points = c.train_points;
    mc.val_points = c.val_points;
    mc.spiral_noise = c.spiral_noise;
    mc.spiral_turns = c.spiral_turns;
    return std::make_unique<MlpProblem>(seed, mc);
  }
  throw std::invalid_argument("unknown problem '" + c.problem +
                              "' (gaussian|two-basin|seismic|mlp)");
}

TrainConfig to_train_config(const ExperimentConfig& c, std::uint64_t seed) {
  TrainConfig t;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  if (c.optimizer == "sgd") {
    t.optimizer = OptimizerKind::sgd;
  } else if (c.optimizer == "adam") {
    t.optimizer = OptimizerKind::adam;
  } else {
    throw std::invalid_argument("unknown optimizer '" + c.optimizer +
                                "' (sgd|adam)");
  }
  t.learning_rate = c.learning_rate;
  if (c.lr_schedule == "constant") {
    t.lr_schedule = LrSchedule::constant_lr();
  } else if (c.lr_schedule == "exponential") {
    t.lr_schedule = LrSchedule::exponential(c.lr_decay_rate);
  } else if (c.lr_schedule == "step") {
    t.lr_schedule = c.lr_step_epochs.empty()
                        ? LrSchedule::step_every(c.lr_step_factor,
                                                 c.lr_step_every)
                        : LrSchedule::step_at(c.lr_step_factor,
                                              c.lr_step_epochs);
  } else {
    throw std::invalid_argument("unknown lr_schedule '" + c.lr_schedule +
                                "' (constant|exponential|step)");
  }
  t.adam = AdamParams{c.adam_beta1, c.adam_beta2, c.adam_epsilon};
  if (c.grouping != "default") {
    t.grouping = grouping_kind_from_string(c.grouping);
  }
  if (c.reset_schedule == "none") {
    t.reset = ResetSchedule::none_schedule();
  } else if (c.reset_schedule == "every") {
    t.reset = ResetSchedule::every_k_epochs(c.reset_every);
  } else if (c.reset_schedule == "epochs") {
    t.reset = ResetSchedule::at_epochs(c.reset_epochs);
  } else if (c.reset_schedule == "adaptive") {
    t.reset = ResetSchedule::adaptive(c.reset_k0, c.reset_growth);
  } else {
    throw std::invalid_argument("unknown reset_schedule '" + c.reset_schedule +
                                "' (none|every|epochs|adaptive)");
  }
  if (c.update_rule == "center") {
    t.update_rule = UpdateRule::center;
  } else if (c.update_rule == "sampled") {
    t.update_rule = UpdateRule::sampled;
  } else {
    throw std::invalid_argument("unknown update_rule '" + c.update_rule +
                                "' (center|sampled)");
  }
  t.twin_boot = c.twin_boot;
  t.sample_weights = c.sample_weights;
  t.seed = seed;
  t.log_steps = c.log_steps;
  t.log_stride = c.log_stride;
  return t;
}

namespace {

std::vector<double> broadcast_sigma_map(const ParamGrouping& grouping,
                                        std::span<const double> sigma_sq) {
  std::vector<double> out(grouping.param_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::sqrt(sigma_sq[grouping.group_of(i)]);
  }
  return out;
}

/// Class-probability matrix over a dataset; twin-boot runs average over
/// mc_samples weight draws, baseline runs use the deterministic weights.
std::vector<std::vector<double>> probability_matrix(
    const MlpProblem& mlp, const ExperimentConfig& cfg, const TwinState& state,
    const Dataset& split, std::uint64_t seed) {
  ParamVector mean(state.w1.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] = 0.5 * (state.w1[i] + state.w2[i]);
  }
  std::vector<std::vector<double>> probs(split.inputs.size());
  if (!cfg.twin_boot || cfg.mc_samples <= 1) {
    for (std::size_t i = 0; i < split.inputs.size(); ++i) {
      probs[i] = mlp.predict_probs(mean, split.inputs[i]);
    }
    return probs;
  }
  const McGranularity gran = cfg.mc_granularity == "whole-vector"
                                 ? McGranularity::whole_vector
                                 : McGranularity::per_group;
  const ParamGrouping whole = group_whole(mean.size());
  const ParamGrouping& g =
      gran == McGranularity::per_group ? state.grouping : whole;
  const SigmaEstimate sigma = estimate_sigma(state.w1, state.w2, g);
  RngStream rng(seed, streams::mc_inference);
  for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
    const ParamVector ws = sample_around(mean, sigma, g, rng);
    for (std::size_t i = 0; i < split.inputs.size(); ++i) {
      const auto p = mlp.predict_probs(ws, split.inputs[i]);
      if (probs[i].empty()) probs[i].assign(p.size(), 0.0);
      for (std::size_t j = 0; j < p.size(); ++j) probs[i][j] += p[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.mc_samples);
  for (auto& row : probs) {
    for (double& v : row) v *= inv;
  }
  return probs;
}

void add_problem_metrics(const ExperimentConfig& cfg, const Problem& problem,
                         const TrainConfig& tc, RunRecord& rec,
                         const TrainResult& result) {
  const TwinState& st = result.state;
  ParamVector mean(st.w1.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    mean[i] = 0.5 * (st.w1[i] + st.w2[i]);
  }
  for (const auto& [name, value] : problem.final_metrics(mean)) {
    rec.metrics[name] = value;
  }
  rec.final_mean_weights.assign(mean.raw().begin(), mean.raw().end());

  if (const auto* basin = dynamic_cast<const TwoBasinProblem*>(&problem)) {
    const auto near_id = [&](const ParamVector& w) {
      const double d1 = std::hypot(w[0] - basin->mu1()[0], w[1] - basin->mu1()[1]);
      const double d2 = std::hypot(w[0] - basin->mu2()[0], w[1] - basin->mu2()[1]);
      return d1 <= d2 ? 1 : 2;
    };
    const double dx = st.w1[0] - st.w2[0];
    const double dy = st.w1[1] - st.w2[1];
    rec.metrics["twin_distance"] = std::sqrt(dx * dx + dy * dy);
    rec.metrics["same_basin"] =
        near_id(st.w1) == near_id(st.w2) ? 1.0 : 0.0;
    rec.metrics["sigma_theory"] = sigma_theory_two_basin(
        cfg.basin_distance, cfg.well_width, cfg.data_noise, cfg.dataset_size);
  }

  if (const auto* seismic = dynamic_cast<const SeismicProblem*>(&problem)) {
    const std::vector<double> sigma_map =
        broadcast_sigma_map(st.grouping, st.sigma.sigma_sq);
    const std::vector<double> err_map = seismic->abs_error_map(mean);
    const CorrelationResult corr = sigma_error_correlation(sigma_map, err_map);
    rec.metrics["sigma_error_spearman"] = corr.defined ? corr.spearman : 0.0;
    rec.metrics["sigma_error_pearson"] = corr.defined ? corr.pearson : 0.0;
    rec.grid_width = seismic->config().grid;
    rec.grids.emplace_back("truth", std::vector<double>(
                                        seismic->truth().begin(),
                                        seismic->truth().end()));
    rec.grids.emplace_back("recon", rec.final_mean_weights);
    rec.grids.emplace_back("abs_error", err_map);
    rec.grids.emplace_back("sigma_map", sigma_map);
  }

  if (const auto* mlp = dynamic_cast<const MlpProblem*>(&problem)) {
    const double train_acc = rec.metrics.at("train_accuracy");
    const double val_acc = rec.metrics.at("val_accuracy");
    rec.metrics["accuracy_gap"] = train_acc - val_acc;
    const auto probs =
        probability_matrix(*mlp, cfg, st, mlp->val_set(), tc.seed);
    std::vector<std::size_t> labels(mlp->val_set().targets.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i] = static_cast<std::size_t>(mlp->val_set().targets[i][0]);
    }
    rec.reliability_report = reliability(probs, labels, cfg.reliability_bins);
    rec.has_reliability = true;
    rec.metrics["ece"] = rec.reliability_report.ece;
  }
}

}  // namespace

RunRecord run_experiment_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunRecord rec;
  rec.seed = seed;
  rec.config_hash = cfg.hash();
  const std::unique_ptr<Problem> problem = build_problem(cfg, seed);
  const TrainConfig tc = to_train_config(cfg, seed);
  try {
    TrainResult result = run_training(*problem, tc);
    rec.epochs = std::move(result.epochs);
    rec.steps = std::move(result.steps);
    rec.reset_epochs = std::move(result.reset_epochs);
    rec.final_sigma_sq = result.state.sigma.sigma_sq;
    rec.metrics["wall_seconds"] = result.wall_seconds;
    rec.metrics["final_sigma_avg"] = result.final_sigma_avg();
    if (!rec.epochs.empty()) {
      rec.metrics["final_loss1"] = rec.epochs.back().mean_loss1;
      rec.metrics["final_loss2"] = rec.epochs.back().mean_loss2;
    }
    rec.metrics["reset_count"] = static_cast<double>(rec.reset_epochs.size());
    add_problem_metrics(cfg, *problem, tc, rec, result);
  } catch (const DivergedError& e) {
    rec.diverged = true;
    rec.divergence_info = e.what();
  }
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg,
                                      std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) {
    throw std::invalid_argument("run_experiment: empty seed list");
  }
  std::vector<RunRecord> out(seeds.size());
  const std::size_t workers = std::min<std::size_t>(
      std::max(1, cfg.workers), seeds.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      out[i] = run_experiment_seed(cfg, seeds[i]);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= seeds.size() || failed.load()) break;
        try {
          out[i] = run_experiment_seed(cfg, seeds[i]);
        } catch (const std::exception& e) {
          if (!failed.exchange(true)) error = e.what();
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error(error);
  return out;
}

std::vector<std::string> sweep_axes() {
  return {"dataset_size", "data_noise",  "data_variance", "learning_rate",
          "batch_size",   "epochs",      "beta",          "noise_sigma",
          "kernel_width", "well_width",  "basin_distance", "spiral_noise",
          "test_fraction"};
}

namespace {

void set_axis(ExperimentConfig& cfg, const std::string& axis, double value) {
  if (axis == "dataset_size") cfg.dataset_size = static_cast<std::size_t>(value);
  else if (axis == "data_noise") cfg.data_noise = value;
  else if (axis == "data_variance") cfg.data_variance = value;
  else if (axis == "learning_rate") cfg.learning_rate = value;
  else if (axis == "batch_size") cfg.batch_size = static_cast<std::size_t>(value);
  else if (axis == "epochs") cfg.epochs = static_cast<int>(value);
  else if (axis == "beta") cfg.beta = value;
  else if (axis == "noise_sigma") cfg.noise_sigma = value;
  else if (axis == "kernel_width") cfg.kernel_width = value;
  else if (axis == "well_width") cfg.well_width = value;
  else if (axis == "basin_distance") cfg.basin_distance = value;
  else if (axis == "spiral_noise") cfg.spiral_noise = value;
  else if (axis == "test_fraction") cfg.test_fraction = value;
  else {
    std::string valid;
    for (const auto& a : sweep_axes()) valid += " " + a;
    throw std::invalid_argument("unknown sweep axis '" + axis +
                                "'; valid axes:" + valid);
  }
}

double sweep_sigma_theory(const ExperimentConfig& cfg) {
  if (cfg.problem == "two-basin") {
    return sigma_theory_two_basin(cfg.basin_distance, cfg.well_width,
                                  cfg.data_noise, cfg.dataset_size);
  }
  if (cfg.problem == "gaussian") {
    return sigma_true_gaussian(std::sqrt(cfg.data_variance), cfg.dataset_size);
  }
  return std::nan("");
}

}  // namespace

SweepTable run_sweep(const ExperimentConfig& base, const std::string& axis,
                     std::span<const double> values,
                     std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) {
    throw std::invalid_argument("run_sweep: empty seed list");
  }
  if (values.empty()) {
    throw std::invalid_argument("run_sweep: empty value list");
  }
  SweepTable table;
  table.axis = axis;
  for (double value : values) {
    ExperimentConfig cfg = base;
    set_axis(cfg, axis, value);
    const std::vector<RunRecord> records = run_experiment(cfg, seeds);
    SweepPoint pt;
    pt.axis_value = value;
    pt.sigma_theory = sweep_sigma_theory(cfg);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const RunRecord& r : records) {
      if (r.diverged) continue;
      const double s = r.metrics.at("final_sigma_avg");
      sum += s;
      sum_sq += s * s;
      ++n;
    }
    pt.n_seeds = n;
    if (n > 0) {
      pt.sigma_mean = sum / static_cast<double>(n);
      pt.sigma_std =
          n > 1 ? std::sqrt((sum_sq - sum * sum / static_cast<double>(n)) /
                            static_cast<double>(n - 1))
                : 0.0;
    } else {
      pt.sigma_mean = std::nan("");
      pt.sigma_std = std::nan("");
    }
    table.points.push_back(pt);
  }
  return table;
}

// --- output emission -------------------------------------------------------

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void open_or_throw(std::ofstream& out, const std::string& path) {
  out.open(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write to path: " + path);
  }
}

}  // namespace

void write_history_csv(const std::string& path, const RunRecord& record) {
  std::ofstream out;
  open_or_throw(out, path);
  const std::size_t groups =
      !record.steps.empty()
          ? record.steps.front().sigma_sq.size()
          : (!record.epochs.empty() ? record.epochs.front().sigma_sq.size()
                                    : record.final_sigma_sq.size());
  out << "epoch,step,twin1_loss,twin2_loss";
  for (std::size_t g = 0; g < groups; ++g) out << ",sigma_" << g;
  out << "\n";
  auto write_row = [&](int epoch, long step, double l1, double l2,
                       const std::vector<double>& sig_sq) {
    out << epoch << ',' << step << ',' << format_double(l1) << ','
        << format_double(l2);
    for (double s2 : sig_sq) out << ',' << format_double(std::sqrt(s2));
    out << "\n";
  };
  if (!record.steps.empty()) {
    for (const StepLog& s : record.steps) {
      write_row(s.epoch, s.step, s.loss1, s.loss2, s.sigma_sq);
    }
  } else {
    for (const EpochLog& e : record.epochs) {
      write_row(e.epoch, e.end_step, e.mean_loss1, e.mean_loss2, e.sigma_sq);
    }
  }
}

void write_sweep_csv(const std::string& path, const SweepTable& table) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "axis_value,sigma_mean,sigma_std,sigma_theory,n_seeds\n";
  for (const SweepPoint& p : table.points) {
    out << format_double(p.axis_value) << ',' << format_double(p.sigma_mean)
        << ',' << format_double(p.sigma_std) << ','
        << format_double(p.sigma_theory) << ',' << p.n_seeds << "\n";
  }
}

void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunRecord& record) {
  json j;
  j["config"] = config_to_json(cfg);
  j["provenance"]["seed"] = record.seed;
  j["provenance"]["config_hash"] = record.config_hash;
  j["provenance"]["code_version"] = kCodeVersion;
  {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    j["provenance"]["written_at"] = buf;
  }
  j["diverged"] = record.diverged;
  if (record.diverged) j["divergence_info"] = record.divergence_info;
  json metrics = json::object();
  for (const auto& [name, value] : record.metrics) {
    if (std::isfinite(value)) metrics[name] = value;
  }
  j["metrics"] = metrics;
  j["reset_epochs"] = record.reset_epochs;
  j["final_sigma_sq"] = record.final_sigma_sq;
  j["final_weights"] = "weights.csv";
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << "\n";
}

void write_weights_csv(const std::string& path,
                       std::span<const double> weights) {
  std::ofstream out;
  open_or_throw(out, path);
  out << "value\n";
  for (double w : weights) out << format_double(w) << "\n";
}

void write_grid_csv(const std::string& path, std::span<const double> values,
                    std::size_t width) {
  std::ofstream out;
  open_or_throw(out, path);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_double(values[i]);
    out << (((i + 1) % width == 0) ? '\n' : ',');
  }
}

void write_reliability_json(const std::string& path,
                            const ReliabilityReport& report) {
  json j;
  j["bin_edges"] = report.bin_edges;
  j["bin_confidence"] = report.bin_confidence;
  j["bin_accuracy"] = report.bin_accuracy;
  j["bin_count"] = report.bin_count;
  j["ece"] = report.ece;
  std::ofstream out;
  open_or_throw(out, path);
  out << j.dump(2) << "\n";
}

void emit_run_outputs(const std::string& dir, const ExperimentConfig& cfg,
                      const RunRecord& record) {
  const fs::path base = fs::path(dir) / ("seed_" + std::to_string(record.seed));
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory: " +
                             base.string());
  }
  write_history_csv((base / "history.csv").string(), record);
  write_summary_json((base / "summary.json").string(), cfg, record);
  write_weights_csv((base / "weights.csv").string(),
                    record.final_mean_weights);
  for (const auto& [name, values] : record.grids) {
    write_grid_csv((base / (name + ".csv")).string(), values,
                   record.grid_width);
  }
  if (record.has_reliability) {
    write_reliability_json((base / "reliability.json").string(),
                           record.reliability_report);
  }
}

// --- aggregation -----------------------------------------------------------

double t_quantile_975(std::size_t dof) {
  if (dof < 1) {
    throw std::invalid_argument("t_quantile_975: dof must be >= 1");
  }
  static const double table[31] = {
      0,      12.706, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646,
      2.3060, 2.2622, 2.2281, 2.2010, 2.1788, 2.1604, 2.1448, 2.1314,
      2.1199, 2.1098, 2.1009, 2.0930, 2.0860, 2.0796, 2.0739, 2.0687,
      2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423};
  if (dof <= 30) return table[dof];
  // interpolate in 1/dof through (30, 40, 60, 120, inf) anchor points
  struct Anchor { double inv_dof, t; };
  static const Anchor anchors[] = {{1.0 / 30, 2.0423},
                                   {1.0 / 40, 2.0211},
                                   {1.0 / 60, 2.0003},
                                   {1.0 / 120, 1.9799},
                                   {0.0, 1.9600}};
  const double x = 1.0 / static_cast<double>(dof);
  for (std::size_t i = 1; i < std::size(anchors); ++i) {
    if (x >= anchors[i].inv_dof) {
      const double t0 = anchors[i].t, t1 = anchors[i - 1].t;
      const double x0 = anchors[i].inv_dof, x1 = anchors[i - 1].inv_dof;
      return t0 + (t1 - t0) * (x - x0) / (x1 - x0);
    }
  }
  return 1.9600;
}

std::vector<ModeSummary> aggregate_report(const std::string& dir) {
  std::map<std::string, std::map<std::string, std::vector<double>>> by_mode;
  if (!fs::exists(dir)) {
    throw std::runtime_error("report: directory does not exist: " + dir);
  }
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "summary.json") {
      continue;
    }
    std::ifstream in(entry.path());
    json j = json::parse(in);
    if (j.value("diverged", false)) continue;
    const bool twin = j.at("config").at("twin_boot").get<bool>();
    const std::string mode = twin ? "twin-boot" : "standard";
    for (const auto& [name, value] : j.at("metrics").items()) {
      by_mode[mode][name].push_back(value.get<double>());
    }
  }
  std::vector<ModeSummary> out;
  for (const auto& [mode, metrics] : by_mode) {
    ModeSummary ms;
    ms.mode = mode;
    for (const auto& [name, values] : metrics) {
      MetricSummary m;
      m.name = name;
      m.n = values.size();
      double sum = 0.0;
      for (double v : values) sum += v;
      m.mean = sum / static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        const double sd =
            std::sqrt(ss / static_cast<double>(values.size() - 1));
        m.ci95 = t_quantile_975(values.size() - 1) * sd /
                 std::sqrt(static_cast<double>(values.size()));
      }
      ms.metrics.push_back(std::move(m));
    }
    out.push_back(std::move(ms));
  }
  return out;
}

std::string render_report(const std::vector<ModeSummary>& report) {
  std::ostringstream out;
  for (const ModeSummary& ms : report) {
    out << "mode: " << ms.mode << "\n";
    for (const MetricSummary& m : ms.metrics) {
      out << "  " << m.name << " = " << format_double(m.mean) << " +/- "
          << format_double(m.ci95) << " (95% CI, n=" << m.n << ")\n";
    }
  }
  return out.str();
}

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<std::uint64_t> out;
  if (spec.empty()) {
    throw std::invalid_argument("empty seed specification");
  }
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo =
        parse_number<std::uint64_t>("seeds", spec.substr(0, dots));
    const std::uint64_t hi =
        parse_number<std::uint64_t>("seeds", spec.substr(dots + 2));
    if (hi < lo) {
      throw std::invalid_argument("seed range '" + spec + "' is descending");
    }
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_number<std::uint64_t>("seeds", item));
  }
  if (out.empty()) {
    throw std::invalid_argument("no seeds in specification '" + spec + "'");
  }
  return out;
}

}  // namespace twinboot
