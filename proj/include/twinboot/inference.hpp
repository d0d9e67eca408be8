#ifndef TWINBOOT_INFERENCE_HPP
#define TWINBOOT_INFERENCE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "twinboot/core.hpp"
#include "twinboot/rng.hpp"

namespace twinboot {

/// Model forward pass used at inference time: weights + input -> outputs
/// (class probabilities for classification).
using PredictFn = std::function<std::vector<double>(
    const ParamVector&, std::span<const double>)>;

/// f(x; (w1 + w2) / 2).
std::vector<double> predict_deterministic(const ParamVector& w1,
                                          const ParamVector& w2,
                                          const PredictFn& f,
                                          std::span<const double> x);

enum class McGranularity {
  per_group,     // sample each group with its own sigma_g
  whole_vector,  // single sigma_avg^2 = ||w1 - w2||^2 / (2P)
};

struct McInferenceConfig {
  std::size_t samples = 64;
  McGranularity granularity = McGranularity::per_group;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = streams::mc_inference;
};

struct McPrediction {
  std::vector<double> mean;
  std::vector<double> variance;  // per-output sample variance
  bool degenerate_variance = false;  // true when samples == 1
};

/// Monte Carlo inference: draw S weight vectors around the twin mean and
/// average the predictions; classification callers pass a probability-
/// producing f so the mean is the averaged class distribution.
McPrediction predict_mc(const ParamVector& w1, const ParamVector& w2,
                        const ParamGrouping& grouping, const PredictFn& f,
                        std::span<const double> x,
                        const McInferenceConfig& cfg);

struct ReliabilityReport {
  std::vector<double> bin_edges;       // bins + 1 entries over [0, 1]
  std::vector<double> bin_confidence;  // mean top-label confidence per bin
  std::vector<double> bin_accuracy;    // empirical accuracy per bin
  std::vector<std::size_t> bin_count;
  double ece = 0.0;
};

/// Top-label binned reliability with equal-width confidence bins and
/// ECE = sum_b (n_b / N) |acc_b - conf_b|.
ReliabilityReport reliability(
    const std::vector<std::vector<double>>& probabilities,
    std::span<const std::size_t> labels, std::size_t bins = 10);

struct CorrelationResult {
  double spearman = 0.0;
  double pearson = 0.0;
  bool defined = false;  // false when either input is constant
};

/// Rank and linear correlation between two equally-shaped value maps
/// (e.g., per-cell sigma vs |reconstruction - truth|).
CorrelationResult sigma_error_correlation(std::span<const double> sigma_map,
                                          std::span<const double> error_map);

}  // namespace twinboot

#endif
