#ifndef TWINBOOT_PROBLEMS_HPP
#define TWINBOOT_PROBLEMS_HPP

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "twinboot/core.hpp"
#include "twinboot/data.hpp"
#include "twinboot/rng.hpp"

namespace twinboot {

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

enum class GroupingKind { whole, layers, units, patches };

GroupingKind grouping_kind_from_string(const std::string& s);
std::string to_string(GroupingKind k);

/// A training problem: data indexed 0..data_count()-1, a loss/gradient
/// callback over index batches, and the parameter groupings it supports.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t param_count() const = 0;
  virtual std::size_t data_count() const = 0;
  virtual ParamVector initial_params() const = 0;

  /// Loss and gradient at w over the given batch of data indices.
  virtual LossGrad loss_and_grad(const ParamVector& w,
                                 std::span<const std::size_t> batch) const = 0;

  virtual ParamGrouping grouping(GroupingKind kind) const;
  virtual GroupingKind default_grouping() const { return GroupingKind::whole; }

  /// Deterministic summary metrics at the given weights (problem-specific).
  virtual std::vector<std::pair<std::string, double>> final_metrics(
      const ParamVector& w) const {
    (void)w;
    return {};
  }
};

/// Estimate the mean of a 2D Gaussian cloud; loss is the mean squared
/// distance from w to the batch points. Convex, minimized at the batch mean.
class GaussianMeanProblem : public Problem {
 public:
  GaussianMeanProblem(std::size_t n, double variance_per_dim,
                      std::array<double, 2> center, std::uint64_t seed);
  /// Explicit point cloud (tests, external data).
  explicit GaussianMeanProblem(std::vector<std::array<double, 2>> points);

  std::size_t param_count() const override { return 2; }
  std::size_t data_count() const override { return points_.size(); }
  ParamVector initial_params() const override { return ParamVector(2, 0.0); }
  LossGrad loss_and_grad(const ParamVector& w,
                         std::span<const std::size_t> batch) const override;
  std::vector<std::pair<std::string, double>> final_metrics(
      const ParamVector& w) const override;

  const std::vector<std::array<double, 2>>& points() const { return points_; }
  double data_sigma() const { return data_sigma_; }

 private:
  std::vector<std::array<double, 2>> points_;
  double data_sigma_;
  std::array<double, 2> center_;
};

/// Noiseless two-well potential value at w.
double two_basin_potential(std::span<const double> w,
                           std::array<double, 2> mu1, std::array<double, 2> mu2,
                           double well_width);
/// Analytic gradient of the noiseless two-well potential.
std::array<double, 2> two_basin_potential_grad(std::span<const double> w,
                                               std::array<double, 2> mu1,
                                               std::array<double, 2> mu2,
                                               double well_width);

/// Symmetric two-well landscape with per-sample data offsets: sample i
/// contributes the potential evaluated at (w - offset_i), so dataset noise
/// shifts the effective minimum exactly as in the Gaussian case.
class TwoBasinProblem : public Problem {
 public:
  TwoBasinProblem(std::array<double, 2> mu1, std::array<double, 2> mu2,
                  double well_width, std::size_t n, double data_noise,
                  std::uint64_t seed);

  std::size_t param_count() const override { return 2; }
  std::size_t data_count() const override { return offsets_.size(); }
  ParamVector initial_params() const override;
  LossGrad loss_and_grad(const ParamVector& w,
                         std::span<const std::size_t> batch) const override;
  std::vector<std::pair<std::string, double>> final_metrics(
      const ParamVector& w) const override;

  std::array<double, 2> mu1() const { return mu1_; }
  std::array<double, 2> mu2() const { return mu2_; }
  double well_width() const { return width_; }

 private:
  std::array<double, 2> mu1_;
  std::array<double, 2> mu2_;
  double width_;
  std::vector<std::array<double, 2>> offsets_;
};

enum class SeismicNonlinearity { tanh, cubic };

struct SeismicConfig {
  std::size_t grid = 30;           // field is grid x grid, P = grid^2
  std::size_t measurements = 4096;  // rows of the measurement operator
  double beta = 1.0;
  double noise_sigma = 0.01;
  double kernel_width = 2.0;  // grid cells
  double smooth_width = 3.0;  // ground-truth field smoothing, grid cells
  double test_fraction = 0.2;
  SeismicNonlinearity nonlinearity = SeismicNonlinearity::tanh;
  std::size_t patch = 3;  // sigma is estimated on patch x patch blocks
};

/// Nonlinear inverse problem: recover a smooth field v on a grid from
/// y = K f(v) + noise, where K rows are L2-normalized 2D Gaussian kernels at
/// random centers and f is an element-wise nonlinearity.
class SeismicProblem : public Problem {
 public:
  SeismicProblem(std::uint64_t seed, const SeismicConfig& cfg = SeismicConfig{});

  std::size_t param_count() const override { return truth_.size(); }
  std::size_t data_count() const override { return train_rows_.size(); }
  ParamVector initial_params() const override {
    return ParamVector(truth_.size(), 0.0);
  }
  LossGrad loss_and_grad(const ParamVector& v,
                         std::span<const std::size_t> batch) const override;
  ParamGrouping grouping(GroupingKind kind) const override;
  GroupingKind default_grouping() const override {
    return GroupingKind::patches;
  }
  std::vector<std::pair<std::string, double>> final_metrics(
      const ParamVector& v) const override;

  double train_loss(const ParamVector& v) const;
  double test_loss(const ParamVector& v) const;
  double recon_mse(const ParamVector& v) const;

  const SeismicConfig& config() const { return cfg_; }
  std::span<const double> truth() const { return truth_; }
  std::span<const double> kernel_row(std::size_t m) const;
  double observation(std::size_t m) const { return y_[m]; }
  std::size_t train_row_id(std::size_t i) const { return train_rows_[i]; }
  std::size_t test_row_count() const { return test_rows_.size(); }

  /// |v - truth| per cell, row-major.
  std::vector<double> abs_error_map(const ParamVector& v) const;

 private:
  double loss_over_rows(const ParamVector& v,
                        std::span<const std::size_t> row_ids) const;

  SeismicConfig cfg_;
  std::vector<double> truth_;       // P
  std::vector<double> op_;          // M x P, row-major
  std::vector<double> y_;           // M
  std::vector<std::size_t> train_rows_;
  std::vector<std::size_t> test_rows_;
};

struct MlpConfig {
  std::vector<std::size_t> layer_sizes = {2, 32, 32, 2};
  std::size_t train_points = 500;
  std::size_t val_points = 500;
  double spiral_noise = 0.25;
  double spiral_turns = 1.0;
};

/// Small tanh MLP with softmax cross-entropy on a synthetic two-spirals
/// task; gradients are computed by hand-written backpropagation.
class MlpProblem : public Problem {
 public:
  MlpProblem(std::uint64_t seed, const MlpConfig& cfg = MlpConfig{});

  std::size_t param_count() const override { return param_count_; }
  std::size_t data_count() const override { return train_.inputs.size(); }
  ParamVector initial_params() const override { return init_; }
  LossGrad loss_and_grad(const ParamVector& w,
                         std::span<const std::size_t> batch) const override;
  ParamGrouping grouping(GroupingKind kind) const override;
  GroupingKind default_grouping() const override {
    return GroupingKind::layers;
  }
  std::vector<std::pair<std::string, double>> final_metrics(
      const ParamVector& w) const override;

  std::vector<double> predict_probs(const ParamVector& w,
                                    std::span<const double> x) const;
  double accuracy(const ParamVector& w, const Dataset& split) const;

  const Dataset& train_set() const { return train_; }
  const Dataset& val_set() const { return val_; }
  const MlpConfig& config() const { return cfg_; }
  std::size_t class_count() const { return cfg_.layer_sizes.back(); }

 private:
  MlpConfig cfg_;
  Dataset train_;
  Dataset val_;
  ParamVector init_;
  std::size_t param_count_ = 0;
};

/// Central finite-difference gradient of an arbitrary loss callback;
/// the reference every analytic gradient is checked against.
ParamVector finite_difference_grad(
    const Problem& problem, const ParamVector& w,
    std::span<const std::size_t> batch, double h = 1e-6);

}  // namespace twinboot

#endif
