#ifndef TWINBOOT_ENGINE_HPP
#define TWINBOOT_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "twinboot/core.hpp"
#include "twinboot/data.hpp"
#include "twinboot/optimizer.hpp"
#include "twinboot/problems.hpp"
#include "twinboot/rng.hpp"

namespace twinboot {

/// When resets fire, relative to completed 1-based epochs. A schedule never
/// fires before the first completed epoch and at most once per boundary.
struct ResetSchedule {
  enum class Kind { none, every_k, explicit_epochs, adaptive };
  Kind kind = Kind::none;
  int every = 0;                 // every_k
  std::vector<int> epochs;       // explicit_epochs
  int k0 = 0;                    // adaptive: first reset epoch
  double growth = 2.0;           // adaptive: interval multiplier per reset

  static ResetSchedule none_schedule() { return ResetSchedule{}; }
  static ResetSchedule every_k_epochs(int k);
  static ResetSchedule at_epochs(std::vector<int> epochs);
  static ResetSchedule adaptive(int k0, double growth = 2.0);
};

/// Mutable schedule position, part of the twin state.
class ResetCursor {
 public:
  ResetCursor() = default;
  explicit ResetCursor(const ResetSchedule& schedule);
  /// True when a reset is due after completed epoch e (1-based); advances
  /// the adaptive position when it fires.
  bool fires_after_epoch(int e);

 private:
  ResetSchedule schedule_;
  double next_ = 0.0;
  double interval_ = 0.0;
};

enum class UpdateRule {
  center,   // gradient taken at the sampled weights, applied to the center
  sampled,  // the sampled weights are updated and adopted as the new center
};

/// Everything one twin pair carries during training.
struct TwinState {
  ParamVector w1, w2;
  Optimizer opt1, opt2;
  ParamGrouping grouping;
  SigmaEstimate sigma;
  RngStream forward1{0, streams::forward_twin1};
  RngStream forward2{0, streams::forward_twin2};
  RngStream reset1{0, streams::reset_twin1};
  RngStream reset2{0, streams::reset_twin2};
  long step = 0;
  int epoch = 0;
  bool sample_weights = true;
  UpdateRule update_rule = UpdateRule::center;
  ParamVector sample_scratch;  // reused buffer for the sampled weights
};

TwinState make_twin_state(const ParamVector& w0, ParamGrouping grouping,
                          const Optimizer& optimizer, std::uint64_t seed);

struct StepResult {
  double loss1 = 0.0;
  double loss2 = 0.0;
};

/// One paired update: sample weights around each twin, evaluate loss and
/// gradient on that twin's batch at the sampled point, update, then refresh
/// sigma from the new (w1, w2).
StepResult train_step(TwinState& state, std::span<const std::size_t> batch1,
                      std::span<const std::size_t> batch2,
                      const Problem& problem);

/// Redraw both twins i.i.d. around their group-wise mean with scale sigma_g,
/// then recompute sigma from the redrawn weights. Bootstrap data untouched.
void mean_reset(TwinState& state);

/// Stream ids used by a run; swapping twin 1 and twin 2 here mirrors the
/// whole trajectory.
struct TwinStreamIds {
  std::uint64_t bootstrap1 = streams::bootstrap_twin1;
  std::uint64_t bootstrap2 = streams::bootstrap_twin2;
  std::uint64_t shuffle1 = streams::shuffle_twin1;
  std::uint64_t shuffle2 = streams::shuffle_twin2;
  std::uint64_t forward1 = streams::forward_twin1;
  std::uint64_t forward2 = streams::forward_twin2;
  std::uint64_t reset1 = streams::reset_twin1;
  std::uint64_t reset2 = streams::reset_twin2;

  TwinStreamIds swapped() const;
};

struct TrainConfig {
  int epochs = 1;
  std::size_t batch_size = 0;  // 0 = full batch
  OptimizerKind optimizer = OptimizerKind::sgd;
  double learning_rate = 0.01;
  LrSchedule lr_schedule = LrSchedule::constant_lr();
  AdamParams adam;
  std::optional<GroupingKind> grouping;  // defaults to the problem's choice
  ResetSchedule reset = ResetSchedule::none_schedule();
  bool twin_boot = true;       // false: plain single-model baseline
  bool sample_weights = true;  // training-time weight sampling
  bool use_bootstrap = true;   // false: both twins train on the original data
  UpdateRule update_rule = UpdateRule::center;
  std::uint64_t seed = 0;
  TwinStreamIds stream_ids;
  bool log_steps = false;
  int log_stride = 1;  // log every k-th step when log_steps
};

struct StepLog {
  int epoch;  // 1-based
  long step;  // global optimizer step index, 0-based
  double loss1;
  double loss2;
  std::vector<double> sigma_sq;
};

struct EpochLog {
  int epoch;      // 1-based
  long end_step;  // global index of the epoch's last optimizer step
  double mean_loss1;
  double mean_loss2;
  double lr;
  std::vector<double> sigma_sq;  // at epoch end, after any reset
};

struct TrainResult {
  TwinState state;
  std::vector<EpochLog> epochs;
  std::vector<StepLog> steps;
  std::vector<int> reset_epochs;
  double wall_seconds = 0.0;

  /// sqrt of the average final per-group sigma^2, weighted by group size
  /// (equals the whole-vector sigma_avg of Eq-style pooling).
  double final_sigma_avg() const;
};

/// Run the full training loop: E epochs of paired batches, per-epoch
/// learning-rate schedule, scheduled mean-resets. With twin_boot = false a
/// single model is trained on the original dataset with no sampling or
/// resets (the "standard" baseline); the returned state then has w1 == w2.
TrainResult run_training(const Problem& problem, const TrainConfig& config);

}  // namespace twinboot

#endif
