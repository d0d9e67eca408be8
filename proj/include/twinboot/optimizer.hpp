#ifndef TWINBOOT_OPTIMIZER_HPP
#define TWINBOOT_OPTIMIZER_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "twinboot/core.hpp"

namespace twinboot {

/// Raised when a loss or gradient stops being finite. Carries enough context
/// to point at the failing step.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(std::string what, long step, int twin, long group)
      : std::runtime_error(std::move(what)),
        step(step),
        twin(twin),
        group(group) {}
  long step;   // optimizer step index
  int twin;    // 1 or 2, 0 when not twin-specific
  long group;  // offending parameter group, -1 when not applicable
};

enum class LrScheduleKind { constant, step_decay, exponential };

/// Learning-rate schedule applied per epoch. step_decay multiplies by
/// `factor` either every `every` epochs or at the explicit `milestones`.
struct LrSchedule {
  LrScheduleKind kind = LrScheduleKind::constant;
  double factor = 0.5;
  int every = 0;
  std::vector<int> milestones;
  double rate = 1.0;  // exponential: lr0 * rate^epoch

  double at_epoch(double lr0, int epoch) const;

  static LrSchedule constant_lr() { return LrSchedule{}; }
  static LrSchedule exponential(double rate) {
    LrSchedule s;
    s.kind = LrScheduleKind::exponential;
    s.rate = rate;
    return s;
  }
  static LrSchedule step_every(double factor, int every) {
    LrSchedule s;
    s.kind = LrScheduleKind::step_decay;
    s.factor = factor;
    s.every = every;
    return s;
  }
  static LrSchedule step_at(double factor, std::vector<int> milestones) {
    LrSchedule s;
    s.kind = LrScheduleKind::step_decay;
    s.factor = factor;
    s.milestones = std::move(milestones);
    return s;
  }
};

enum class OptimizerKind { sgd, adam };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order optimizer state for one model. Pure in the sense that two
/// states fed identical (w, g) sequences produce identical trajectories.
class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerKind kind, double learning_rate,
            LrSchedule schedule = LrSchedule::constant_lr(),
            AdamParams adam = AdamParams{});

  /// In-place parameter update from gradient g evaluated for this step.
  /// Throws DivergedError on non-finite gradient entries.
  void step(ParamVector& w, const ParamVector& g);

  /// Sets the learning rate for the given epoch per the declared schedule.
  void apply_schedule(int epoch);

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return lr_; }
  double base_learning_rate() const { return lr0_; }
  long step_count() const { return t_; }
  const AdamParams& adam_params() const { return adam_; }

 private:
  OptimizerKind kind_ = OptimizerKind::sgd;
  double lr0_ = 0.01;
  double lr_ = 0.01;
  LrSchedule schedule_;
  AdamParams adam_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

}  // namespace twinboot

#endif
