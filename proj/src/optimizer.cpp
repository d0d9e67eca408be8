#include "twinboot/optimizer.hpp"

#include <cmath>

namespace twinboot {

double LrSchedule::at_epoch(double lr0, int epoch) const {
  switch (kind) {
    case LrScheduleKind::constant:
      return lr0;
    case LrScheduleKind::exponential:
      return lr0 * std::pow(rate, epoch);
    case LrScheduleKind::step_decay: {
      int drops = 0;
      if (!milestones.empty()) {
        for (int m : milestones) {
          if (epoch >= m) ++drops;
        }
      } else if (every > 0) {
        drops = epoch / every;
      }
      return lr0 * std::pow(factor, drops);
    }
  }
  return lr0;
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate,
                     LrSchedule schedule, AdamParams adam)
    : kind_(kind),
      lr0_(learning_rate),
      lr_(learning_rate),
      schedule_(schedule),
      adam_(adam) {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("Optimizer: learning rate must be > 0");
  }
}

void Optimizer::apply_schedule(int epoch) {
  if (epoch < 0) {
    throw std::invalid_argument("apply_schedule: epoch must be >= 0");
  }
  lr_ = schedule_.at_epoch(lr0_, epoch);
  if (!(lr_ > 0.0)) {
    throw std::invalid_argument("apply_schedule: schedule produced lr <= 0");
  }
}

void Optimizer::step(ParamVector& w, const ParamVector& g) {
  if (w.size() != g.size()) {
    throw std::invalid_argument("Optimizer::step: w/g length mismatch");
  }
  const long bad = g.first_nonfinite();
  if (bad >= 0) {
    throw DivergedError("non-finite gradient entry " + std::to_string(bad) +
                            " at optimizer step " + std::to_string(t_),
                        t_, 0, -1);
  }
  ++t_;
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] -= lr_ * g[i];
    }
    return;
  }
  // Adam, bias-corrected.
  if (m_.size() != w.size()) {
    m_.assign(w.size(), 0.0);
    v_.assign(w.size(), 0.0);
  }
  const double b1 = adam_.beta1;
  const double b2 = adam_.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < w.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * g[i] * g[i];
    const double mhat = m_[i] / corr1;
    const double vhat = v_[i] / corr2;
    w[i] -= lr_ * mhat / (std::sqrt(vhat) + adam_.epsilon);
  }
}

}  // namespace twinboot
