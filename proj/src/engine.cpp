#include "twinboot/engine.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace twinboot {

ResetSchedule ResetSchedule::every_k_epochs(int k) {
  if (k < 1) throw std::invalid_argument("reset every-K: K must be >= 1");
  ResetSchedule s;
  s.kind = Kind::every_k;
  s.every = k;
  return s;
}

ResetSchedule ResetSchedule::at_epochs(std::vector<int> epochs) {
  for (int e : epochs) {
    if (e < 1) throw std::invalid_argument("reset epochs must be >= 1");
  }
  ResetSchedule s;
  s.kind = Kind::explicit_epochs;
  s.epochs = std::move(epochs);
  return s;
}

ResetSchedule ResetSchedule::adaptive(int k0, double growth) {
  if (k0 < 1) throw std::invalid_argument("adaptive reset: K0 must be >= 1");
  if (!(growth >= 1.0)) {
    throw std::invalid_argument("adaptive reset: growth must be >= 1");
  }
  ResetSchedule s;
  s.kind = Kind::adaptive;
  s.k0 = k0;
  s.growth = growth;
  return s;
}

ResetCursor::ResetCursor(const ResetSchedule& schedule) : schedule_(schedule) {
  if (schedule.kind == ResetSchedule::Kind::adaptive) {
    next_ = static_cast<double>(schedule.k0);
    interval_ = static_cast<double>(schedule.k0);
  }
}

bool ResetCursor::fires_after_epoch(int e) {
  if (e < 1) return false;
  switch (schedule_.kind) {
    case ResetSchedule::Kind::none:
      return false;
    case ResetSchedule::Kind::every_k:
      return e % schedule_.every == 0;
    case ResetSchedule::Kind::explicit_epochs:
      for (int m : schedule_.epochs) {
        if (m == e) return true;
      }
      return false;
    case ResetSchedule::Kind::adaptive:
      if (static_cast<double>(e) >= next_) {
        interval_ *= schedule_.growth;
        next_ += interval_;
        return true;
      }
      return false;
  }
  return false;
}

TwinStreamIds TwinStreamIds::swapped() const {
  TwinStreamIds s;
  s.bootstrap1 = bootstrap2;
  s.bootstrap2 = bootstrap1;
  s.shuffle1 = shuffle2;
  s.shuffle2 = shuffle1;
  s.forward1 = forward2;
  s.forward2 = forward1;
  s.reset1 = reset2;
  s.reset2 = reset1;
  return s;
}

TwinState make_twin_state(const ParamVector& w0, ParamGrouping grouping,
                          const Optimizer& optimizer, std::uint64_t seed) {
  TwinState st;
  st.w1 = w0;
  st.w2 = w0;
  st.opt1 = optimizer;
  st.opt2 = optimizer;
  st.grouping = std::move(grouping);
  st.sigma = SigmaEstimate::zeros(st.grouping.group_count());
  st.forward1 = RngStream(seed, streams::forward_twin1);
  st.forward2 = RngStream(seed, streams::forward_twin2);
  st.reset1 = RngStream(seed, streams::reset_twin1);
  st.reset2 = RngStream(seed, streams::reset_twin2);
  return st;
}

namespace {

void check_finite(const TwinState& state, double loss, const ParamVector& grad,
                  int twin) {
  if (!std::isfinite(loss)) {
    throw DivergedError("twin " + std::to_string(twin) +
                            " produced non-finite loss at step " +
                            std::to_string(state.step),
                        state.step, twin, -1);
  }
  const long bad = grad.first_nonfinite();
  if (bad >= 0) {
    const long group = state.grouping.group_of(static_cast<std::size_t>(bad));
    throw DivergedError(
        "twin " + std::to_string(twin) + " produced non-finite gradient " +
            "(entry " + std::to_string(bad) + ", group " +
            std::to_string(group) + ") at step " + std::to_string(state.step),
        state.step, twin, group);
  }
}

}  // namespace

StepResult train_step(TwinState& state, std::span<const std::size_t> batch1,
                      std::span<const std::size_t> batch2,
                      const Problem& problem) {
  StepResult res;
  for (int twin = 1; twin <= 2; ++twin) {
    ParamVector& w = twin == 1 ? state.w1 : state.w2;
    Optimizer& opt = twin == 1 ? state.opt1 : state.opt2;
    RngStream& forward = twin == 1 ? state.forward1 : state.forward2;
    const std::span<const std::size_t> batch = twin == 1 ? batch1 : batch2;

    LossGrad lg;
    if (state.sample_weights) {
      ParamVector& sampled = state.sample_scratch;
      sample_around_into(w, state.sigma, state.grouping, forward, sampled);
      lg = problem.loss_and_grad(sampled, batch);
      check_finite(state, lg.loss, lg.grad, twin);
      if (state.update_rule == UpdateRule::sampled) {
        opt.step(sampled, lg.grad);
        std::swap(w, sampled);
      } else {
        opt.step(w, lg.grad);
      }
    } else {
      lg = problem.loss_and_grad(w, batch);
      check_finite(state, lg.loss, lg.grad, twin);
      opt.step(w, lg.grad);
    }
    (twin == 1 ? res.loss1 : res.loss2) = lg.loss;
  }
  estimate_sigma_into(state.w1, state.w2, state.grouping, state.sigma);
  ++state.step;
  return res;
}

void mean_reset(TwinState& state) {
  const std::size_t p = state.w1.size();
  std::vector<double> mean(p);
  std::vector<double> scale(state.grouping.group_count());
  for (std::size_t g = 0; g < scale.size(); ++g) {
    scale[g] = std::sqrt(state.sigma.sigma_sq[g]);
  }
  for (std::size_t i = 0; i < p; ++i) {
    mean[i] = 0.5 * (state.w1[i] + state.w2[i]);
  }
  for (std::size_t i = 0; i < p; ++i) {
    const double s = scale[state.grouping.group_of(i)];
    state.w1[i] = mean[i] + s * state.reset1.normal();
  }
  for (std::size_t i = 0; i < p; ++i) {
    const double s = scale[state.grouping.group_of(i)];
    state.w2[i] = mean[i] + s * state.reset2.normal();
  }
  state.sigma = estimate_sigma(state.w1, state.w2, state.grouping);
}

double TrainResult::final_sigma_avg() const {
  const SigmaEstimate& s = state.sigma;
  double acc = 0.0;
  std::size_t total = 0;
  for (std::size_t g = 0; g < s.sigma_sq.size(); ++g) {
    const std::size_t d = state.grouping.group_size(g);
    acc += s.sigma_sq[g] * static_cast<double>(d);
    total += d;
  }
  return std::sqrt(acc / static_cast<double>(total));
}

namespace {

TrainResult run_baseline(const Problem& problem, const TrainConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const GroupingKind gk = cfg.grouping.value_or(problem.default_grouping());
  Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.lr_schedule, cfg.adam);
  TwinState st = make_twin_state(problem.initial_params(),
                                 problem.grouping(gk), opt, cfg.seed);
  st.sample_weights = false;

  const std::size_t n = problem.data_count();
  const std::size_t batch = cfg.batch_size == 0 ? n : cfg.batch_size;
  BootstrapDataset plain = identity_resample(n);
  PairedBatchIterator it(plain, plain, batch,
                         RngStream(cfg.seed, cfg.stream_ids.shuffle1),
                         RngStream(cfg.seed, cfg.stream_ids.shuffle1));

  TrainResult out;
  std::vector<std::size_t> b1, b2;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    st.opt1.apply_schedule(epoch - 1);
    it.begin_epoch();
    double loss_sum = 0.0;
    std::size_t steps_in_epoch = 0;
    while (it.next(b1, b2)) {
      LossGrad lg = problem.loss_and_grad(st.w1, b1);
      check_finite(st, lg.loss, lg.grad, 1);
      st.opt1.step(st.w1, lg.grad);
      loss_sum += lg.loss;
      if (cfg.log_steps && st.step % cfg.log_stride == 0) {
        out.steps.push_back(
            {epoch, st.step, lg.loss, lg.loss, st.sigma.sigma_sq});
      }
      ++st.step;
      ++steps_in_epoch;
    }
    st.epoch = epoch;
    const double mean_loss = loss_sum / static_cast<double>(steps_in_epoch);
    out.epochs.push_back({epoch, st.step - 1, mean_loss, mean_loss,
                          st.opt1.learning_rate(), st.sigma.sigma_sq});
  }
  st.w2 = st.w1;
  out.state = std::move(st);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace

TrainResult run_training(const Problem& problem, const TrainConfig& cfg) {
  if (cfg.epochs < 1) {
    throw std::invalid_argument("run_training: epochs must be >= 1");
  }
  if (!cfg.twin_boot) return run_baseline(problem, cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const GroupingKind gk = cfg.grouping.value_or(problem.default_grouping());
  Optimizer opt(cfg.optimizer, cfg.learning_rate, cfg.lr_schedule, cfg.adam);
  TwinState st = make_twin_state(problem.initial_params(),
                                 problem.grouping(gk), opt, cfg.seed);
  st.sample_weights = cfg.sample_weights;
  st.update_rule = cfg.update_rule;
  st.forward1 = RngStream(cfg.seed, cfg.stream_ids.forward1);
  st.forward2 = RngStream(cfg.seed, cfg.stream_ids.forward2);
  st.reset1 = RngStream(cfg.seed, cfg.stream_ids.reset1);
  st.reset2 = RngStream(cfg.seed, cfg.stream_ids.reset2);

  const std::size_t n = problem.data_count();
  const std::size_t batch = cfg.batch_size == 0 ? n : cfg.batch_size;

  BootstrapDataset d1, d2;
  if (cfg.use_bootstrap) {
    RngStream boot1(cfg.seed, cfg.stream_ids.bootstrap1);
    RngStream boot2(cfg.seed, cfg.stream_ids.bootstrap2);
    d1 = make_bootstrap(n, boot1);
    d2 = make_bootstrap(n, boot2);
  } else {
    d1 = identity_resample(n);
    d2 = identity_resample(n);
  }
  PairedBatchIterator it(d1, d2, batch,
                         RngStream(cfg.seed, cfg.stream_ids.shuffle1),
                         RngStream(cfg.seed, cfg.stream_ids.shuffle2));

  ResetCursor reset_cursor(cfg.reset);
  TrainResult out;
  std::vector<std::size_t> b1, b2;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    st.opt1.apply_schedule(epoch - 1);
    st.opt2.apply_schedule(epoch - 1);
    it.begin_epoch();
    double sum1 = 0.0, sum2 = 0.0;
    std::size_t steps_in_epoch = 0;
    while (it.next(b1, b2)) {
      const long step_index = st.step;
      const StepResult res = train_step(st, b1, b2, problem);
      sum1 += res.loss1;
      sum2 += res.loss2;
      ++steps_in_epoch;
      if (cfg.log_steps && step_index % cfg.log_stride == 0) {
        out.steps.push_back(
            {epoch, step_index, res.loss1, res.loss2, st.sigma.sigma_sq});
      }
    }
    st.epoch = epoch;
    if (reset_cursor.fires_after_epoch(epoch)) {
      mean_reset(st);
      out.reset_epochs.push_back(epoch);
    }
    const double inv = 1.0 / static_cast<double>(steps_in_epoch);
    out.epochs.push_back({epoch, st.step - 1, sum1 * inv, sum2 * inv,
                          st.opt1.learning_rate(), st.sigma.sigma_sq});
  }
  out.state = std::move(st);
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace twinboot
