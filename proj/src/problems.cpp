#include "twinboot/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twinboot {

GroupingKind grouping_kind_from_string(const std::string& s) {
  if (s == "whole") return GroupingKind::whole;
  if (s == "layers") return GroupingKind::layers;
  if (s == "units") return GroupingKind::units;
  if (s == "patches") return GroupingKind::patches;
  throw std::invalid_argument("unknown grouping '" + s +
                              "' (whole|layers|units|patches)");
}

std::string to_string(GroupingKind k) {
  switch (k) {
    case GroupingKind::whole: return "whole";
    case GroupingKind::layers: return "layers";
    case GroupingKind::units: return "units";
    case GroupingKind::patches: return "patches";
  }
  return "?";
}

ParamGrouping Problem::grouping(GroupingKind kind) const {
  if (kind == GroupingKind::whole) return group_whole(param_count());
  throw std::invalid_argument("problem does not support grouping '" +
                              to_string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Gaussian mean estimation

GaussianMeanProblem::GaussianMeanProblem(std::size_t n, double variance_per_dim,
                                         std::array<double, 2> center,
                                         std::uint64_t seed)
    : data_sigma_(std::sqrt(variance_per_dim)), center_(center) {
  if (n == 0) throw std::invalid_argument("GaussianMeanProblem: n must be >= 1");
  if (variance_per_dim < 0.0) {
    throw std::invalid_argument("GaussianMeanProblem: negative variance");
  }
  RngStream rng(seed, streams::data_noise);
  points_.resize(n);
  for (auto& p : points_) {
    p[0] = center[0] + data_sigma_ * rng.normal();
    p[1] = center[1] + data_sigma_ * rng.normal();
  }
}

GaussianMeanProblem::GaussianMeanProblem(
    std::vector<std::array<double, 2>> points)
    : points_(std::move(points)), data_sigma_(0.0), center_{0.0, 0.0} {
  if (points_.empty()) {
    throw std::invalid_argument("GaussianMeanProblem: no points");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& p : points_) {
    mx += p[0];
    my += p[1];
  }
  center_ = {mx / static_cast<double>(points_.size()),
             my / static_cast<double>(points_.size())};
}

LossGrad GaussianMeanProblem::loss_and_grad(
    const ParamVector& w, std::span<const std::size_t> batch) const {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  double loss = 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t idx : batch) {
    const auto& p = points_[idx];
    const double dx = w[0] - p[0];
    const double dy = w[1] - p[1];
    loss += dx * dx + dy * dy;
    mx += p[0];
    my += p[1];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  LossGrad out;
  out.loss = loss * inv;
  out.grad = ParamVector(2);
  out.grad[0] = 2.0 * (w[0] - mx * inv);
  out.grad[1] = 2.0 * (w[1] - my * inv);
  return out;
}

std::vector<std::pair<std::string, double>> GaussianMeanProblem::final_metrics(
    const ParamVector& w) const {
  const double dx = w[0] - center_[0];
  const double dy = w[1] - center_[1];
  return {{"distance_to_center", std::sqrt(dx * dx + dy * dy)}};
}

// ---------------------------------------------------------------------------
// Two-basin landscape

double two_basin_potential(std::span<const double> w, std::array<double, 2> mu1,
                           std::array<double, 2> mu2, double well_width) {
  const double s2 = well_width * well_width;
  const double d1x = w[0] - mu1[0], d1y = w[1] - mu1[1];
  const double d2x = w[0] - mu2[0], d2y = w[1] - mu2[1];
  return -std::exp(-(d1x * d1x + d1y * d1y) / (2.0 * s2)) -
         std::exp(-(d2x * d2x + d2y * d2y) / (2.0 * s2));
}

std::array<double, 2> two_basin_potential_grad(std::span<const double> w,
                                               std::array<double, 2> mu1,
                                               std::array<double, 2> mu2,
                                               double well_width) {
  const double s2 = well_width * well_width;
  const double d1x = w[0] - mu1[0], d1y = w[1] - mu1[1];
  const double d2x = w[0] - mu2[0], d2y = w[1] - mu2[1];
  const double e1 = std::exp(-(d1x * d1x + d1y * d1y) / (2.0 * s2));
  const double e2 = std::exp(-(d2x * d2x + d2y * d2y) / (2.0 * s2));
  return {(e1 * d1x + e2 * d2x) / s2, (e1 * d1y + e2 * d2y) / s2};
}

TwoBasinProblem::TwoBasinProblem(std::array<double, 2> mu1,
                                 std::array<double, 2> mu2, double well_width,
                                 std::size_t n, double data_noise,
                                 std::uint64_t seed)
    : mu1_(mu1), mu2_(mu2), width_(well_width) {
  if (!(well_width > 0.0)) {
    throw std::invalid_argument("TwoBasinProblem: well width must be > 0");
  }
  if (n == 0) throw std::invalid_argument("TwoBasinProblem: n must be >= 1");
  RngStream rng(seed, streams::data_noise);
  offsets_.resize(n);
  for (auto& d : offsets_) {
    d[0] = data_noise * rng.normal();
    d[1] = data_noise * rng.normal();
  }
}

ParamVector TwoBasinProblem::initial_params() const {
  ParamVector w(2);
  w[0] = 0.5 * (mu1_[0] + mu2_[0]);
  w[1] = 0.5 * (mu1_[1] + mu2_[1]);
  return w;
}

LossGrad TwoBasinProblem::loss_and_grad(
    const ParamVector& w, std::span<const std::size_t> batch) const {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  double loss = 0.0;
  double gx = 0.0, gy = 0.0;
  const double s2 = width_ * width_;
  for (std::size_t idx : batch) {
    const auto& d = offsets_[idx];
    const double ux = w[0] - d[0];
    const double uy = w[1] - d[1];
    const double d1x = ux - mu1_[0], d1y = uy - mu1_[1];
    const double d2x = ux - mu2_[0], d2y = uy - mu2_[1];
    const double e1 = std::exp(-(d1x * d1x + d1y * d1y) / (2.0 * s2));
    const double e2 = std::exp(-(d2x * d2x + d2y * d2y) / (2.0 * s2));
    loss += -e1 - e2;
    gx += (e1 * d1x + e2 * d2x) / s2;
    gy += (e1 * d1y + e2 * d2y) / s2;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  LossGrad out;
  out.loss = loss * inv;
  out.grad = ParamVector(2);
  out.grad[0] = gx * inv;
  out.grad[1] = gy * inv;
  return out;
}

std::vector<std::pair<std::string, double>> TwoBasinProblem::final_metrics(
    const ParamVector& w) const {
  const double d1 = std::hypot(w[0] - mu1_[0], w[1] - mu1_[1]);
  const double d2 = std::hypot(w[0] - mu2_[0], w[1] - mu2_[1]);
  return {{"nearest_minimum", d1 <= d2 ? 1.0 : 2.0},
          {"distance_to_nearest", std::min(d1, d2)}};
}

// ---------------------------------------------------------------------------
// Seismic inversion

namespace {

double apply_nonlinearity(SeismicNonlinearity f, double beta, double v) {
  if (f == SeismicNonlinearity::tanh) return std::tanh(beta * v);
  const double u = beta * v;
  return u - u * u * u / 3.0;
}

double nonlinearity_deriv(SeismicNonlinearity f, double beta, double v,
                          double fv) {
  if (f == SeismicNonlinearity::tanh) return beta * (1.0 - fv * fv);
  const double u = beta * v;
  return beta * (1.0 - u * u);
}

}  // namespace

SeismicProblem::SeismicProblem(std::uint64_t seed, const SeismicConfig& cfg)
    : cfg_(cfg) {
  if (cfg.grid == 0 || cfg.measurements == 0) {
    throw std::invalid_argument("SeismicProblem: dimensions must be positive");
  }
  if (!(cfg.kernel_width > 0.0)) {
    throw std::invalid_argument("SeismicProblem: kernel width must be > 0");
  }
  const std::size_t g = cfg.grid;
  const std::size_t p = g * g;
  const std::size_t m = cfg.measurements;

  // Ground truth: smoothed white noise, rescaled to [-1, 1].
  {
    RngStream rng(seed, streams::problem_field);
    std::vector<double> white(p);
    for (double& v : white) v = rng.normal();
    const int radius = std::max(1, static_cast<int>(3.0 * cfg.smooth_width));
    std::vector<double> kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k) {
      kernel[k + radius] =
          std::exp(-0.5 * (k * k) / (cfg.smooth_width * cfg.smooth_width));
    }
    auto convolve_rows = [&](const std::vector<double>& src,
                             std::vector<double>& dst, bool along_rows) {
      for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
          double acc = 0.0, wsum = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            const long rr = along_rows ? static_cast<long>(r)
                                       : static_cast<long>(r) + k;
            const long cc = along_rows ? static_cast<long>(c) + k
                                       : static_cast<long>(c);
            if (rr < 0 || cc < 0 || rr >= static_cast<long>(g) ||
                cc >= static_cast<long>(g)) {
              continue;
            }
            acc += kernel[k + radius] * src[rr * g + cc];
            wsum += kernel[k + radius];
          }
          dst[r * g + c] = acc / wsum;
        }
      }
    };
    std::vector<double> tmp(p);
    truth_.resize(p);
    convolve_rows(white, tmp, true);
    convolve_rows(tmp, truth_, false);
    double peak = 0.0;
    for (double v : truth_) peak = std::max(peak, std::fabs(v));
    if (peak > 0.0) {
      for (double& v : truth_) v /= peak;
    }
  }

  // Measurement operator: L2-normalized Gaussian kernels at random centers.
  {
    RngStream rng(seed, streams::problem_kernels);
    op_.assign(m * p, 0.0);
    const double kw2 = cfg.kernel_width * cfg.kernel_width;
    for (std::size_t row = 0; row < m; ++row) {
      const double cy = rng.uniform01() * static_cast<double>(g);
      const double cx = rng.uniform01() * static_cast<double>(g);
      double norm_sq = 0.0;
      double* k = &op_[row * p];
      for (std::size_t r = 0; r < g; ++r) {
        for (std::size_t c = 0; c < g; ++c) {
          const double dr = static_cast<double>(r) + 0.5 - cy;
          const double dc = static_cast<double>(c) + 0.5 - cx;
          const double val = std::exp(-0.5 * (dr * dr + dc * dc) / kw2);
          k[r * g + c] = val;
          norm_sq += val * val;
        }
      }
      const double inv_norm = 1.0 / std::sqrt(norm_sq);
      for (std::size_t i = 0; i < p; ++i) k[i] *= inv_norm;
    }
  }

  // Observations with additive measurement noise.
  {
    RngStream rng(seed, streams::data_noise);
    std::vector<double> fv(p);
    for (std::size_t i = 0; i < p; ++i) {
      fv[i] = apply_nonlinearity(cfg.nonlinearity, cfg.beta, truth_[i]);
    }
    y_.resize(m);
    for (std::size_t row = 0; row < m; ++row) {
      const double* k = &op_[row * p];
      double acc = 0.0;
      for (std::size_t i = 0; i < p; ++i) acc += k[i] * fv[i];
      y_[row] = acc + cfg.noise_sigma * rng.normal();
    }
  }

  // Train/test split over measurement rows.
  {
    RngStream rng(seed, streams::split);
    std::vector<std::size_t> rows(m);
    for (std::size_t i = 0; i < m; ++i) rows[i] = i;
    for (std::size_t i = m; i > 1; --i) {
      std::swap(rows[i - 1], rows[rng.uniform_below(i)]);
    }
    const std::size_t n_test =
        static_cast<std::size_t>(cfg.test_fraction * static_cast<double>(m));
    test_rows_.assign(rows.begin(), rows.begin() + n_test);
    train_rows_.assign(rows.begin() + n_test, rows.end());
  }
}

std::span<const double> SeismicProblem::kernel_row(std::size_t m) const {
  const std::size_t p = truth_.size();
  return {&op_[m * p], p};
}

LossGrad SeismicProblem::loss_and_grad(
    const ParamVector& v, std::span<const std::size_t> batch) const {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  const std::size_t p = truth_.size();
  std::vector<double> fv(p), fpv(p);
  for (std::size_t i = 0; i < p; ++i) {
    fv[i] = apply_nonlinearity(cfg_.nonlinearity, cfg_.beta, v[i]);
    fpv[i] = nonlinearity_deriv(cfg_.nonlinearity, cfg_.beta, v[i], fv[i]);
  }
  LossGrad out;
  out.grad = ParamVector(p);
  double loss = 0.0;
  for (std::size_t bi : batch) {
    const std::size_t row = train_rows_[bi];
    const double* k = &op_[row * p];
    double pred = 0.0;
    for (std::size_t i = 0; i < p; ++i) pred += k[i] * fv[i];
    const double r = pred - y_[row];
    loss += r * r;
    for (std::size_t i = 0; i < p; ++i) out.grad[i] += r * k[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss = loss * inv;
  for (std::size_t i = 0; i < p; ++i) {
    out.grad[i] *= 2.0 * inv * fpv[i];
  }
  return out;
}

ParamGrouping SeismicProblem::grouping(GroupingKind kind) const {
  if (kind == GroupingKind::whole) return group_whole(param_count());
  if (kind == GroupingKind::patches) {
    return group_by_patches(cfg_.grid, cfg_.grid, cfg_.patch, cfg_.patch);
  }
  throw std::invalid_argument("seismic problem supports whole|patches grouping");
}

double SeismicProblem::loss_over_rows(
    const ParamVector& v, std::span<const std::size_t> row_ids) const {
  const std::size_t p = truth_.size();
  std::vector<double> fv(p);
  for (std::size_t i = 0; i < p; ++i) {
    fv[i] = apply_nonlinearity(cfg_.nonlinearity, cfg_.beta, v[i]);
  }
  double loss = 0.0;
  for (std::size_t row : row_ids) {
    const double* k = &op_[row * p];
    double pred = 0.0;
    for (std::size_t i = 0; i < p; ++i) pred += k[i] * fv[i];
    const double r = pred - y_[row];
    loss += r * r;
  }
  return loss / static_cast<double>(row_ids.size());
}

double SeismicProblem::train_loss(const ParamVector& v) const {
  return loss_over_rows(v, train_rows_);
}

double SeismicProblem::test_loss(const ParamVector& v) const {
  return loss_over_rows(v, test_rows_);
}

double SeismicProblem::recon_mse(const ParamVector& v) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < truth_.size(); ++i) {
    const double d = v[i] - truth_[i];
    acc += d * d;
  }
  return acc / static_cast<double>(truth_.size());
}

std::vector<double> SeismicProblem::abs_error_map(const ParamVector& v) const {
  std::vector<double> out(truth_.size());
  for (std::size_t i = 0; i < truth_.size(); ++i) {
    out[i] = std::fabs(v[i] - truth_[i]);
  }
  return out;
}

std::vector<std::pair<std::string, double>> SeismicProblem::final_metrics(
    const ParamVector& v) const {
  return {{"train_loss", train_loss(v)},
          {"test_loss", test_loss(v)},
          {"recon_mse", recon_mse(v)}};
}

// ---------------------------------------------------------------------------
// MLP on two spirals

namespace {

Dataset make_spirals(std::size_t n, double noise, double turns,
                     RngStream& rng) {
  Dataset ds;
  ds.inputs.reserve(n);
  ds.targets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cls = i % 2;
    const double t = rng.uniform01();
    const double angle = t * turns * 2.0 * 3.14159265358979323846 +
                         (cls == 1 ? 3.14159265358979323846 : 0.0);
    const double radius = 0.25 + 1.75 * t;
    const double x = radius * std::sin(angle) + noise * rng.normal();
    const double y = radius * std::cos(angle) + noise * rng.normal();
    ds.inputs.push_back({x, y});
    ds.targets.push_back({static_cast<double>(cls)});
  }
  return ds;
}

}  // namespace

MlpProblem::MlpProblem(std::uint64_t seed, const MlpConfig& cfg) : cfg_(cfg) {
  if (cfg.layer_sizes.size() < 2) {
    throw std::invalid_argument("MlpProblem: need at least input and output layer");
  }
  for (std::size_t s : cfg.layer_sizes) {
    if (s == 0) throw std::invalid_argument("MlpProblem: zero layer size");
  }
  {
    RngStream rng(seed, streams::data_noise);
    train_ = make_spirals(cfg.train_points, cfg.spiral_noise, cfg.spiral_turns,
                          rng);
    val_ = make_spirals(cfg.val_points, cfg.spiral_noise, cfg.spiral_turns,
                        rng);
  }
  param_count_ = 0;
  for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
    param_count_ += cfg.layer_sizes[l] * cfg.layer_sizes[l + 1] +
                    cfg.layer_sizes[l + 1];
  }
  RngStream rng(seed, streams::param_init);
  init_ = ParamVector(param_count_);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
    const std::size_t fan_in = cfg.layer_sizes[l];
    const std::size_t fan_out = cfg.layer_sizes[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
      init_[off++] = scale * rng.normal();
    }
    for (std::size_t i = 0; i < fan_out; ++i) {
      init_[off++] = 0.0;  // biases start at zero
    }
  }
}

LossGrad MlpProblem::loss_and_grad(const ParamVector& w,
                                   std::span<const std::size_t> batch) const {
  if (batch.empty()) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  if (w.size() != param_count_) {
    throw std::invalid_argument("MlpProblem: weight vector has " +
                                std::to_string(w.size()) + " entries, want " +
                                std::to_string(param_count_));
  }
  const auto& sizes = cfg_.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  const std::size_t n_class = sizes.back();

  // Per-layer offsets into the flat parameter vector.
  std::vector<std::size_t> w_off(n_layers), b_off(n_layers);
  {
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      w_off[l] = off;
      off += sizes[l] * sizes[l + 1];
      b_off[l] = off;
      off += sizes[l + 1];
    }
  }

  LossGrad out;
  out.grad = ParamVector(param_count_);
  double loss = 0.0;

  std::vector<std::vector<double>> act(n_layers + 1);
  std::vector<double> delta, delta_prev;
  for (std::size_t bi : batch) {
    act[0] = train_.inputs[bi];
    // forward
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t in = sizes[l], outn = sizes[l + 1];
      act[l + 1].assign(outn, 0.0);
      for (std::size_t u = 0; u < outn; ++u) {
        double z = w[b_off[l] + u];
        const std::size_t row = w_off[l] + u * in;
        for (std::size_t j = 0; j < in; ++j) z += w[row + j] * act[l][j];
        act[l + 1][u] = (l + 1 < n_layers) ? std::tanh(z) : z;
      }
    }
    // softmax + cross-entropy on the logits
    std::vector<double>& logits = act[n_layers];
    double zmax = logits[0];
    for (double z : logits) zmax = std::max(zmax, z);
    double zsum = 0.0;
    for (double z : logits) zsum += std::exp(z - zmax);
    const std::size_t label = static_cast<std::size_t>(train_.targets[bi][0]);
    loss += -(logits[label] - zmax - std::log(zsum));

    // backward: dL/dlogit = p - onehot
    delta.assign(n_class, 0.0);
    for (std::size_t c = 0; c < n_class; ++c) {
      delta[c] = std::exp(logits[c] - zmax) / zsum;
    }
    delta[label] -= 1.0;
    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t in = sizes[l], outn = sizes[l + 1];
      delta_prev.assign(in, 0.0);
      for (std::size_t u = 0; u < outn; ++u) {
        const double d = delta[u];
        const std::size_t row = w_off[l] + u * in;
        out.grad[b_off[l] + u] += d;
        for (std::size_t j = 0; j < in; ++j) {
          out.grad[row + j] += d * act[l][j];
          delta_prev[j] += d * w[row + j];
        }
      }
      if (l > 0) {
        for (std::size_t j = 0; j < in; ++j) {
          delta_prev[j] *= 1.0 - act[l][j] * act[l][j];  // tanh'
        }
        delta.swap(delta_prev);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss = loss * inv;
  for (std::size_t i = 0; i < param_count_; ++i) out.grad[i] *= inv;
  return out;
}

ParamGrouping MlpProblem::grouping(GroupingKind kind) const {
  const auto& sizes = cfg_.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  if (kind == GroupingKind::whole) return group_whole(param_count_);
  if (kind == GroupingKind::layers) {
    std::vector<std::size_t> layer_params(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
      layer_params[l] = sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    return group_by_layers(layer_params);
  }
  if (kind == GroupingKind::units) {
    // One group per output unit: its fan-in weights plus its bias.
    std::vector<std::uint32_t> assign(param_count_);
    std::uint32_t group = 0;
    std::size_t off = 0;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t in = sizes[l], outn = sizes[l + 1];
      for (std::size_t u = 0; u < outn; ++u) {
        for (std::size_t j = 0; j < in; ++j) {
          assign[off + u * in + j] = group + static_cast<std::uint32_t>(u);
        }
        assign[off + in * outn + u] = group + static_cast<std::uint32_t>(u);
      }
      off += in * outn + outn;
      group += static_cast<std::uint32_t>(outn);
    }
    return ParamGrouping(std::move(assign));
  }
  throw std::invalid_argument("mlp problem supports whole|layers|units grouping");
}

std::vector<double> MlpProblem::predict_probs(const ParamVector& w,
                                              std::span<const double> x) const {
  const auto& sizes = cfg_.layer_sizes;
  const std::size_t n_layers = sizes.size() - 1;
  std::vector<double> a(x.begin(), x.end());
  std::vector<double> next;
  std::size_t off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = sizes[l], outn = sizes[l + 1];
    next.assign(outn, 0.0);
    for (std::size_t u = 0; u < outn; ++u) {
      double z = w[off + in * outn + u];
      for (std::size_t j = 0; j < in; ++j) z += w[off + u * in + j] * a[j];
      next[u] = (l + 1 < n_layers) ? std::tanh(z) : z;
    }
    a.swap(next);
    off += in * outn + outn;
  }
  double zmax = a[0];
  for (double z : a) zmax = std::max(zmax, z);
  double zsum = 0.0;
  for (double& z : a) {
    z = std::exp(z - zmax);
    zsum += z;
  }
  for (double& z : a) z /= zsum;
  return a;
}

double MlpProblem::accuracy(const ParamVector& w, const Dataset& split) const {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < split.inputs.size(); ++i) {
    const auto probs = predict_probs(w, split.inputs[i]);
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (pred == static_cast<std::size_t>(split.targets[i][0])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(split.inputs.size());
}

std::vector<std::pair<std::string, double>> MlpProblem::final_metrics(
    const ParamVector& w) const {
  return {{"train_accuracy", accuracy(w, train_)},
          {"val_accuracy", accuracy(w, val_)}};
}

// ---------------------------------------------------------------------------

ParamVector finite_difference_grad(const Problem& problem, const ParamVector& w,
                                   std::span<const std::size_t> batch,
                                   double h) {
  ParamVector grad(w.size());
  ParamVector probe = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = problem.loss_and_grad(probe, batch).loss;
    probe[i] = orig - h;
    const double down = problem.loss_and_grad(probe, batch).loss;
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace twinboot
