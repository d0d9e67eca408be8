#include "twinboot/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace twinboot {

std::vector<double> predict_deterministic(const ParamVector& w1,
                                          const ParamVector& w2,
                                          const PredictFn& f,
                                          std::span<const double> x) {
  ParamVector mean(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    mean[i] = 0.5 * (w1[i] + w2[i]);
  }
  return f(mean, x);
}

McPrediction predict_mc(const ParamVector& w1, const ParamVector& w2,
                        const ParamGrouping& grouping, const PredictFn& f,
                        std::span<const double> x,
                        const McInferenceConfig& cfg) {
  if (cfg.samples < 1) {
    throw std::invalid_argument("predict_mc: samples must be >= 1");
  }
  ParamVector mean(w1.size());
  for (std::size_t i = 0; i < w1.size(); ++i) {
    mean[i] = 0.5 * (w1[i] + w2[i]);
  }
  const ParamGrouping whole = group_whole(w1.size());
  const ParamGrouping& g =
      cfg.granularity == McGranularity::per_group ? grouping : whole;
  const SigmaEstimate sigma = estimate_sigma(w1, w2, g);

  RngStream rng(cfg.seed, cfg.stream_id);
  McPrediction out;
  std::vector<double> sum, sum_sq;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const ParamVector ws = sample_around(mean, sigma, g, rng);
    const std::vector<double> pred = f(ws, x);
    if (sum.empty()) {
      sum.assign(pred.size(), 0.0);
      sum_sq.assign(pred.size(), 0.0);
    }
    for (std::size_t j = 0; j < pred.size(); ++j) {
      sum[j] += pred[j];
      sum_sq[j] += pred[j] * pred[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.samples);
  out.mean.resize(sum.size());
  out.variance.assign(sum.size(), 0.0);
  for (std::size_t j = 0; j < sum.size(); ++j) {
    out.mean[j] = sum[j] * inv;
    if (cfg.samples > 1) {
      const double var =
          (sum_sq[j] - sum[j] * sum[j] * inv) /
          static_cast<double>(cfg.samples - 1);
      out.variance[j] = std::max(0.0, var);
    }
  }
  out.degenerate_variance = cfg.samples == 1;
  return out;
}

ReliabilityReport reliability(
    const std::vector<std::vector<double>>& probabilities,
    std::span<const std::size_t> labels, std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("reliability: bins must be >= 1");
  if (probabilities.size() != labels.size()) {
    throw std::invalid_argument("reliability: probabilities/labels mismatch");
  }
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    double total = 0.0;
    for (double p : probabilities[i]) {
      if (p < -1e-9 || p > 1.0 + 1e-9) {
        throw std::invalid_argument("reliability: probability out of [0,1]");
      }
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-6) {
      throw std::invalid_argument("reliability: row " + std::to_string(i) +
                                  " sums to " + std::to_string(total));
    }
  }

  ReliabilityReport rep;
  rep.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    rep.bin_edges[b] = static_cast<double>(b) / static_cast<double>(bins);
  }
  rep.bin_confidence.assign(bins, 0.0);
  rep.bin_accuracy.assign(bins, 0.0);
  rep.bin_count.assign(bins, 0);

  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto& row = probabilities[i];
    const std::size_t top = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    const double conf = row[top];
    std::size_t b = static_cast<std::size_t>(conf * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;  // confidence 1.0 falls in the last bin
    rep.bin_confidence[b] += conf;
    rep.bin_accuracy[b] += top == labels[i] ? 1.0 : 0.0;
    rep.bin_count[b] += 1;
  }

  const double n = static_cast<double>(probabilities.size());
  for (std::size_t b = 0; b < bins; ++b) {
    if (rep.bin_count[b] == 0) continue;
    const double cnt = static_cast<double>(rep.bin_count[b]);
    rep.bin_confidence[b] /= cnt;
    rep.bin_accuracy[b] /= cnt;
    rep.ece += (cnt / n) * std::fabs(rep.bin_accuracy[b] - rep.bin_confidence[b]);
  }
  return rep;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

bool pearson_of(std::span<const double> a, std::span<const double> b,
                double& out) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return false;
  out = sab / std::sqrt(saa * sbb);
  return true;
}

}  // namespace

CorrelationResult sigma_error_correlation(std::span<const double> sigma_map,
                                          std::span<const double> error_map) {
  if (sigma_map.size() != error_map.size()) {
    throw std::invalid_argument("sigma_error_correlation: shape mismatch");
  }
  if (sigma_map.empty()) {
    throw std::invalid_argument("sigma_error_correlation: empty maps");
  }
  CorrelationResult res;
  double pearson = 0.0;
  if (!pearson_of(sigma_map, error_map, pearson)) {
    res.defined = false;
    return res;
  }
  res.pearson = pearson;
  const std::vector<double> ra = ranks(sigma_map);
  const std::vector<double> rb = ranks(error_map);
  double rho = 0.0;
  if (!pearson_of(ra, rb, rho)) {
    res.defined = false;
    return res;
  }
  res.spearman = rho;
  res.defined = true;
  return res;
}

}  // namespace twinboot
