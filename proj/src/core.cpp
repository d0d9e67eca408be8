#include "twinboot/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twinboot {

long ParamVector::first_nonfinite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) return static_cast<long>(i);
  }
  return -1;
}

ParamGrouping::ParamGrouping(std::vector<std::uint32_t> group_of)
    : group_of_(std::move(group_of)) {
  std::uint32_t max_id = 0;
  for (std::uint32_t g : group_of_) max_id = std::max(max_id, g);
  group_sizes_.assign(group_of_.empty() ? 0 : max_id + 1, 0);
  for (std::uint32_t g : group_of_) ++group_sizes_[g];
  for (std::size_t g = 0; g < group_sizes_.size(); ++g) {
    if (group_sizes_[g] == 0) {
      throw std::invalid_argument("ParamGrouping: empty group id " +
                                  std::to_string(g));
    }
  }
}

void estimate_sigma_into(const ParamVector& w1, const ParamVector& w2,
                         const ParamGrouping& grouping, SigmaEstimate& out) {
  if (w1.size() != w2.size()) {
    throw std::invalid_argument("estimate_sigma: parameter length mismatch (" +
                                std::to_string(w1.size()) + " vs " +
                                std::to_string(w2.size()) + ")");
  }
  if (grouping.param_count() != w1.size()) {
    throw std::invalid_argument(
        "estimate_sigma: grouping covers " +
        std::to_string(grouping.param_count()) + " parameters, vectors have " +
        std::to_string(w1.size()));
  }
  out.sigma_sq.assign(grouping.group_count(), 0.0);
  for (std::size_t i = 0; i < w1.size(); ++i) {
    const double d = w1[i] - w2[i];
    out.sigma_sq[grouping.group_of(i)] += d * d;
  }
  for (std::size_t g = 0; g < out.sigma_sq.size(); ++g) {
    out.sigma_sq[g] /= 2.0 * static_cast<double>(grouping.group_size(g));
  }
}

SigmaEstimate estimate_sigma(const ParamVector& w1, const ParamVector& w2,
                             const ParamGrouping& grouping) {
  SigmaEstimate out;
  estimate_sigma_into(w1, w2, grouping, out);
  return out;
}

void sample_around_into(const ParamVector& center, const SigmaEstimate& sigma,
                        const ParamGrouping& grouping, RngStream& rng,
                        ParamVector& out) {
  if (grouping.param_count() != center.size()) {
    throw std::invalid_argument("sample_around: grouping/parameter mismatch");
  }
  if (sigma.group_count() != grouping.group_count()) {
    throw std::invalid_argument("sample_around: sigma keyed by " +
                                std::to_string(sigma.group_count()) +
                                " groups, grouping has " +
                                std::to_string(grouping.group_count()));
  }
  thread_local std::vector<double> scale;
  scale.resize(sigma.group_count());
  for (std::size_t g = 0; g < scale.size(); ++g) {
    const double s2 = sigma.sigma_sq[g];
    if (s2 < 0.0 || !std::isfinite(s2)) {
      throw std::invalid_argument("sample_around: invalid sigma^2 for group " +
                                  std::to_string(g));
    }
    scale[g] = std::sqrt(s2);
  }
  out.raw().resize(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    // Draws are consumed for every entry, even when sigma is zero, to keep
    // the stream aligned across sigma configurations.
    const double z = rng.normal();
    out[i] = center[i] + scale[grouping.group_of(i)] * z;
  }
}

ParamVector sample_around(const ParamVector& center, const SigmaEstimate& sigma,
                          const ParamGrouping& grouping, RngStream& rng) {
  ParamVector out(center.size());
  sample_around_into(center, sigma, grouping, rng, out);
  return out;
}

ParamGrouping group_by_layers(std::span<const std::size_t> layer_sizes) {
  if (layer_sizes.empty()) {
    throw std::invalid_argument("group_by_layers: no layer sizes given");
  }
  std::vector<std::uint32_t> assign;
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    if (layer_sizes[l] == 0) {
      throw std::invalid_argument("group_by_layers: layer " +
                                  std::to_string(l) + " has size 0");
    }
    assign.insert(assign.end(), layer_sizes[l], static_cast<std::uint32_t>(l));
  }
  return ParamGrouping(std::move(assign));
}

ParamGrouping group_by_layers(std::initializer_list<std::size_t> layer_sizes) {
  return group_by_layers(
      std::span<const std::size_t>(layer_sizes.begin(), layer_sizes.size()));
}

ParamGrouping group_by_patches(std::size_t grid_height, std::size_t grid_width,
                               std::size_t patch_height,
                               std::size_t patch_width) {
  if (grid_height == 0 || grid_width == 0 || patch_height == 0 ||
      patch_width == 0) {
    throw std::invalid_argument("group_by_patches: sizes must be positive");
  }
  const std::size_t patches_per_row = (grid_width + patch_width - 1) / patch_width;
  std::vector<std::uint32_t> assign(grid_height * grid_width);
  for (std::size_t r = 0; r < grid_height; ++r) {
    for (std::size_t c = 0; c < grid_width; ++c) {
      const std::size_t pr = r / patch_height;
      const std::size_t pc = c / patch_width;
      assign[r * grid_width + c] =
          static_cast<std::uint32_t>(pr * patches_per_row + pc);
    }
  }
  return ParamGrouping(std::move(assign));
}

ParamGrouping group_whole(std::size_t param_count) {
  if (param_count == 0) {
    throw std::invalid_argument("group_whole: P must be positive");
  }
  return ParamGrouping(std::vector<std::uint32_t>(param_count, 0));
}

}  // namespace twinboot
