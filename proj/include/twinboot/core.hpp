#ifndef TWINBOOT_CORE_HPP
#define TWINBOOT_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "twinboot/rng.hpp"

namespace twinboot {

/// Flat parameter vector. Length is fixed at construction.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values_(n, fill) {}
  explicit ParamVector(std::vector<double> values)
      : values_(std::move(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  bool operator==(const ParamVector& other) const = default;

  /// Index of the first non-finite entry, or -1 if all entries are finite.
  long first_nonfinite() const;

 private:
  std::vector<double> values_;
};

/// Partition of parameter indices into contiguous-id groups 0..G-1.
/// Every index belongs to exactly one group; group sizes sum to P.
class ParamGrouping {
 public:
  ParamGrouping() = default;
  /// group_of[i] must be a valid id in 0..G-1 with no empty groups.
  explicit ParamGrouping(std::vector<std::uint32_t> group_of);

  std::size_t param_count() const { return group_of_.size(); }
  std::size_t group_count() const { return group_sizes_.size(); }
  std::uint32_t group_of(std::size_t i) const { return group_of_[i]; }
  std::size_t group_size(std::size_t g) const { return group_sizes_[g]; }
  std::span<const std::uint32_t> assignments() const { return group_of_; }

 private:
  std::vector<std::uint32_t> group_of_;
  std::vector<std::size_t> group_sizes_;
};

/// Per-group variance estimates sigma^2_g, keyed by group id.
struct SigmaEstimate {
  std::vector<double> sigma_sq;  // one entry per group

  std::size_t group_count() const { return sigma_sq.size(); }
  static SigmaEstimate zeros(std::size_t groups) {
    return SigmaEstimate{std::vector<double>(groups, 0.0)};
  }
};

/// Two-sample variance estimator: sigma^2_g = ||w1_g - w2_g||^2 / (2 D_g).
/// Whole-vector grouping gives the scalar sigma^2_avg = ||w1 - w2||^2 / (2P).
SigmaEstimate estimate_sigma(const ParamVector& w1, const ParamVector& w2,
                             const ParamGrouping& grouping);

/// Allocation-free variant for hot loops; out is resized to the group count.
void estimate_sigma_into(const ParamVector& w1, const ParamVector& w2,
                         const ParamGrouping& grouping, SigmaEstimate& out);

/// Draw each entry i in group g as center_i + sigma_g * z_i, z_i standard
/// normal. Exactly P normal draws are consumed regardless of the sigma
/// values, so changing sigma handling never shifts downstream sequences.
ParamVector sample_around(const ParamVector& center, const SigmaEstimate& sigma,
                          const ParamGrouping& grouping, RngStream& rng);

/// Allocation-free variant for hot loops; out is resized to match center.
void sample_around_into(const ParamVector& center, const SigmaEstimate& sigma,
                        const ParamGrouping& grouping, RngStream& rng,
                        ParamVector& out);

/// Consecutive groups of the given sizes: indices 0..s0-1 form group 0, etc.
ParamGrouping group_by_layers(std::span<const std::size_t> layer_sizes);
ParamGrouping group_by_layers(std::initializer_list<std::size_t> layer_sizes);

/// Row-major grid cells grouped into patch blocks. Trailing partial patches
/// (non-divisible grids) form their own smaller groups.
ParamGrouping group_by_patches(std::size_t grid_height, std::size_t grid_width,
                               std::size_t patch_height,
                               std::size_t patch_width);

/// Single group covering all P parameters.
ParamGrouping group_whole(std::size_t param_count);

}  // namespace twinboot

#endif
