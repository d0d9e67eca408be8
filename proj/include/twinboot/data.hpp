#ifndef TWINBOOT_DATA_HPP
#define TWINBOOT_DATA_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "twinboot/rng.hpp"

namespace twinboot {

/// In-memory dataset of paired feature/target rows.
struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;

  std::size_t size() const { return inputs.size(); }
  void validate() const;  // throws std::invalid_argument on shape errors
};

/// Load a dataset from CSV with a header row naming columns
/// x0..x{d-1},y0..y{k-1}.
Dataset load_csv(const std::string& path);

/// Index-resampled view over a base dataset of size N: N indices drawn
/// uniformly with replacement, fixed at construction. Mean-resets never
/// touch these indices.
struct BootstrapDataset {
  std::size_t base_size = 0;
  std::vector<std::size_t> indices;
};

BootstrapDataset make_bootstrap(std::size_t base_size, RngStream& rng);

/// Identity resample (index i -> i); used by the plain single-model baseline.
BootstrapDataset identity_resample(std::size_t base_size);

/// Emits paired mini-batches for the two twins. Per epoch each twin visits
/// each of its bootstrap indices exactly once; batch k of twin 1 and batch k
/// of twin 2 are emitted together with equal sizes (last batch may be short).
/// Each twin shuffles its own indices each epoch from its own stream.
class PairedBatchIterator {
 public:
  PairedBatchIterator(const BootstrapDataset& d1, const BootstrapDataset& d2,
                      std::size_t batch_size, RngStream rng1, RngStream rng2);

  std::size_t batches_per_epoch() const;

  /// Reshuffles both twins' index orders for a new epoch.
  void begin_epoch();

  /// Yields the next batch pair of the current epoch into b1/b2.
  /// Returns false when the epoch is exhausted.
  bool next(std::vector<std::size_t>& b1, std::vector<std::size_t>& b2);

 private:
  std::vector<std::size_t> order1_;
  std::vector<std::size_t> order2_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  RngStream rng1_;
  RngStream rng2_;
};

}  // namespace twinboot

#endif
