#include "twinboot/data.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twinboot {

void Dataset::validate() const {
  if (inputs.empty()) {
    throw std::invalid_argument("Dataset: empty dataset");
  }
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument("Dataset: inputs/targets length mismatch");
  }
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("load_csv: missing header row in " + path);
  }
  // Header names decide the x/y split.
  std::size_t x_cols = 0, y_cols = 0;
  {
    std::stringstream header(line);
    std::string name;
    bool seen_y = false;
    while (std::getline(header, name, ',')) {
      if (!name.empty() && name.front() == 'x' && !seen_y) {
        ++x_cols;
      } else if (!name.empty() && name.front() == 'y') {
        seen_y = true;
        ++y_cols;
      } else {
        throw std::invalid_argument("load_csv: unexpected column '" + name +
                                    "' (want x0..x{d-1},y0..y{k-1})");
      }
    }
  }
  if (x_cols == 0 || y_cols == 0) {
    throw std::invalid_argument("load_csv: need at least one x and one y column");
  }

  Dataset ds;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> x, y;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw std::invalid_argument("load_csv: bad number '" + cell +
                                    "' at row " + std::to_string(row));
      }
      if (col < x_cols) {
        x.push_back(v);
      } else {
        y.push_back(v);
      }
      ++col;
    }
    if (col != x_cols + y_cols) {
      throw std::invalid_argument("load_csv: row " + std::to_string(row) +
                                  " has " + std::to_string(col) +
                                  " cells, expected " +
                                  std::to_string(x_cols + y_cols));
    }
    ds.inputs.push_back(std::move(x));
    ds.targets.push_back(std::move(y));
  }
  ds.validate();
  return ds;
}

BootstrapDataset make_bootstrap(std::size_t base_size, RngStream& rng) {
  if (base_size == 0) {
    throw std::invalid_argument("make_bootstrap: empty dataset");
  }
  BootstrapDataset out;
  out.base_size = base_size;
  out.indices.resize(base_size);
  for (std::size_t i = 0; i < base_size; ++i) {
    out.indices[i] = rng.uniform_below(base_size);
  }
  return out;
}

BootstrapDataset identity_resample(std::size_t base_size) {
  if (base_size == 0) {
    throw std::invalid_argument("identity_resample: empty dataset");
  }
  BootstrapDataset out;
  out.base_size = base_size;
  out.indices.resize(base_size);
  for (std::size_t i = 0; i < base_size; ++i) out.indices[i] = i;
  return out;
}

namespace {

void shuffle(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

PairedBatchIterator::PairedBatchIterator(const BootstrapDataset& d1,
                                         const BootstrapDataset& d2,
                                         std::size_t batch_size, RngStream rng1,
                                         RngStream rng2)
    : order1_(d1.indices),
      order2_(d2.indices),
      batch_size_(batch_size),
      rng1_(rng1),
      rng2_(rng2) {
  if (d1.base_size != d2.base_size || d1.indices.size() != d2.indices.size()) {
    throw std::invalid_argument("paired_batches: bootstraps over different bases");
  }
  if (batch_size < 1 || batch_size > d1.indices.size()) {
    throw std::invalid_argument("paired_batches: batch size " +
                                std::to_string(batch_size) +
                                " outside [1, " +
                                std::to_string(d1.indices.size()) + "]");
  }
}

std::size_t PairedBatchIterator::batches_per_epoch() const {
  return (order1_.size() + batch_size_ - 1) / batch_size_;
}

void PairedBatchIterator::begin_epoch() {
  shuffle(order1_, rng1_);
  shuffle(order2_, rng2_);
  cursor_ = 0;
}

bool PairedBatchIterator::next(std::vector<std::size_t>& b1,
                               std::vector<std::size_t>& b2) {
  if (cursor_ >= order1_.size()) return false;
  const std::size_t end = std::min(cursor_ + batch_size_, order1_.size());
  b1.assign(order1_.begin() + cursor_, order1_.begin() + end);
  b2.assign(order2_.begin() + cursor_, order2_.begin() + end);
  cursor_ = end;
  return true;
}

}  // namespace twinboot
