#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "twinboot/data.hpp"
#include "twinboot/rng.hpp"

using namespace twinboot;

TEST_CASE("make_bootstrap N=1 and determinism") {
  RngStream rng(3, streams::bootstrap_twin1);
  const BootstrapDataset b = make_bootstrap(1, rng);
  REQUIRE(b.indices.size() == 1);
  CHECK(b.indices[0] == 0);

  RngStream r1(17, streams::bootstrap_twin1), r2(17, streams::bootstrap_twin1);
  CHECK(make_bootstrap(50, r1).indices == make_bootstrap(50, r2).indices);

  RngStream r0(17, streams::bootstrap_twin1);
  CHECK_THROWS_AS(make_bootstrap(0, r0), std::invalid_argument);
}

TEST_CASE("bootstrap coverage matches 1 - (1 - 1/N)^N") {
  const std::size_t n = 1000;
  const int trials = 200;
  double frac_sum = 0.0, frac_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng(1000 + t, streams::bootstrap_twin1);
    const BootstrapDataset b = make_bootstrap(n, rng);
    std::set<std::size_t> distinct(b.indices.begin(), b.indices.end());
    const double frac = static_cast<double>(distinct.size()) / n;
    frac_sum += frac;
    frac_sq += frac * frac;
  }
  const double mean = frac_sum / trials;
  const double var = (frac_sq - frac_sum * frac_sum / trials) / (trials - 1);
  const double se = std::sqrt(var / trials);
  const double expected = 1.0 - std::pow(1.0 - 1.0 / n, double(n));  // ~0.6323
  CHECK(std::fabs(mean - expected) < 3.0 * se);
}

TEST_CASE("twin bootstrap index sequences are uncorrelated") {
  const std::size_t n = 100;
  const int trials = 200;
  double corr_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    RngStream r1(500 + t, streams::bootstrap_twin1);
    RngStream r2(500 + t, streams::bootstrap_twin2);
    const auto b1 = make_bootstrap(n, r1).indices;
    const auto b2 = make_bootstrap(n, r2).indices;
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m1 += b1[i];
      m2 += b2[i];
    }
    m1 /= n;
    m2 /= n;
    double s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s11 += (b1[i] - m1) * (b1[i] - m1);
      s22 += (b2[i] - m2) * (b2[i] - m2);
      s12 += (b1[i] - m1) * (b2[i] - m2);
    }
    corr_sum += s12 / std::sqrt(s11 * s22);
  }
  // mean correlation has se ~ 1/sqrt(n * trials) ~ 0.007
  CHECK(std::fabs(corr_sum / trials) < 0.03);
}

TEST_CASE("paired batches full-batch degenerate case") {
  RngStream r1(9, streams::bootstrap_twin1), r2(9, streams::bootstrap_twin2);
  const BootstrapDataset d1 = make_bootstrap(10, r1);
  const BootstrapDataset d2 = make_bootstrap(10, r2);
  PairedBatchIterator it(d1, d2, 10, RngStream(9, streams::shuffle_twin1),
                         RngStream(9, streams::shuffle_twin2));
  CHECK(it.batches_per_epoch() == 1);
  it.begin_epoch();
  std::vector<std::size_t> b1, b2;
  REQUIRE(it.next(b1, b2));
  CHECK(b1.size() == 10);
  CHECK(b2.size() == 10);
  CHECK(std::multiset<std::size_t>(b1.begin(), b1.end()) ==
        std::multiset<std::size_t>(d1.indices.begin(), d1.indices.end()));
  CHECK_FALSE(it.next(b1, b2));
}

TEST_CASE("paired batches yield ceil(N/B) pairs with equal sizes") {
  RngStream r1(4, streams::bootstrap_twin1), r2(4, streams::bootstrap_twin2);
  const BootstrapDataset d1 = make_bootstrap(10, r1);
  const BootstrapDataset d2 = make_bootstrap(10, r2);
  PairedBatchIterator it(d1, d2, 3, RngStream(4, streams::shuffle_twin1),
                         RngStream(4, streams::shuffle_twin2));
  CHECK(it.batches_per_epoch() == 4);
  it.begin_epoch();
  std::vector<std::size_t> b1, b2;
  std::vector<std::size_t> sizes;
  std::multiset<std::size_t> visited1;
  while (it.next(b1, b2)) {
    CHECK(b1.size() == b2.size());
    sizes.push_back(b1.size());
    visited1.insert(b1.begin(), b1.end());
  }
  CHECK(sizes == std::vector<std::size_t>{3, 3, 3, 1});
  // each twin visits exactly its bootstrap multiset per epoch
  CHECK(visited1 == std::multiset<std::size_t>(d1.indices.begin(),
                                               d1.indices.end()));
}

TEST_CASE("paired batches rejects invalid batch size") {
  RngStream r1(4, 1), r2(4, 2);
  const BootstrapDataset d1 = make_bootstrap(10, r1);
  const BootstrapDataset d2 = make_bootstrap(10, r2);
  CHECK_THROWS_AS(PairedBatchIterator(d1, d2, 0, RngStream(4, 3),
                                      RngStream(4, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(PairedBatchIterator(d1, d2, 11, RngStream(4, 3),
                                      RngStream(4, 4)),
                  std::invalid_argument);
}

TEST_CASE("csv round trip") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "twinboot_data_test.csv")
          .string();
  {
    std::ofstream out(path);
    out << "x0,x1,y0\n";
    out << "1.5,-2,0\n";
    out << "0.25,3.5,1\n";
  }
  const Dataset ds = load_csv(path);
  REQUIRE(ds.size() == 2);
  CHECK(ds.inputs[0] == std::vector<double>{1.5, -2.0});
  CHECK(ds.inputs[1] == std::vector<double>{0.25, 3.5});
  CHECK(ds.targets[0] == std::vector<double>{0.0});
  CHECK(ds.targets[1] == std::vector<double>{1.0});
  std::remove(path.c_str());

  CHECK_THROWS(load_csv("/nonexistent/definitely_missing.csv"));
}

TEST_CASE("csv rejects malformed rows") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "twinboot_data_bad.csv")
          .string();
  {
    std::ofstream out(path);
    out << "x0,y0\n";
    out << "1.0\n";  // missing target cell
  }
  CHECK_THROWS_AS(load_csv(path), std::invalid_argument);
  std::remove(path.c_str());
}
