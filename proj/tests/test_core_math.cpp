#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "twinboot/core.hpp"
#include "twinboot/rng.hpp"

using namespace twinboot;

namespace {

ParamVector gaussian_vector(std::size_t n, double sigma, RngStream& rng) {
  ParamVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = sigma * rng.normal();
  return v;
}

}  // namespace

TEST_CASE("rng streams are deterministic and distinct") {
  RngStream a(123, 5), b(123, 5), c(123, 6);
  bool any_diff = false;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    if (va != c.next_u64()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("rng normal moments") {
  RngStream rng(2024, streams::forward_twin1);
  const long n = 2000000;
  double m = 0, m2 = 0, m4 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    m += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::fabs(m) < 0.01);
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
  CHECK(m4 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("rng uniform_below covers the range uniformly") {
  RngStream rng(7, 1);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) ++counts[rng.uniform_below(10)];
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("estimate_sigma zero distance and hand arithmetic") {
  ParamVector a(std::vector<double>{1.0, -3.0, 2.5});
  const ParamGrouping g = group_whole(3);
  const SigmaEstimate same = estimate_sigma(a, a, g);
  CHECK(same.sigma_sq[0] == 0.0);

  // ||(1,1)-(3,3)||^2 / (2*2) = 8/4 = 2
  ParamVector w1(std::vector<double>{1.0, 1.0});
  ParamVector w2(std::vector<double>{3.0, 3.0});
  const SigmaEstimate s = estimate_sigma(w1, w2, group_whole(2));
  CHECK(s.sigma_sq[0] == doctest::Approx(2.0));
}

TEST_CASE("estimate_sigma length mismatch throws") {
  ParamVector w1(2), w2(3);
  CHECK_THROWS_AS(estimate_sigma(w1, w2, group_whole(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_sigma(w1, w1, group_whole(3)),
                  std::invalid_argument);
}

TEST_CASE("estimate_sigma recovers unit variance from iid pairs") {
  // Monte-Carlo oracle: w1, w2 iid N(0, I), D = 1e4, single group.
  RngStream rng(99, 2);
  const std::size_t d = 10000;
  const ParamGrouping g = group_whole(d);
  const ParamVector w1 = gaussian_vector(d, 1.0, rng);
  const ParamVector w2 = gaussian_vector(d, 1.0, rng);
  const SigmaEstimate s = estimate_sigma(w1, w2, g);
  CHECK(s.sigma_sq[0] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("estimate_sigma symmetry, translation and scaling properties") {
  RngStream rng(5, 3);
  const std::size_t d = 64;
  const ParamGrouping g = group_by_layers({16, 48});
  const ParamVector a = gaussian_vector(d, 2.0, rng);
  const ParamVector b = gaussian_vector(d, 2.0, rng);

  const SigmaEstimate ab = estimate_sigma(a, b, g);
  const SigmaEstimate ba = estimate_sigma(b, a, g);
  for (std::size_t i = 0; i < ab.sigma_sq.size(); ++i) {
    CHECK(ab.sigma_sq[i] == ba.sigma_sq[i]);  // exact symmetry
  }

  ParamVector at = a, bt = b;
  for (std::size_t i = 0; i < d; ++i) {
    at[i] += 7.25;
    bt[i] += 7.25;
  }
  const SigmaEstimate shifted = estimate_sigma(at, bt, g);
  for (std::size_t i = 0; i < ab.sigma_sq.size(); ++i) {
    CHECK(shifted.sigma_sq[i] == ab.sigma_sq[i]);  // exact: same subtraction
  }

  ParamVector ac = a, bc = b;
  for (std::size_t i = 0; i < d; ++i) {
    ac[i] *= 3.0;
    bc[i] *= 3.0;
  }
  const SigmaEstimate scaled = estimate_sigma(ac, bc, g);
  for (std::size_t i = 0; i < ab.sigma_sq.size(); ++i) {
    CHECK(scaled.sigma_sq[i] == doctest::Approx(9.0 * ab.sigma_sq[i]));
  }
}

TEST_CASE("estimate_sigma is unbiased over many trials") {
  // pairs iid N(0, tau^2 I): mean of sigma^2-hat within 3 standard errors
  const double tau_sq = 2.25;
  const std::size_t d = 8;
  const int trials = 10000;
  const ParamGrouping g = group_whole(d);
  RngStream rng(31, 4);
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ParamVector w1 = gaussian_vector(d, std::sqrt(tau_sq), rng);
    const ParamVector w2 = gaussian_vector(d, std::sqrt(tau_sq), rng);
    const double est = estimate_sigma(w1, w2, g).sigma_sq[0];
    sum += est;
    sum_sq += est * est;
  }
  const double mean = sum / trials;
  const double var = (sum_sq - sum * sum / trials) / (trials - 1);
  const double se = std::sqrt(var / trials);
  CHECK(std::fabs(mean - tau_sq) < 3.0 * se);
}

TEST_CASE("estimator variance matches 2 tau^4 / D") {
  const double tau_sq = 1.0;
  RngStream rng(77, 8);
  for (const std::size_t d : {std::size_t(1), std::size_t(16)}) {
    const ParamGrouping g = group_whole(d);
    const int trials = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
      const ParamVector w1 = gaussian_vector(d, 1.0, rng);
      const ParamVector w2 = gaussian_vector(d, 1.0, rng);
      const double est = estimate_sigma(w1, w2, g).sigma_sq[0];
      sum += est;
      sum_sq += est * est;
    }
    const double var = (sum_sq - sum * sum / trials) / (trials - 1);
    const double expected = 2.0 * tau_sq * tau_sq / static_cast<double>(d);
    const double tol = d == 1 ? 0.05 : 0.10;
    CHECK(var == doctest::Approx(expected).epsilon(tol));
  }
}

TEST_CASE("sample_around degenerate and deterministic cases") {
  const std::size_t d = 16;
  ParamVector center(d);
  for (std::size_t i = 0; i < d; ++i) center[i] = 0.5 * i;
  const ParamGrouping g = group_by_layers({4, 12});

  RngStream rng(1, streams::forward_twin1);
  const ParamVector out =
      sample_around(center, SigmaEstimate::zeros(2), g, rng);
  CHECK(out == center);  // sigma = 0 everywhere returns the center exactly

  RngStream r1(42, streams::forward_twin1), r2(42, streams::forward_twin1);
  SigmaEstimate s = SigmaEstimate::zeros(2);
  s.sigma_sq = {1.0, 4.0};
  const ParamVector a = sample_around(center, s, g, r1);
  const ParamVector b = sample_around(center, s, g, r2);
  CHECK(a == b);  // byte-identical for a fixed (seed, stream)
}

TEST_CASE("sample_around consumes draws independently of sigma values") {
  // Zeroing one group's sigma must not shift the draws of other groups.
  const std::size_t d = 10;
  const ParamGrouping g = group_by_layers({5, 5});
  ParamVector center(d, 0.0);
  SigmaEstimate sa = SigmaEstimate::zeros(2);
  sa.sigma_sq = {0.0, 4.0};
  SigmaEstimate sb = SigmaEstimate::zeros(2);
  sb.sigma_sq = {9.0, 4.0};
  RngStream r1(3, 6), r2(3, 6);
  const ParamVector a = sample_around(center, sa, g, r1);
  const ParamVector b = sample_around(center, sb, g, r2);
  for (std::size_t i = 5; i < d; ++i) {
    CHECK(a[i] == b[i]);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(a[i] == 0.0);
  }
}

TEST_CASE("sample_around law of large numbers") {
  const std::size_t d = 100000;
  const ParamGrouping g = group_whole(d);
  ParamVector center(d, 0.0);
  SigmaEstimate s = SigmaEstimate::zeros(1);
  s.sigma_sq = {4.0};
  RngStream rng(11, streams::forward_twin2);
  const ParamVector out = sample_around(center, s, g, rng);
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean += out[i];
  mean /= d;
  for (std::size_t i = 0; i < d; ++i) {
    var += (out[i] - mean) * (out[i] - mean);
  }
  var /= d - 1;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("sample_around rejects negative sigma^2") {
  const ParamGrouping g = group_whole(2);
  SigmaEstimate s = SigmaEstimate::zeros(1);
  s.sigma_sq = {-1.0};
  ParamVector center(2, 0.0);
  RngStream rng(0, 0);
  CHECK_THROWS_AS(sample_around(center, s, g, rng), std::invalid_argument);
}

TEST_CASE("group_by_layers construction") {
  const ParamGrouping g = group_by_layers({3, 5});
  CHECK(g.group_count() == 2);
  CHECK(g.param_count() == 8);
  CHECK(g.group_size(0) == 3);
  CHECK(g.group_size(1) == 5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.group_of(i) == 0);
  for (std::size_t i = 3; i < 8; ++i) CHECK(g.group_of(i) == 1);
  CHECK_THROWS_AS(group_by_layers({3, 0}), std::invalid_argument);
}

TEST_CASE("group_by_patches 30x30 grid with 3x3 patches") {
  const ParamGrouping g = group_by_patches(30, 30, 3, 3);
  CHECK(g.group_count() == 100);
  CHECK(g.param_count() == 900);
  for (std::size_t p = 0; p < 100; ++p) CHECK(g.group_size(p) == 9);
  // cell (r, c) belongs to patch (r/3)*10 + c/3
  CHECK(g.group_of(0) == 0);
  CHECK(g.group_of(2 * 30 + 2) == 0);
  CHECK(g.group_of(3 * 30 + 0) == 10);
  CHECK(g.group_of(29 * 30 + 29) == 99);
}

TEST_CASE("group_by_patches keeps trailing partial patches") {
  // 5x5 grid with 2x2 patches: 3x3 patch grid, edge patches are smaller.
  const ParamGrouping g = group_by_patches(5, 5, 2, 2);
  CHECK(g.group_count() == 9);
  std::size_t total = 0;
  for (std::size_t p = 0; p < g.group_count(); ++p) total += g.group_size(p);
  CHECK(total == 25);
  CHECK(g.group_size(0) == 4);
  CHECK(g.group_size(2) == 2);  // right edge column patch
  CHECK(g.group_size(8) == 1);  // bottom-right corner
  CHECK_THROWS_AS(group_by_patches(0, 5, 2, 2), std::invalid_argument);
}

TEST_CASE("group_whole") {
  const ParamGrouping g = group_whole(900);
  CHECK(g.group_count() == 1);
  CHECK(g.group_size(0) == 900);
  CHECK_THROWS_AS(group_whole(0), std::invalid_argument);
}
