#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "twinboot/inference.hpp"
#include "twinboot/problems.hpp"

using namespace twinboot;

namespace {

// y_j = sum_i w_i * x_i (single output)
const PredictFn linear_model = [](const ParamVector& w,
                                  std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * x[i];
  return std::vector<double>{acc};
};

}  // namespace

TEST_CASE("deterministic prediction uses the twin mean") {
  ParamVector w1(std::vector<double>{1.0, 3.0});
  ParamVector w2(std::vector<double>{3.0, 1.0});
  const std::vector<double> x{1.0, 1.0};
  const auto pred = predict_deterministic(w1, w2, linear_model, x);
  CHECK(pred[0] == doctest::Approx(4.0));  // mean weights (2,2) on (1,1)

  // equal twins reduce to the single-model prediction
  const auto same = predict_deterministic(w1, w1, linear_model, x);
  CHECK(same[0] == doctest::Approx(linear_model(w1, x)[0]));

  // linear model: mean-of-weights equals mean of per-twin predictions
  const double avg =
      0.5 * (linear_model(w1, x)[0] + linear_model(w2, x)[0]);
  CHECK(pred[0] == doctest::Approx(avg));
}

TEST_CASE("mc prediction with sigma=0 equals deterministic for any S") {
  ParamVector w(std::vector<double>{0.5, -0.5, 2.0});
  const std::vector<double> x{1.0, 2.0, 3.0};
  McInferenceConfig cfg;
  cfg.samples = 33;
  const McPrediction mc =
      predict_mc(w, w, group_whole(3), linear_model, x, cfg);
  const auto det = predict_deterministic(w, w, linear_model, x);
  CHECK(mc.mean[0] == doctest::Approx(det[0]));
  CHECK(mc.variance[0] == 0.0);
}

TEST_CASE("mc prediction with S=1 flags degenerate variance") {
  ParamVector w1(std::vector<double>{1.0, 0.0});
  ParamVector w2(std::vector<double>{0.0, 1.0});
  McInferenceConfig cfg;
  cfg.samples = 1;
  const McPrediction mc =
      predict_mc(w1, w2, group_whole(2), linear_model, std::vector<double>{1.0, 1.0}, cfg);
  CHECK(mc.degenerate_variance);
  CHECK(mc.variance[0] == 0.0);
  McInferenceConfig bad;
  bad.samples = 0;
  CHECK_THROWS_AS(
      predict_mc(w1, w2, group_whole(2), linear_model, std::vector<double>{1.0, 1.0}, bad),
      std::invalid_argument);
}

TEST_CASE("mc predictive variance propagates through a linear map") {
  // output = sum of P weights on x = ones: Var(output) = sigma^2 * P
  const std::size_t p = 64;
  ParamVector w1(p), w2(p);
  for (std::size_t i = 0; i < p; ++i) {
    w1[i] = 1.0;
    w2[i] = 2.0;  // sigma^2 = (1^2 * P) / (2P) = 0.5 per parameter
  }
  const std::vector<double> ones(p, 1.0);
  McInferenceConfig cfg;
  cfg.samples = 10000;
  cfg.seed = 5;
  const McPrediction mc =
      predict_mc(w1, w2, group_whole(p), linear_model, ones, cfg);
  CHECK(mc.mean[0] == doctest::Approx(1.5 * p).epsilon(0.02));
  CHECK(mc.variance[0] == doctest::Approx(0.5 * p).epsilon(0.10));
}

TEST_CASE("mc error to the deterministic target shrinks like 1/sqrt(S)") {
  const std::size_t p = 16;
  ParamVector w1(p, 0.0), w2(p);
  for (std::size_t i = 0; i < p; ++i) w2[i] = 1.0;
  const std::vector<double> ones(p, 1.0);
  const auto det = predict_deterministic(w1, w2, linear_model, ones);

  auto mc_error = [&](std::size_t samples, std::uint64_t seed) {
    McInferenceConfig cfg;
    cfg.samples = samples;
    cfg.seed = seed;
    const McPrediction mc =
        predict_mc(w1, w2, group_whole(p), linear_model, ones, cfg);
    return std::fabs(mc.mean[0] - det[0]);
  };
  // average over replicates to stabilize the ratio
  double e2 = 0.0, e4 = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    e2 += mc_error(100, s);
    e4 += mc_error(10000, s);
  }
  CHECK(e4 < e2);            // more samples, closer to the target
  CHECK(e4 / e2 < 0.4);      // roughly the 1/sqrt(100) = 0.1 contraction
}

TEST_CASE("per-group and whole-vector granularity both run and differ") {
  const std::size_t p = 6;
  ParamVector w1(p, 0.0), w2(p);
  for (std::size_t i = 0; i < p; ++i) w2[i] = i < 3 ? 4.0 : 0.0;
  const ParamGrouping groups = group_by_layers({3, 3});
  McInferenceConfig per_group;
  per_group.samples = 4000;
  per_group.granularity = McGranularity::per_group;
  McInferenceConfig whole;
  whole.samples = 4000;
  whole.granularity = McGranularity::whole_vector;

  // probe output taps only the second group, which has sigma = 0 per-group
  const PredictFn second_group_sum = [](const ParamVector& w,
                                        std::span<const double>) {
    return std::vector<double>{w[3] + w[4] + w[5]};
  };
  const McPrediction a =
      predict_mc(w1, w2, groups, second_group_sum, std::span<const double>{}, per_group);
  const McPrediction b =
      predict_mc(w1, w2, groups, second_group_sum, std::span<const double>{}, whole);
  CHECK(a.variance[0] == 0.0);  // group 2 never moves under per-group sigma
  CHECK(b.variance[0] > 0.5);   // whole-vector sigma_avg spreads everywhere
}

TEST_CASE("reliability trivial cases") {
  // all confident and correct: ECE = 0
  std::vector<std::vector<double>> probs(10, {1.0, 0.0});
  std::vector<std::size_t> labels(10, 0);
  CHECK(reliability(probs, labels, 10).ece == doctest::Approx(0.0));

  // all confident, half correct: ECE = 0.5
  for (std::size_t i = 0; i < 5; ++i) labels[i] = 1;
  const ReliabilityReport rep = reliability(probs, labels, 10);
  CHECK(rep.ece == doctest::Approx(0.5));
  std::size_t total = 0;
  for (std::size_t c : rep.bin_count) total += c;
  CHECK(total == 10);
}

TEST_CASE("reliability of a synthetically calibrated predictor is near zero") {
  // confidence c drawn uniformly; the label agrees with probability c
  RngStream rng(42, 9);
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 20000; ++i) {
    const double c = 0.5 + 0.5 * rng.uniform01();
    probs.push_back({c, 1.0 - c});
    labels.push_back(rng.uniform01() < c ? 0 : 1);
  }
  CHECK(reliability(probs, labels, 10).ece < 0.01);
}

TEST_CASE("ece is invariant under permutation of the evaluation set") {
  RngStream rng(7, 2);
  std::vector<std::vector<double>> probs;
  std::vector<std::size_t> labels;
  for (int i = 0; i < 500; ++i) {
    const double c = 0.5 + 0.5 * rng.uniform01();
    probs.push_back({c, 1.0 - c});
    labels.push_back(rng.uniform_below(2));
  }
  const double before = reliability(probs, labels, 10).ece;
  std::vector<std::size_t> perm(probs.size());
  std::iota(perm.begin(), perm.end(), std::size_t(0));
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.uniform_below(i)]);
  }
  std::vector<std::vector<double>> probs2;
  std::vector<std::size_t> labels2;
  for (std::size_t i : perm) {
    probs2.push_back(probs[i]);
    labels2.push_back(labels[i]);
  }
  CHECK(reliability(probs2, labels2, 10).ece == doctest::Approx(before));
}

TEST_CASE("reliability rejects invalid probability rows") {
  std::vector<std::vector<double>> bad{{0.7, 0.7}};
  std::vector<std::size_t> labels{0};
  CHECK_THROWS_AS(reliability(bad, labels, 10), std::invalid_argument);
}

TEST_CASE("sigma/error correlation endpoints") {
  std::vector<double> a{0.1, 0.5, 0.3, 0.9, 0.2};
  const CorrelationResult same = sigma_error_correlation(a, a);
  CHECK(same.defined);
  CHECK(same.spearman == doctest::Approx(1.0));
  CHECK(same.pearson == doctest::Approx(1.0));

  std::vector<double> neg(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) neg[i] = -a[i] + 2.0;
  const CorrelationResult anti = sigma_error_correlation(a, neg);
  CHECK(anti.spearman == doctest::Approx(-1.0));

  std::vector<double> flat(a.size(), 3.0);
  const CorrelationResult undef = sigma_error_correlation(a, flat);
  CHECK_FALSE(undef.defined);
}

TEST_CASE("independent random maps have near-zero correlation") {
  RngStream rng(11, 3);
  int high = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(900), b(900);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const CorrelationResult r = sigma_error_correlation(a, b);
    if (std::fabs(r.spearman) >= 0.1) ++high;
  }
  CHECK(high <= 1);  // |rho| < 0.1 with high probability at n = 900
}
