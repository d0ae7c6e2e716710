#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "retscreen/metrics.hpp"
#include "support/oracles.hpp"

using namespace retscreen;

TEST_CASE("roc_auc on the worked examples") {
  CHECK(roc_auc(std::vector<double>{0.2, 0.8}, std::vector<int>{0, 1}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.7, 0.7, 0.7}, std::vector<int>{0, 1, 1}) == 0.5);
  // 3 concordant pairs of 4
  CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
}

TEST_CASE("roc_auc requires both classes and binary labels") {
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 2}), Error);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1}, std::vector<int>{0, 1}), Error);
}

namespace {

ScoredSet random_set_with_ties(Rng& rng, size_t max_n) {
  while (true) {
    const size_t n = static_cast<size_t>(rng.uniform_int(2, static_cast<int64_t>(max_n)));
    ScoredSet set;
    bool pos = false, neg = false;
    for (size_t i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      set.scores.push_back(static_cast<double>(rng.uniform_int(0, 9)) / 10.0);
      set.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
      (set.labels.back() == 1 ? pos : neg) = true;
    }
    if (pos && neg) return set;
  }
}

}  // namespace

TEST_CASE("roc_auc equals the O(n^2) pair count exactly on 200 random tie-heavy sets") {
  Rng rng(20240817);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoredSet set = random_set_with_ties(rng, 100);
    CHECK(roc_auc(set) == testing::brute_force_auc(set.scores, set.labels));
  }
}

TEST_CASE("roc_auc invariances") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoredSet set = random_set_with_ties(rng, 60);
    const double auc = roc_auc(set);

    // flipped labels complement to 1
    std::vector<int> flipped(set.labels);
    for (int& y : flipped) y = 1 - y;
    CHECK(roc_auc(set.scores, flipped) == doctest::Approx(1.0 - auc).epsilon(1e-12));

    // strictly monotone transform preserves order and ties exactly
    std::vector<double> transformed(set.scores);
    for (double& s : transformed) s = std::exp(3.0 * s) - 2.0;
    CHECK(roc_auc(transformed, set.labels) == auc);

    // permutation of the sample order
    std::vector<size_t> perm(set.scores.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<double> ps;
    std::vector<int> pl;
    for (size_t i : perm) {
      ps.push_back(set.scores[i]);
      pl.push_back(set.labels[i]);
    }
    CHECK(roc_auc(ps, pl) == auc);
  }
}

TEST_CASE("bootstrap_ci collapses on perfectly separated data") {
  ScoredSet set;
  for (int i = 0; i < 50; ++i) {
    set.scores.push_back(i < 25 ? 0.1 + 0.001 * i : 0.9 + 0.001 * i);
    set.labels.push_back(i < 25 ? 0 : 1);
  }
  const auto [lo, hi] = bootstrap_ci(set, 200, 0.95, 7);
  CHECK(lo == 1.0);
  CHECK(hi == 1.0);
}

TEST_CASE("bootstrap_ci is deterministic in the seed") {
  Rng rng(5);
  const ScoredSet set = random_set_with_ties(rng, 80);
  const auto a = bootstrap_ci(set, 300, 0.9, 42);
  const auto b = bootstrap_ci(set, 300, 0.9, 42);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK_THROWS_AS(bootstrap_ci(set, 50, 0.9, 1), Error);
}

TEST_CASE("bootstrap_ci brackets the point estimate on random gaussian sets") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    ScoredSet set;
    for (int i = 0; i < 60; ++i) {
      const int label = rng.bernoulli(0.5) ? 1 : 0;
      set.scores.push_back(rng.normal() + (label == 1 ? 0.8 : 0.0));
      set.labels.push_back(label);
    }
    const double auc = roc_auc(set);
    const auto [lo, hi] = bootstrap_ci(set, 400, 0.95, 1000 + static_cast<uint64_t>(trial));
    CHECK(lo <= auc + 1e-12);
    CHECK(hi >= auc - 1e-12);
  }
}

TEST_CASE("summarize_seeds") {
  {
    const auto [mean, stdev] = summarize_seeds(std::vector<double>{0.5});
    CHECK(mean == 0.5);
    CHECK(stdev == 0.0);
  }
  {
    const auto [mean, stdev] = summarize_seeds(std::vector<double>{0.72, 0.74});
    CHECK(mean == doctest::Approx(0.73).epsilon(1e-12));
    CHECK(stdev == doctest::Approx(0.014142135623730951).epsilon(1e-9));
  }
  {
    const auto [mean, stdev] = summarize_seeds(std::vector<double>{0.6, 0.6, 0.6});
    CHECK(mean == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(stdev == 0.0);
  }
  CHECK_THROWS_AS(summarize_seeds(std::vector<double>{}), Error);
}
