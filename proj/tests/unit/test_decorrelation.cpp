#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "oodgnn/decorrelation/hsic.hpp"
#include "oodgnn/decorrelation/objective.hpp"
#include "oodgnn/decorrelation/reweight.hpp"
#include "oodgnn/decorrelation/rff.hpp"
#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/grad_check.hpp"
#include "../support/oracles.hpp"

using namespace oodgnn;
using namespace oodgnn::decorrelation;
using numcore::Dense2D;

namespace {

std::vector<double> normals(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

std::vector<double> positive_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (double& x : w) x = rng.uniform(0.2, 1.8);
  project_weights(w);
  return w;
}

// Columns centred and Gram-Schmidt orthogonalized so their sample covariance
// is exactly zero.
Dense2D orthogonal_columns(std::size_t n, std::size_t d, Rng& rng) {
  Dense2D z = oracle::random_matrix(n, d, rng);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += z(r, c);
    mean /= static_cast<double>(n);
    for (std::size_t r = 0; r < n; ++r) z(r, c) -= mean;
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0, norm = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        dot += z(r, c) * z(r, p);
        norm += z(r, p) * z(r, p);
      }
      for (std::size_t r = 0; r < n; ++r) z(r, c) -= dot / norm * z(r, p);
    }
  }
  return z;
}

}  // namespace

TEST_SUITE("decorrelation") {

TEST_CASE("rff_apply examples") {
  RFFBank bank{{0.7}, {0.0}};
  CHECK(rff_apply(0.0, bank)[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  RFFBank quarter{{3.1}, {std::numbers::pi / 2}};
  CHECK(std::abs(rff_apply(0.0, quarter)[0]) < 1e-12);
  Rng rng(1);
  const RFFBank random = RFFBank::sample(8, rng);
  for (int t = 0; t < 200; ++t) {
    for (double v : rff_apply(rng.normal(0.0, 10.0), random)) CHECK(std::abs(v) <= std::sqrt(2.0));
  }
}

TEST_CASE("rff bank sampling and validation") {
  Rng rng(2);
  const RFFBank bank = RFFBank::sample(500, rng);
  CHECK(bank.q() == 500);
  for (double p : bank.phases) CHECK((p >= 0.0 && p < 2.0 * std::numbers::pi));
  const double mean = std::accumulate(bank.freqs.begin(), bank.freqs.end(), 0.0) / 500.0;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(500.0));
  CHECK_NOTHROW(bank.validate());
  CHECK_THROWS_AS((RFFBank{{1.0}, {7.0}}).validate(), DomainError);
  CHECK_THROWS_AS((RFFBank{{1.0, 2.0}, {0.5}}).validate(), DomainError);
  CHECK_THROWS_AS((RFFBank{{}, {}}).validate(), DomainError);
}

TEST_CASE("unit weights reduce to the unweighted covariance") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 40));
    const auto zi = normals(n, rng), zj = normals(n, rng);
    const RFFBank f = RFFBank::sample(3, rng), g = RFFBank::sample(3, rng);
    const Dense2D c = weighted_partial_cov(zi, zj, std::vector<double>(n, 1.0), f, g);
    CHECK(numcore::max_abs_diff(c, oracle::partial_cov_unweighted(zi, zj, f, g)) < 1e-12);
  }
}

TEST_CASE("constant column gives a zero covariance under uniform weights") {
  Rng rng(4);
  const std::vector<double> zi(10, 0.37);
  const auto zj = normals(10, rng);
  const Dense2D c = weighted_partial_cov(zi, zj, std::vector<double>(10, 1.0),
                                         RFFBank::sample(2, rng), RFFBank::sample(2, rng));
  for (double v : c.values()) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("weighted covariance matches the term-by-term oracle") {
  Rng rng(5);
  for (int t = 0; t < 25; ++t) {
    const auto zi = normals(5, rng), zj = normals(5, rng);
    const auto w = positive_weights(5, rng);
    const RFFBank f = RFFBank::sample(2, rng), g = RFFBank::sample(2, rng);
    CHECK(numcore::max_abs_diff(weighted_partial_cov(zi, zj, w, f, g),
                                oracle::partial_cov_terms(zi, zj, w, f, g)) < 1e-12);
  }
}

TEST_CASE("weighted covariance needs two samples") {
  Rng rng(6);
  const RFFBank f = RFFBank::sample(1, rng);
  CHECK_THROWS_AS(weighted_partial_cov(std::vector<double>{1.0}, std::vector<double>{2.0},
                                       std::vector<double>{1.0}, f, f),
                  DomainError);
  CHECK_THROWS_AS(weighted_partial_cov(std::vector<double>{1.0, 2.0}, std::vector<double>{2.0},
                                       std::vector<double>{1.0, 1.0}, f, f),
                  DimensionError);
}

TEST_CASE("objective examples") {
  Rng rng(7);
  const FeatureMaps maps = FeatureMaps::sample(3, 1, rng);
  Dense2D dup(6, 3);
  for (std::size_t r = 0; r < 6; ++r) {
    dup(r, 0) = 0.5;
    dup(r, 1) = -1.0;
    dup(r, 2) = 2.0;
  }
  CHECK(decorrelation_objective(dup, std::vector<double>(6, 1.0), maps, sample_pairs(3, 1.0, 0)) ==
        doctest::Approx(0.0));

  const Dense2D z = oracle::random_matrix(12, 2, rng);
  const auto w = positive_weights(12, rng);
  const FeatureMaps m2 = FeatureMaps::sample(2, 2, rng);
  const Dense2D c = weighted_partial_cov(numcore::column(z, 0), numcore::column(z, 1), w,
                                         m2.f_bank(0), m2.g_bank(1));
  double fro = 0.0;
  for (double v : c.values()) fro += v * v;
  const std::vector<DimPair> one = {{0, 1}};
  CHECK(decorrelation_objective(z, w, m2, one) == doctest::Approx(fro).epsilon(1e-12));
}

TEST_CASE("objective is the sum over pairs") {
  Rng rng(8);
  const Dense2D z = oracle::random_matrix(15, 4, rng);
  const auto w = positive_weights(15, rng);
  const FeatureMaps maps = FeatureMaps::sample(4, 2, rng);
  const auto pairs = sample_pairs(4, 1.0, 0);
  double total = 0.0;
  for (const DimPair& p : pairs) {
    const std::vector<DimPair> single = {p};
    total += decorrelation_objective(z, w, maps, single);
  }
  CHECK(decorrelation_objective(z, w, maps, pairs) == doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("objective separates dependent from independent columns") {
  Rng rng(9);
  int wins = 0;
  for (int t = 0; t < 40; ++t) {
    const auto x = normals(256, rng), y = normals(256, rng);
    Dense2D dep(256, 2), ind(256, 2);
    for (std::size_t r = 0; r < 256; ++r) {
      dep(r, 0) = dep(r, 1) = ind(r, 0) = x[r];
      ind(r, 1) = y[r];
    }
    const FeatureMaps maps = FeatureMaps::sample(2, 5, rng);
    const std::vector<double> w(256, 1.0);
    const std::vector<DimPair> pair = {{0, 1}};
    if (decorrelation_objective(dep, w, maps, pair) > decorrelation_objective(ind, w, maps, pair))
      ++wins;
  }
  CHECK(wins >= 36);
}

TEST_CASE("weight gradient is finite and nonzero on random data") {
  Rng rng(10);
  const Dense2D z = oracle::random_matrix(64, 4, rng);
  const FeatureMaps maps = FeatureMaps::sample(4, 1, rng);
  const auto g = objective_grad_weights(z, std::vector<double>(64, 1.0), maps,
                                        sample_pairs(4, 1.0, 0), 0.0);
  double norm = 0.0;
  for (double v : g) {
    CHECK(std::isfinite(v));
    norm += v * v;
  }
  CHECK(norm > 0.0);
}

TEST_CASE("weight gradient matches finite differences") {
  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 16));
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(2, 4));
    const Dense2D z = oracle::random_matrix(n, d, rng);
    const FeatureMaps maps = FeatureMaps::sample(d, 1, rng);
    const auto pairs = sample_pairs(d, 1.0, 0);
    const double lambda = rng.uniform(0.0, 1.0);
    const auto w = positive_weights(n, rng);
    const auto analytic = objective_grad_weights(z, w, maps, pairs, lambda);
    auto f = [&](const Dense2D& wm) {
      const auto v = wm.values();
      double l2 = 0.0;
      for (double x : v) l2 += x * x;
      return decorrelation_objective(z, v, maps, pairs) + lambda * l2;
    };
    const Dense2D numeric = numcore::numeric_gradient(f, Dense2D(1, n, w), 1e-6);
    CHECK(numcore::max_relative_error(Dense2D(1, n, analytic), numeric) < 1e-4);
  }
}

TEST_CASE("twin samples receive equal gradients") {
  Rng rng(12);
  const Dense2D half = oracle::random_matrix(8, 3, rng);
  const Dense2D z = numcore::stack_rows(std::vector<Dense2D>{half, half});
  std::vector<double> w = positive_weights(8, rng);
  w.insert(w.end(), w.begin(), w.end());
  const FeatureMaps maps = FeatureMaps::sample(3, 2, rng);
  const auto g = objective_grad_weights(z, w, maps, sample_pairs(3, 1.0, 0), 0.5);
  for (std::size_t k = 0; k < 8; ++k) CHECK(g[k] == doctest::Approx(g[k + 8]).epsilon(1e-12));
}

TEST_CASE("identity maps measure the plain weighted covariance") {
  Rng rng(13);
  const Dense2D z = oracle::random_matrix(20, 2, rng);
  const auto w = positive_weights(20, rng);
  const FeatureMaps maps = FeatureMaps::identity(2);
  CHECK(maps.q() == 1);
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t n = 0; n < 20; ++n) {
    sx += w[n] * z(n, 0);
    sy += w[n] * z(n, 1);
    sxy += w[n] * w[n] * z(n, 0) * z(n, 1);
  }
  const double cov = (sxy - sx * sy / 20.0) / 19.0;
  const std::vector<DimPair> pair = {{0, 1}};
  CHECK(decorrelation_objective(z, w, maps, pair) == doctest::Approx(cov * cov).epsilon(1e-12));
}

TEST_CASE("sample_pairs examples") {
  const auto all = sample_pairs(4, 1.0, 0);
  CHECK(all == std::vector<DimPair>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(sample_pairs(10, 0.2, 5).size() == 1);
  CHECK(sample_pairs(10, 0.5, 3) == sample_pairs(10, 0.5, 3));
  CHECK(sample_pairs(10, 0.5, 3).size() == 10);
  CHECK_THROWS_AS(sample_pairs(10, 0.1, 1), DomainError);
  CHECK_THROWS_AS(sample_pairs(1, 1.0, 1), DomainError);
  CHECK_THROWS_AS(sample_pairs(4, 0.0, 1), DomainError);
}

TEST_CASE("projection keeps the sum and the floor") {
  Rng rng(14);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(1, 40));
    std::vector<double> w(n);
    for (double& v : w) v = rng.uniform(-2.0, 3.0);
    project_weights(w);
    WeightVector wv(w);
    CHECK(wv.satisfies_constraints());
  }
  std::vector<double> pinned = {-5.0, -5.0, 10.0};
  project_weights(pinned);
  CHECK(pinned[0] == kWeightFloor);
  CHECK(pinned[2] == doctest::Approx(3.0 - 2 * kWeightFloor));
}

TEST_CASE("optimize_weights examples") {
  Rng rng(15);
  ReweightConfig cfg;
  cfg.seed = 3;
  const Dense2D z = oracle::random_matrix(32, 4, rng);

  ReweightConfig none = cfg;
  none.epochs_reweight = 0;
  std::vector<double> start(32);
  for (double& v : start) v = rng.uniform(0.5, 1.5);
  project_weights(start);
  CHECK(optimize_weights(z, WeightVector(start), none).weights.values()[5] == start[5]);

  const ReweightResult r = optimize_weights(z, WeightVector::uniform(32), cfg);
  CHECK(r.weights.satisfies_constraints());
  CHECK(r.objective_trace.size() == 20);

  const Dense2D orth = orthogonal_columns(64, 3, rng);
  ReweightConfig linear = cfg;
  linear.feature_map = FeatureMapKind::identity;
  const ReweightResult near = optimize_weights(orth, WeightVector::uniform(64), linear);
  for (double v : near.weights.values()) CHECK(std::abs(v - 1.0) < 0.1);
  const ReweightResult near_rff = optimize_weights(orth, WeightVector::uniform(64), cfg);
  for (double v : near_rff.weights.values()) CHECK(std::abs(v - 1.0) < 0.1);

  CHECK_THROWS_AS(optimize_weights(z, WeightVector::uniform(31), cfg), DimensionError);
  ReweightConfig bad = cfg;
  bad.lr_w = 0.0;
  CHECK_THROWS_AS(optimize_weights(z, WeightVector::uniform(32), bad), ConfigError);
}

TEST_CASE("optimize_weights makes progress on most instances") {
  Rng rng(16);
  int improved = 0;
  for (int t = 0; t < 100; ++t) {
    Dense2D z = oracle::random_matrix(32, 4, rng);
    // Plant a nonlinear dependence so there is something to remove.
    for (std::size_t r = 0; r < 32; ++r) z(r, 1) = z(r, 0) * z(r, 0) + 0.3 * z(r, 1);
    ReweightConfig cfg;
    cfg.seed = rng.next_u64();
    const ReweightResult res = optimize_weights(z, WeightVector::uniform(32), cfg);
    CHECK(res.weights.satisfies_constraints());
    CHECK(res.warning == (res.final_objective > res.initial_objective));
    if (!res.warning) ++improved;
  }
  CHECK(improved >= 95);
}

TEST_CASE("optimize_weights with frozen prefix only moves local weights") {
  Rng rng(17);
  const Dense2D z = oracle::random_matrix(16, 3, rng);
  const std::vector<double> frozen(8, 1.0);
  ReweightConfig cfg;
  cfg.lr_w = 0.5;
  const ReweightResult r = optimize_weights(z, frozen, WeightVector::uniform(8), cfg);
  CHECK(r.weights.size() == 8);
  CHECK(r.weights.satisfies_constraints());
}

TEST_CASE("non-finite representations raise an optimization error") {
  Dense2D z(8, 2, 1.0);
  z(3, 1) = std::numeric_limits<double>::infinity();
  try {
    (void)optimize_weights(z, WeightVector::uniform(8), ReweightConfig{});
    FAIL("expected OptimizationError");
  } catch (const OptimizationError& e) {
    CHECK(e.iteration() == 0);
  }
}

TEST_CASE("invocation counter tracks entry points") {
  reset_invocation_count();
  CHECK(invocation_count() == 0);
  Rng rng(18);
  const Dense2D z = oracle::random_matrix(8, 2, rng);
  const FeatureMaps maps = FeatureMaps::sample(2, 1, rng);
  const std::vector<DimPair> pair = {{0, 1}};
  (void)decorrelation_objective(z, std::vector<double>(8, 1.0), maps, pair);
  (void)optimize_weights(z, WeightVector::uniform(8), ReweightConfig{});
  CHECK(invocation_count() == 2);
}

TEST_CASE("hsic examples") {
  Rng rng(19);
  const auto x = normals(256, rng), y = normals(256, rng);
  const auto dep = hsic_permutation_test(x, x, 200, 1);
  CHECK(dep.significant);
  CHECK(dep.statistic > dep.threshold);
  CHECK(hsic_gaussian(x, x).statistic > 0.0);

  int below = 0;
  for (int t = 0; t < 100; ++t) {
    const auto a = normals(256, rng), b = normals(256, rng);
    if (!hsic_permutation_test(a, b, 200, rng.next_u64()).significant) ++below;
  }
  CHECK(below >= 90);

  const std::vector<double> constant(20, 4.0);
  const HsicResult c = hsic_gaussian(constant, std::span<const double>(y).first(20));
  CHECK(c.statistic == 0.0);
  CHECK(c.degenerate);
  CHECK_THROWS_AS(hsic_gaussian(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}),
                  DomainError);
  CHECK(hsic_gaussian(x, y, 1.0).statistic >= 0.0);
}

TEST_CASE("hsic matches a direct trace computation") {
  Rng rng(20);
  const auto x = normals(12, rng), y = normals(12, rng);
  const double sigma = 0.8;
  const std::size_t n = 12;
  Dense2D k(n, n), l(n, n), h(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      k(a, b) = std::exp(-(x[a] - x[b]) * (x[a] - x[b]) / (2 * sigma * sigma));
      l(a, b) = std::exp(-(y[a] - y[b]) * (y[a] - y[b]) / (2 * sigma * sigma));
      h(a, b) = (a == b ? 1.0 : 0.0) - 1.0 / static_cast<double>(n);
    }
  const Dense2D khlh = numcore::matmul(numcore::matmul(numcore::matmul(k, h), l), h);
  double trace = 0.0;
  for (std::size_t a = 0; a < n; ++a) trace += khlh(a, a);
  CHECK(hsic_gaussian(x, y, sigma).statistic ==
        doctest::Approx(trace / static_cast<double>(n * n)).epsilon(1e-10));
}

}  // TEST_SUITE
