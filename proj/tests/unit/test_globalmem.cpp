#include <doctest.h>

#include <cmath>

#include "oodgnn/errors.hpp"
#include "oodgnn/globalmem/memory.hpp"
#include "../support/oracles.hpp"

using namespace oodgnn;
using namespace oodgnn::globalmem;

TEST_SUITE("globalmem") {

TEST_CASE("init_memory contract") {
  const GlobalMemory m = init_memory(1, 4, 8, {0.9});
  CHECK(m.k_groups() == 1);
  CHECK(m.z_group(0) == Dense2D(4, 8, 0.0));
  CHECK(m.w_group(0) == std::vector<double>(4, 1.0));
  CHECK(m.gammas() == std::vector<double>{kDefaultGamma});

  CHECK_THROWS_AS(init_memory(1, 4, 8, {1.0}), DomainError);
  CHECK_THROWS_AS(init_memory(1, 4, 8, {-0.1}), DomainError);
  CHECK_THROWS_AS(init_memory(2, 4, 8, {0.5}), DomainError);
  CHECK_THROWS_AS(init_memory(1, 0, 8, {0.5}), DomainError);
}

TEST_CASE("empty memory passes locals through") {
  GlobalMemory m = init_memory(0, 3, 2, {});
  Rng rng(1);
  const Dense2D z = oracle::random_matrix(3, 2, rng);
  const std::vector<double> w = {0.5, 1.0, 1.5};
  const auto c = m.concat(z, w);
  CHECK(c.z == z);
  CHECK(c.w == w);
  // A ragged local batch is fine without memory.
  const Dense2D ragged = oracle::random_matrix(2, 2, rng);
  CHECK(m.concat(ragged, std::vector<double>{1.0, 1.0}).z == ragged);
  m.momentum_update(z, w);
  CHECK(m.k_groups() == 0);
}

TEST_CASE("concat ordering") {
  Rng rng(2);
  GlobalMemory m = init_memory(2, 3, 2, {0.5, 0.9});
  m.set_group(0, Dense2D(3, 2, 1.0), {1.0, 1.0, 1.0});
  m.set_group(1, Dense2D(3, 2, 2.0), {2.0, 2.0, 2.0});
  const Dense2D z = oracle::random_matrix(3, 2, rng);
  const std::vector<double> w = {0.7, 0.8, 1.5};
  const auto c = m.concat(z, w);
  REQUIRE(c.z.rows() == 9);
  CHECK(c.z(0, 0) == 1.0);
  CHECK(c.z(3, 1) == 2.0);
  CHECK(c.w[5] == 2.0);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t col = 0; col < 2; ++col) CHECK(c.z(6 + r, col) == z(r, col));
    CHECK(c.w[6 + r] == w[r]);
  }

  GlobalMemory one = init_memory(1, 3, 2, {0.9});
  const auto c1 = one.concat(z, w);
  CHECK(c1.z.rows() == 6);
  CHECK(c1.z(0, 0) == 0.0);

  CHECK_THROWS_AS(m.concat(oracle::random_matrix(2, 2, rng), std::vector<double>{1, 1}),
                  DimensionError);
  CHECK_THROWS_AS(m.concat(z, std::vector<double>{1, 1}), DimensionError);
}

TEST_CASE("momentum_update examples") {
  GlobalMemory m = init_memory(1, 1, 1, {0.9});
  m.momentum_update(Dense2D(1, 1, 1.0), std::vector<double>{3.0});
  CHECK(m.z_group(0)(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(m.w_group(0)[0] == doctest::Approx(0.9 + 0.3).epsilon(1e-15));

  Rng rng(3);
  const Dense2D z = oracle::random_matrix(4, 3, rng);
  const std::vector<double> w = {0.2, 1.4, 1.1, 1.3};
  GlobalMemory replace = init_memory(1, 4, 3, {0.0});
  replace.momentum_update(z, w);
  CHECK(replace.z_group(0) == z);
  CHECK(replace.w_group(0) == w);

  GlobalMemory fixed = init_memory(1, 4, 3, {0.7});
  fixed.set_group(0, z, w);
  fixed.momentum_update(z, w);
  CHECK(numcore::max_abs_diff(fixed.z_group(0), z) < 1e-15);

  CHECK_THROWS_AS(fixed.momentum_update(Dense2D(3, 3), w), DimensionError);
}

TEST_CASE("updates are convex combinations") {
  Rng rng(4);
  GlobalMemory m = init_memory(2, 5, 3, {0.3, 0.8});
  m.set_group(0, oracle::random_matrix(5, 3, rng), std::vector<double>(5, 1.0));
  m.set_group(1, oracle::random_matrix(5, 3, rng), std::vector<double>(5, 1.0));
  for (int step = 0; step < 10; ++step) {
    const Dense2D z = oracle::random_matrix(5, 3, rng);
    std::vector<double> w(5);
    for (double& v : w) v = rng.uniform(0.0, 2.0);
    const GlobalMemory before = m;
    m.momentum_update(z, w);
    for (std::size_t k = 0; k < 2; ++k) {
      for (std::size_t r = 0; r < 5; ++r) {
        for (std::size_t c = 0; c < 3; ++c) {
          const double lo = std::min(before.z_group(k)(r, c), z(r, c));
          const double hi = std::max(before.z_group(k)(r, c), z(r, c));
          CHECK((m.z_group(k)(r, c) >= lo - 1e-15 && m.z_group(k)(r, c) <= hi + 1e-15));
        }
        const double lo = std::min(before.w_group(k)[r], w[r]);
        const double hi = std::max(before.w_group(k)[r], w[r]);
        CHECK((m.w_group(k)[r] >= lo - 1e-15 && m.w_group(k)[r] <= hi + 1e-15));
      }
    }
  }
}

TEST_CASE("concat then dropping the memory rows recovers the locals exactly") {
  Rng rng(5);
  GlobalMemory m = init_memory(3, 4, 2, {0.1, 0.5, 0.9});
  const Dense2D z = oracle::random_matrix(4, 2, rng);
  const std::vector<double> w = {0.3, 1.2, 1.7, 0.8};
  const auto c = m.concat(z, w);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t col = 0; col < 2; ++col) CHECK(c.z(12 + r, col) == z(r, col));
    CHECK(c.w[12 + r] == w[r]);
  }
}

}  // TEST_SUITE
