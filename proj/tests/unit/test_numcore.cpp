#include <doctest.h>

#include <cmath>
#include <vector>

#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/adam.hpp"
#include "oodgnn/numcore/dense.hpp"
#include "oodgnn/numcore/grad_check.hpp"
#include "oodgnn/numcore/rng.hpp"
#include "oodgnn/numcore/tape.hpp"
#include "../support/oracles.hpp"

using namespace oodgnn;
using namespace oodgnn::numcore;

TEST_SUITE("numcore") {

TEST_CASE("dense2d shapes and construction") {
  Dense2D m(2, 3, 1.5);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.size() == 6);
  CHECK(m(1, 2) == 1.5);
  CHECK_THROWS_AS(Dense2D(0, 3), DimensionError);
  CHECK_THROWS_AS(Dense2D(2, 2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
  CHECK(Dense2D().empty());
  const Dense2D r = Dense2D::from_rows({{1, 2}, {3, 4}});
  CHECK(r(1, 0) == 3);
  CHECK_THROWS(Dense2D::from_rows({{1, 2}, {3}}));
}

TEST_CASE("matmul examples") {
  const Dense2D a = Dense2D::from_rows({{1, 2}, {3, 4}});
  CHECK(matmul(Dense2D::identity(2), a) == a);
  CHECK(matmul(a, Dense2D::from_rows({{0}, {0}})) == Dense2D::from_rows({{0}, {0}}));
  CHECK(matmul(a, Dense2D::from_rows({{5}, {6}})) == Dense2D::from_rows({{17}, {39}}));
}

TEST_CASE("matmul shape mismatch names both shapes") {
  const Dense2D a(2, 3), b(2, 2);
  try {
    (void)matmul(a, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("2x2") != std::string::npos);
  }
}

TEST_CASE("matmul is associative on random triples") {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const auto p = static_cast<std::size_t>(rng.uniform_int(1, 6));
    const Dense2D a = oracle::random_matrix(n, k, rng), b = oracle::random_matrix(k, m, rng),
                  c = oracle::random_matrix(m, p, rng);
    CHECK(max_abs_diff(matmul(matmul(a, b), c), matmul(a, matmul(b, c))) < 1e-9);
  }
}

TEST_CASE("transposed products agree with explicit transposes") {
  Rng rng(3);
  const Dense2D a = oracle::random_matrix(5, 3, rng), b = oracle::random_matrix(5, 4, rng),
                c = oracle::random_matrix(4, 3, rng);
  CHECK(max_abs_diff(matmul_tn(a, b), matmul(transpose(a), b)) < 1e-12);
  CHECK(max_abs_diff(matmul_nt(a, c), matmul(a, transpose(c))) < 1e-12);
}

TEST_CASE("relu forward and zero subgradient at zero") {
  Tape tape;
  Var x = tape.leaf(Dense2D::from_rows({{-1, 0, 2}}));
  Var y = relu(x);
  CHECK(y.value() == Dense2D::from_rows({{0, 0, 2}}));
  tape.backward(sum(y));
  CHECK(x.grad() == Dense2D::from_rows({{0, 0, 1}}));

  Tape t2;
  CHECK(relu(t2.leaf(Dense2D(2, 2, -3.0))).value() == Dense2D(2, 2, 0.0));
  CHECK(relu(t2.leaf(Dense2D(2, 2, 3.0))).value() == Dense2D(2, 2, 3.0));
}

TEST_CASE("softmax cross entropy examples") {
  Tape tape;
  const std::vector<int> labels = {3, 7};
  Var uniform = tape.leaf(Dense2D(2, 10, 0.0));
  CHECK(softmax_cross_entropy(uniform, labels, std::vector<double>{1, 1}).value().item() ==
        doctest::Approx(std::log(10.0)).epsilon(1e-12));

  Dense2D confident(2, 10, 0.0);
  confident(0, 3) = 500.0;
  confident(1, 7) = 500.0;
  CHECK(softmax_cross_entropy(tape.leaf(confident), labels, std::vector<double>{1, 1})
            .value()
            .item() < 1e-12);
  CHECK(softmax_cross_entropy(uniform, labels, std::vector<double>{0, 0}).value().item() == 0.0);

  CHECK_THROWS_AS(softmax_cross_entropy(uniform, std::vector<int>{3, 10}, std::vector<double>{1, 1}),
                  IndexError);
  CHECK_THROWS_AS(softmax_cross_entropy(uniform, std::vector<int>{-1, 0}, std::vector<double>{1, 1}),
                  IndexError);
}

TEST_CASE("backward examples") {
  Tape tape;
  Var x = tape.leaf(Dense2D(3, 2, 0.7));
  tape.backward(sum(x));
  CHECK(x.grad() == Dense2D(3, 2, 1.0));

  Tape t2;
  Var a = t2.leaf(Dense2D::scalar(3.0));
  Var b = t2.leaf(Dense2D::scalar(-2.0));
  t2.backward(mul(a, b));
  CHECK(a.grad().item() == -2.0);
  CHECK(b.grad().item() == 3.0);
}

TEST_CASE("backward requires a scalar root") {
  Tape tape;
  Var x = tape.leaf(Dense2D(2, 2, 1.0));
  CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("repeated backward accumulates, zero_grad resets") {
  Tape tape;
  Var x = tape.leaf(Dense2D(1, 3, 2.0));
  Var s = sum(mul(x, x));
  tape.backward(s);
  tape.backward(s);
  CHECK(x.grad() == Dense2D(1, 3, 8.0));
  tape.zero_grad();
  tape.backward(s);
  CHECK(x.grad() == Dense2D(1, 3, 4.0));
}

TEST_CASE("shared subexpressions accumulate once per path") {
  Rng rng(11);
  const Dense2D xv = oracle::random_matrix(3, 3, rng);
  // y = x*x reused twice versus recomputed twice.
  Tape shared;
  Var x1 = shared.leaf(xv);
  Var y = mul(x1, x1);
  shared.backward(sum(add(matmul(y, y), y)));

  Tape dup;
  Var x2 = dup.leaf(xv);
  Var ya = mul(x2, x2), yb = mul(x2, x2), yc = mul(x2, x2);
  dup.backward(sum(add(matmul(ya, yb), yc)));
  CHECK(max_abs_diff(x1.grad(), x2.grad()) < 1e-12);
}

TEST_CASE("constants receive no gradient") {
  Tape tape;
  Var c = tape.constant(Dense2D(2, 2, 1.0));
  Var x = tape.leaf(Dense2D(2, 2, 2.0));
  tape.backward(sum(mul(c, x)));
  CHECK_FALSE(tape.requires_grad(c));
  CHECK(c.grad() == Dense2D(2, 2, 0.0));
  CHECK(x.grad() == Dense2D(2, 2, 1.0));
}

TEST_CASE("grad_check examples") {
  Rng rng(5);
  const Dense2D x = oracle::random_matrix(4, 3, rng);
  CHECK(grad_check([](Tape&, Var v) { return sum(v); }, x, 1e-5) < 1e-10);

  const Dense2D a = oracle::random_matrix(3, 3, rng);
  const Dense2D sym = [&] {
    Dense2D s = matmul(transpose(a), a);
    return s;
  }();
  const Dense2D x3 = oracle::random_matrix(3, 3, rng);
  // f(X) = sum(X .* (S X)) has gradient (S + S^T) X.
  auto quad = [&](Tape& t, Var v) { return sum(mul(v, matmul(t.constant(sym), v))); };
  CHECK(grad_check(quad, x3, 1e-5) < 1e-6);
}

TEST_CASE("every differentiable op passes grad_check on random inputs") {
  Rng rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto c = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const Dense2D x = oracle::random_matrix(r, c, rng);
    const Dense2D other = oracle::random_matrix(r, c, rng);
    const Dense2D right = oracle::random_matrix(c, 3, rng);
    const Dense2D bias = oracle::random_matrix(1, c, rng);
    const Dense2D probe = oracle::random_matrix(r, c, rng);
    auto weighted = [&](Tape& t, Var v) { return sum(mul(v, t.constant(probe))); };
    CAPTURE(r);
    CAPTURE(c);
    CHECK(grad_check([&](Tape& t, Var v) { return sum(matmul(v, t.constant(right))); }, x, 1e-5) <
          1e-4);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, add(v, t.constant(other))); }, x,
                     1e-5) < 1e-4);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, sub(t.constant(other), v)); }, x,
                     1e-5) < 1e-4);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, mul(v, v)); }, x, 1e-5) < 1e-4);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, add_row_bias(v, t.constant(bias))); },
                     x, 1e-5) < 1e-4);
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, scale(v, -1.7)); }, x, 1e-5) < 1e-4);
    // Inputs are kept away from the kink so central differences stay on one side.
    Dense2D away = x;
    for (double& v : away.values()) v += v >= 0 ? 0.1 : -0.1;
    CHECK(grad_check([&](Tape& t, Var v) { return weighted(t, relu(v)); }, away, 1e-5) < 1e-4);
  }
}

TEST_CASE("scale_by differentiates through both operands") {
  Rng rng(8);
  const Dense2D x = oracle::random_matrix(3, 4, rng);
  const Dense2D probe = oracle::random_matrix(3, 4, rng);
  CHECK(grad_check(
            [&](Tape& t, Var v) { return sum(mul(scale_by(v, t.constant(Dense2D::scalar(1.3))), t.constant(probe))); },
            x, 1e-5) < 1e-4);
  CHECK(grad_check(
            [&](Tape& t, Var s) { return sum(mul(scale_by(t.constant(x), s), t.constant(probe))); },
            Dense2D::scalar(0.4), 1e-5) < 1e-4);
}

TEST_CASE("segment_sum and neighbor_sum") {
  Tape tape;
  Var x = tape.leaf(Dense2D::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  Var s = segment_sum(x, {0, 2, 3});
  CHECK(s.value() == Dense2D::from_rows({{4, 6}, {5, 6}}));
  Var nb = neighbor_sum(x, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}});
  CHECK(nb.value() == Dense2D::from_rows({{3, 4}, {6, 8}, {3, 4}}));
  CHECK_THROWS_AS(neighbor_sum(x, std::vector<std::pair<std::size_t, std::size_t>>{{0, 3}}),
                  IndexError);

  Rng rng(4);
  const Dense2D xv = oracle::random_matrix(5, 3, rng);
  const Dense2D probe = oracle::random_matrix(5, 3, rng);
  const std::vector<std::pair<std::size_t, std::size_t>> edges = {{0, 1}, {1, 4}, {2, 3}, {0, 4}};
  CHECK(grad_check([&](Tape& t, Var v) { return sum(mul(neighbor_sum(v, edges), t.constant(probe))); },
                   xv, 1e-5) < 1e-4);
  const Dense2D probe2 = oracle::random_matrix(2, 3, rng);
  CHECK(grad_check(
            [&](Tape& t, Var v) { return sum(mul(segment_sum(v, {0, 3, 5}), t.constant(probe2))); },
            xv, 1e-5) < 1e-4);
}

TEST_CASE("softmax cross entropy gradient matches finite differences") {
  Rng rng(12);
  const Dense2D logits = oracle::random_matrix(4, 5, rng);
  const std::vector<int> labels = {0, 4, 2, 2};
  const std::vector<double> weights = {0.5, 1.5, 1.0, 1.0};
  CHECK(grad_check([&](Tape&, Var v) { return softmax_cross_entropy(v, labels, weights); }, logits,
                   1e-5) < 1e-4);
}

TEST_CASE("composite MLP loss matches finite differences") {
  Rng rng(99);
  const Dense2D x = oracle::random_matrix(6, 4, rng);
  const Dense2D w2 = oracle::random_matrix(5, 3, rng);
  const Dense2D b1 = oracle::random_matrix(1, 5, rng);
  const Dense2D w1 = oracle::random_matrix(4, 5, rng);
  const std::vector<int> labels = {0, 1, 2, 0, 1, 2};
  const std::vector<double> weights(6, 1.0);
  auto loss_w1 = [&](Tape& t, Var w) {
    Var h = relu(add_row_bias(matmul(t.constant(x), w), t.constant(b1)));
    return softmax_cross_entropy(matmul(h, t.constant(w2)), labels, weights);
  };
  CHECK(grad_check(loss_w1, w1, 1e-5) < 1e-4);
}

TEST_CASE("max_relative_error uses the floor denominator") {
  CHECK(max_relative_error(Dense2D::scalar(0.0), Dense2D::scalar(1e-12)) ==
        doctest::Approx(1e-4));
  CHECK(max_relative_error(Dense2D::scalar(2.0), Dense2D::scalar(1.0)) == doctest::Approx(0.5));
}

TEST_CASE("adam step matches the closed form for the first update") {
  Dense2D p = Dense2D::from_rows({{1.0, -2.0}});
  const Dense2D g = Dense2D::from_rows({{0.5, -4.0}});
  Adam adam(AdamConfig{.lr = 0.1});
  std::vector<Dense2D*> params{&p};
  std::vector<const Dense2D*> grads{&g};
  adam.step(params, grads);
  // Bias-corrected first step moves each entry by lr * sign(g) (up to eps).
  CHECK(p(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p(0, 1) == doctest::Approx(-1.9).epsilon(1e-7));
  CHECK(adam.steps_taken() == 1);
}

TEST_CASE("adam minimizes a quadratic") {
  Dense2D p = Dense2D::from_rows({{3.0, -5.0}});
  Adam adam(AdamConfig{.lr = 0.05});
  for (int i = 0; i < 2000; ++i) {
    Dense2D g = p;
    for (double& v : g.values()) v *= 2.0;
    std::vector<Dense2D*> params{&p};
    std::vector<const Dense2D*> grads{&g};
    adam.step(params, grads);
  }
  CHECK(std::abs(p(0, 0)) < 1e-3);
  CHECK(std::abs(p(0, 1)) < 1e-3);
}

TEST_CASE("rng is reproducible and roughly calibrated") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(1);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    sum += v;
    sq += v * v;
  }
  CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const auto k = r.uniform_int(3, 5);
    CHECK((k >= 3 && k <= 5));
  }
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

}  // TEST_SUITE
