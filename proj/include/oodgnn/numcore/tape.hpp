#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "oodgnn/numcore/dense.hpp"

namespace oodgnn::numcore {

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
// lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Dense2D& value() const;
  const Dense2D& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Local backward rule: receives the gradient flowing into the node's output,
// the operand values and the node's own value, and accumulates into the operand
// gradients. Entries of `input_grads` are null for operands that need no
// gradient.
using BackwardRule = std::function<void(const Dense2D& grad_out,
                                        std::span<const Dense2D* const> inputs,
                                        const Dense2D& output,
                                        std::span<Dense2D* const> input_grads)>;

// Operation tape for reverse-mode differentiation. Nodes are appended in
// evaluation order, so the tape is already topologically sorted and backward
// walks it in reverse.
//
// Gradients accumulate across backward() calls; call zero_grad() in between.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Dense2D value);
  Var constant(Dense2D value);
  Var record(Dense2D value, std::vector<Var> inputs, BackwardRule rule);

  void backward(Var root);
  void zero_grad();

  const Dense2D& value(Var v) const { return nodes_[v.id()].value; }
  // Gradient of a node; a zero matrix until backward reaches it.
  const Dense2D& grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Dense2D value;
    mutable Dense2D grad;
    std::vector<std::size_t> inputs;
    BackwardRule rule;
    bool requires_grad = false;
  };

  Dense2D& ensure_grad(std::size_t id);
  void store_grad(std::size_t id, Dense2D&& g);

  std::vector<Node> nodes_;
};

inline const Dense2D& Var::value() const { return tape_->value(*this); }
inline const Dense2D& Var::grad() const { return tape_->grad(*this); }

// Differentiable primitives. All operands must live on the same tape.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
// a + 1 x cols bias broadcast over rows.
Var add_row_bias(Var a, Var bias);
// Elementwise max(0, x); the subgradient at exactly 0 is 0.
Var relu(Var a);
Var scale(Var a, double factor);
// s * a with s a learnable 1x1 node.
Var scale_by(Var a, Var s);
// Sum of all entries, 1x1.
Var sum(Var a);
// Sum of rows within each [offsets[g], offsets[g+1]) segment; output has
// offsets.size()-1 rows.
Var segment_sum(Var a, std::vector<std::size_t> offsets);
// out[u] += a[v] and out[v] += a[u] for every undirected pair (u, v).
Var neighbor_sum(Var a, std::span<const std::pair<std::size_t, std::size_t>> edges);
// (1/B) * sum_n weights[n] * CE(softmax(logits_n), labels[n]), 1x1. Weights are
// constants.
Var softmax_cross_entropy(Var logits, std::span<const int> labels,
                          std::span<const double> weights);

}  // namespace oodgnn::numcore
