#include "oodgnn/numcore/tape.hpp"

#include "oodgnn/errors.hpp"

namespace oodgnn::numcore {

Var Tape::leaf(Dense2D value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Dense2D value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Dense2D value, std::vector<Var> inputs, BackwardRule rule) {
  Node node;
  node.value = std::move(value);
  node.rule = std::move(rule);
  node.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ContractError("Tape::record: operand from a different tape");
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Dense2D& Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty()) node.grad = Dense2D(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::store_grad(std::size_t id, Dense2D&& g) {
  Node& node = nodes_[id];
  if (node.grad.empty()) {
    node.grad = std::move(g);
  } else {
    add_inplace(node.grad, g);
  }
}

Dense2D& Tape::ensure_grad(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad = Dense2D(node.value.rows(), node.value.cols());
  return node.grad;
}

void Tape::backward(Var root) {
  if (&root.tape() != this) throw ContractError("Tape::backward: root from a different tape");
  const Dense2D& root_value = nodes_[root.id()].value;
  if (root_value.rows() != 1 || root_value.cols() != 1) {
    throw ContractError("Tape::backward: root must be a 1x1 scalar, got " +
                        root_value.shape_string());
  }
  if (!nodes_[root.id()].requires_grad) return;

  // Seed into a scratch gradient so repeated calls accumulate into stored
  // gradients instead of compounding the seed.
  std::vector<Dense2D> pending(root.id() + 1);
  pending[root.id()] = Dense2D(1, 1, 1.0);

  std::vector<const Dense2D*> in_values;
  std::vector<Dense2D*> in_grads;
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    if (pending[id].empty()) continue;
    Node& node = nodes_[id];
    if (!node.rule) {
      store_grad(id, std::move(pending[id]));
      continue;
    }

    in_values.clear();
    in_grads.clear();
    for (std::size_t in : node.inputs) {
      in_values.push_back(&nodes_[in].value);
      if (nodes_[in].requires_grad) {
        if (pending[in].empty()) pending[in] = Dense2D(nodes_[in].value.rows(), nodes_[in].value.cols());
        in_grads.push_back(&pending[in]);
      } else {
        in_grads.push_back(nullptr);
      }
    }
    node.rule(pending[id], in_values, node.value, in_grads);
    store_grad(id, std::move(pending[id]));
    pending[id] = Dense2D();
  }
}

void Tape::zero_grad() {
  for (Node& node : nodes_) node.grad = Dense2D();
}

}  // namespace oodgnn::numcore
