#include "oodgnn/encoder/training_step.hpp"

#include <cmath>

#include "oodgnn/errors.hpp"

namespace oodgnn::encoder {

ForwardPass::ForwardPass(const Model& model, std::span<const Graph* const> graphs,
                         const EncoderOptions& opts)
    : opts_(opts) {
  const GraphBatch batch = make_batch(graphs);
  if (batch.features.cols() != model.encoder.input_dim) {
    throw DimensionError("ForwardPass: features " + batch.features.shape_string() +
                         " do not match encoder input_dim " +
                         std::to_string(model.encoder.input_dim));
  }
  enc_ = bind(tape_, model.encoder, true);
  clf_ = bind(tape_, model.classifier, true);
  z_ = encode_batch(enc_, tape_.constant(batch.features), batch, opts_);
  labels_.reserve(graphs.size());
  for (const Graph* g : graphs) labels_.push_back(g->label);
}

LossGradients ForwardPass::backward(std::span<const double> weights) {
  if (consumed_) throw ContractError("ForwardPass::backward called twice");
  consumed_ = true;
  Var logits = classify(clf_, z_, opts_);
  Var loss = softmax_cross_entropy(logits, labels_, weights);

  LossGradients out;
  out.loss = loss.value().item();
  out.logits = logits.value();
  if (!std::isfinite(out.loss)) {
    throw TrainingDivergence("weighted prediction loss is not finite", -1, -1);
  }
  tape_.backward(loss);
  for (const LayerVars& layer : enc_.layers) {
    for (Var v : {layer.eps, layer.w1, layer.b1, layer.w2, layer.b2}) out.grads.push_back(v.grad());
  }
  for (Var v : {clf_.w1, clf_.b1, clf_.w2, clf_.b2}) out.grads.push_back(v.grad());
  return out;
}

LossGradients compute_gradients(const Model& model, std::span<const Graph* const> graphs,
                                std::span<const double> weights) {
  ForwardPass pass(model, graphs);
  return pass.backward(weights);
}

void apply_gradients(Model& model, numcore::Adam& optimizer, const LossGradients& grads) {
  auto params = named_parameters(model);
  if (params.size() != grads.grads.size()) {
    throw ContractError("apply_gradients: gradient list does not match the model");
  }
  std::vector<Dense2D*> values;
  std::vector<const Dense2D*> gradients;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!numcore::all_finite(grads.grads[k])) {
      throw TrainingDivergence("non-finite gradient for " + params[k].name, -1, -1);
    }
    values.push_back(params[k].value);
    gradients.push_back(&grads.grads[k]);
  }
  optimizer.step(values, gradients);
}

StepResult weighted_prediction_step(Model& model, numcore::Adam& optimizer,
                                    std::span<const Graph* const> graphs,
                                    std::span<const double> weights) {
  LossGradients grads = compute_gradients(model, graphs, weights);
  apply_gradients(model, optimizer, grads);
  return {grads.loss, std::move(grads.logits)};
}

}  // namespace oodgnn::encoder
