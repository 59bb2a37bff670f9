#pragma once

#include <span>
#include <vector>

#include "oodgnn/encoder/gin.hpp"
#include "oodgnn/numcore/adam.hpp"

namespace oodgnn::encoder {

// Gradients of the weighted prediction loss, aligned with named_parameters().
struct LossGradients {
  double loss = 0.0;
  Dense2D logits;
  std::vector<Dense2D> grads;
};

// One recorded forward pass through the encoder. The representations are
// available before the loss is formed, so sample weights can be computed from
// them and then fed back into the same pass.
class ForwardPass {
 public:
  ForwardPass(const Model& model, std::span<const Graph* const> graphs,
              const EncoderOptions& opts = {});
  ForwardPass(const ForwardPass&) = delete;
  ForwardPass& operator=(const ForwardPass&) = delete;

  const Dense2D& representations() const { return z_.value(); }
  std::span<const int> labels() const { return labels_; }

  // Classifier, weighted cross-entropy and backward. Weights are constants.
  // Call at most once.
  LossGradients backward(std::span<const double> weights);

 private:
  EncoderOptions opts_;
  Tape tape_;
  EncoderVars enc_;
  ClassifierVars clf_;
  Var z_;
  std::vector<int> labels_;
  bool consumed_ = false;
};

// Sum_n w_n CE(R(Phi(G_n)), Y_n) / B and its parameter gradients.
LossGradients compute_gradients(const Model& model, std::span<const Graph* const> graphs,
                                std::span<const double> weights);

// One optimizer step on encoder and classifier from precomputed gradients.
// Throws TrainingDivergence if the loss or any gradient is non-finite.
void apply_gradients(Model& model, numcore::Adam& optimizer, const LossGradients& grads);

struct StepResult {
  double loss = 0.0;  // before the step
  Dense2D logits;
};

// Weighted prediction step: forward, backward, one Adam update. The sample
// weights are held fixed.
StepResult weighted_prediction_step(Model& model, numcore::Adam& optimizer,
                                    std::span<const Graph* const> graphs,
                                    std::span<const double> weights);

}  // namespace oodgnn::encoder
