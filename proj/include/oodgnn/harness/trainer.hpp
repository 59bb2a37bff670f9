#pragma once

#include <functional>
#include <span>
#include <vector>

#include "oodgnn/decorrelation/reweight.hpp"
#include "oodgnn/encoder/checkpoint.hpp"
#include "oodgnn/encoder/gin.hpp"
#include "oodgnn/globalmem/memory.hpp"
#include "oodgnn/graphdata/graph.hpp"
#include "oodgnn/harness/config.hpp"

namespace oodgnn::harness {

struct EpochRecord {
  int epoch = 0;
  double weighted_loss = 0.0;  // mean over batches
  double decorrelation = 0.0;  // mean final decorrelation over batches; 0 for the baseline
  double train_accuracy = 0.0;  // in-flight, from the logits seen during the epoch
  double test_accuracy = 0.0;
};

struct RunReport {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  double final_train_accuracy = 0.0;
  double final_test_accuracy = 0.0;
  double wall_seconds = 0.0;
  // Local weights of every batch of the last epoch, concatenated.
  std::vector<double> final_epoch_weights;
  // Some batch of the last epoch had weights with nonzero spread.
  bool nontrivial_weights = false;
  std::size_t reweight_warnings = 0;
  std::size_t batches_per_epoch = 0;
};

// Called after the weights of each batch are fixed, before the model step.
struct TrainHooks {
  std::function<void(int epoch, std::size_t batch, const decorrelation::WeightVector& weights)>
      on_weights;
};

struct TrainResult {
  RunReport report;
  encoder::Model model;
  globalmem::GlobalMemory memory;
};

// Alternates sample reweighting and weighted prediction steps for cfg.epochs
// epochs. Throws TrainingDivergence carrying the epoch and batch on a
// non-finite loss or gradient.
TrainResult train(const TrainConfig& cfg, const graphdata::Dataset& train_set,
                  const graphdata::Dataset& test_set, const TrainHooks& hooks = {});

// Argmax accuracy over the whole dataset.
double evaluate(const encoder::Model& model, const graphdata::Dataset& data);
double evaluate(const encoder::Manifest& checkpoint, const graphdata::Dataset& data);

// Model parameters and memory state in one manifest.
encoder::Manifest make_checkpoint(const TrainResult& result);
globalmem::GlobalMemory restore_memory(const encoder::Manifest& checkpoint);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

// Fixed-width bins over [0, max(2, 1.0001 * max w)].
Histogram weight_histogram(std::span<const double> weights, std::size_t bins = 40);
// Histogram of the last epoch's weights. Throws ContractError for the
// baseline, whose weights are all one by construction.
Histogram weight_histogram(const RunReport& report, std::size_t bins = 40);

}  // namespace oodgnn::harness
