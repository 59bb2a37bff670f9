#include "oodgnn/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numeric>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "oodgnn/encoder/training_step.hpp"
#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/adam.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::harness {

namespace {

using decorrelation::WeightVector;
using numcore::Dense2D;
using encoder::Manifest;
using encoder::Model;
using graphdata::Dataset;
using graphdata::Graph;

constexpr std::size_t kEvalChunk = 256;

// Each tape node owns a freshly allocated matrix of a few hundred KB. With
// glibc's default thresholds those come from mmap and are returned on free,
// so training spends a fifth of its time in page faults. Keeping them on the
// heap fixes that.
void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
  });
#endif
}

std::size_t argmax_row(const Dense2D& logits, std::size_t r) {
  const auto row = logits.row(r);
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t count_correct(const Dense2D& logits, std::span<const Graph* const> graphs) {
  std::size_t correct = 0;
  for (std::size_t r = 0; r < graphs.size(); ++r) {
    if (static_cast<int>(argmax_row(logits, r)) == graphs[r]->label) ++correct;
  }
  return correct;
}

double spread(std::span<const double> w) {
  if (w.empty()) return 0.0;
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(w.size()));
}

void check_compatible(const TrainConfig& cfg, const Dataset& data, const char* which) {
  graphdata::validate(data);
  if (data.graphs.empty()) throw DataError(std::string(which) + " set is empty");
  if (data.task_kind != graphdata::TaskKind::classification) {
    throw ConfigError("training supports classification datasets only");
  }
  for (const Graph& g : data.graphs) {
    if (g.label < 0 || g.label >= cfg.num_classes) {
      throw DataError(std::string(which) + " set has label " + std::to_string(g.label) +
                      " outside [0, " + std::to_string(cfg.num_classes) + ")");
    }
  }
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const Dataset& train_set, const Dataset& test_set,
                  const TrainHooks& hooks) {
  cfg.validate();
  check_compatible(cfg, train_set, "train");
  check_compatible(cfg, test_set, "test");
  if (train_set.feature_dim != test_set.feature_dim) {
    throw DimensionError("train and test feature dimensions differ");
  }
  tune_allocator();
  const auto started = std::chrono::steady_clock::now();

  TrainResult result;
  result.report.config = cfg;
  result.model = encoder::init_model(train_set.feature_dim, cfg.d, cfg.num_layers,
                                     static_cast<std::size_t>(cfg.num_classes), mix_seed(cfg.seed, 1));
  result.memory = globalmem::init_memory(cfg.uses_memory() ? cfg.memory_k : 0, cfg.batch_size,
                                         cfg.d, cfg.uses_memory() ? cfg.gammas : std::vector<double>{});
  numcore::Adam adam(numcore::AdamConfig{.lr = cfg.lr});
  const bool reweighting = cfg.mode != Mode::baseline_uniform;

  const std::size_t n = train_set.graphs.size();
  // Memory groups have a fixed batch size, so a ragged last batch is dropped
  // while memory is in use.
  std::size_t batches = cfg.uses_memory() ? n / cfg.batch_size
                                          : (n + cfg.batch_size - 1) / cfg.batch_size;
  if (batches == 0) {
    throw DataError("train set has " + std::to_string(n) + " graphs, fewer than one batch of " +
                    std::to_string(cfg.batch_size));
  }
  result.report.batches_per_epoch = batches;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order.begin(), order.end());
    const bool last_epoch = epoch + 1 == cfg.epochs;
    if (last_epoch) result.report.final_epoch_weights.clear();

    EpochRecord record;
    record.epoch = epoch;
    std::size_t correct = 0, seen = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      std::vector<const Graph*> graphs;
      graphs.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) graphs.push_back(&train_set.graphs[order[k]]);

      try {
        encoder::ForwardPass pass(result.model, graphs);
        const Dense2D& z = pass.representations();
        WeightVector weights = WeightVector::uniform(graphs.size());
        if (reweighting) {
          const auto joined = result.memory.concat(z, weights.values());
          decorrelation::ReweightConfig rcfg = cfg.reweight;
          rcfg.seed = mix_seed(cfg.seed, (static_cast<std::uint64_t>(epoch) << 32) + b);
          const std::vector<double> frozen = result.memory.stored_weights();
          auto rw = decorrelation::optimize_weights(joined.z, frozen, weights, rcfg);
          weights = std::move(rw.weights);
          record.decorrelation += rw.final_decorrelation;
          if (rw.warning) ++result.report.reweight_warnings;
        }
        if (hooks.on_weights) hooks.on_weights(epoch, b, weights);
        if (last_epoch) {
          if (spread(weights.values()) > 0.0) result.report.nontrivial_weights = true;
          result.report.final_epoch_weights.insert(result.report.final_epoch_weights.end(),
                                                   weights.values().begin(),
                                                   weights.values().end());
        }

        encoder::LossGradients grads = pass.backward(weights.values());
        encoder::apply_gradients(result.model, adam, grads);
        if (reweighting) result.memory.momentum_update(z, weights.values());

        record.weighted_loss += grads.loss;
        correct += count_correct(grads.logits, graphs);
        seen += graphs.size();
      } catch (const TrainingDivergence& e) {
        throw TrainingDivergence(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(b) + ")",
                                 epoch, static_cast<int>(b));
      } catch (const OptimizationError& e) {
        throw TrainingDivergence(std::string("sample reweighting failed: ") + e.what() +
                                     " (epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b) + ")",
                                 epoch, static_cast<int>(b));
      }
    }
    record.weighted_loss /= static_cast<double>(batches);
    record.decorrelation /= static_cast<double>(batches);
    record.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    record.test_accuracy = evaluate(result.model, test_set);
    result.report.epochs.push_back(record);
  }

  result.report.final_train_accuracy = evaluate(result.model, train_set);
  result.report.final_test_accuracy = evaluate(result.model, test_set);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

double evaluate(const Model& model, const Dataset& data) {
  if (data.graphs.empty()) throw DataError("evaluate: dataset is empty");
  std::size_t correct = 0;
  std::vector<const Graph*> chunk;
  for (std::size_t begin = 0; begin < data.graphs.size(); begin += kEvalChunk) {
    const std::size_t end = std::min(data.graphs.size(), begin + kEvalChunk);
    chunk.clear();
    for (std::size_t k = begin; k < end; ++k) chunk.push_back(&data.graphs[k]);
    correct += count_correct(encoder::predict(model, chunk), chunk);
  }
  return static_cast<double>(correct) / static_cast<double>(data.graphs.size());
}

double evaluate(const Manifest& checkpoint, const Dataset& data) {
  return evaluate(encoder::restore_model(checkpoint), data);
}

Manifest make_checkpoint(const TrainResult& result) {
  Manifest m;
  encoder::append_model(m, result.model);
  const auto& mem = result.memory;
  m.meta["memory_k"] = std::to_string(mem.k_groups());
  m.meta["memory_batch"] = std::to_string(mem.batch_size());
  m.meta["mode"] = to_string(result.report.config.mode);
  if (const std::size_t k_count = mem.k_groups(); k_count > 0) {
    m.params.emplace_back("memory.gammas", Dense2D(1, k_count, mem.gammas()));
    for (std::size_t k = 0; k < mem.k_groups(); ++k) {
      const std::string prefix = "memory.group" + std::to_string(k);
      m.params.emplace_back(prefix + ".z", mem.z_group(k));
      m.params.emplace_back(prefix + ".w", Dense2D(1, mem.batch_size(), mem.w_group(k)));
    }
  }
  return m;
}

globalmem::GlobalMemory restore_memory(const Manifest& checkpoint) {
  auto meta = [&](const std::string& key) -> std::size_t {
    auto it = checkpoint.meta.find(key);
    if (it == checkpoint.meta.end()) throw DataError("checkpoint: missing meta \"" + key + "\"");
    try {
      return std::stoul(it->second);
    } catch (const std::exception&) {
      throw DataError("checkpoint: meta \"" + key + "\" is not an integer");
    }
  };
  const std::size_t k = meta("memory_k");
  if (k == 0) return {};
  const std::size_t batch = meta("memory_batch");
  const std::size_t d = meta("hidden_dim");
  const Dense2D* gammas = checkpoint.find("memory.gammas");
  if (!gammas || gammas->rows() != 1 || gammas->cols() != k) {
    throw DataError("checkpoint: memory.gammas missing or mis-shaped");
  }
  globalmem::GlobalMemory mem(k, batch, d,
                              std::vector<double>(gammas->values().begin(), gammas->values().end()));
  for (std::size_t g = 0; g < k; ++g) {
    const std::string prefix = "memory.group" + std::to_string(g);
    const Dense2D* z = checkpoint.find(prefix + ".z");
    const Dense2D* w = checkpoint.find(prefix + ".w");
    if (!z || !w || z->rows() != batch || z->cols() != d || w->rows() != 1 || w->cols() != batch) {
      throw DataError("checkpoint: " + prefix + " missing or mis-shaped");
    }
    mem.set_group(g, *z, std::vector<double>(w->values().begin(), w->values().end()));
  }
  return mem;
}

Histogram weight_histogram(std::span<const double> weights, std::size_t bins) {
  if (bins == 0) throw DomainError("weight_histogram: bins must be >= 1");
  Histogram h;
  h.lo = 0.0;
  const double top = weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
  h.hi = std::max(2.0, 1.0001 * top);
  h.counts.assign(bins, 0);
  for (double w : weights) {
    auto idx = static_cast<std::size_t>(std::floor((w - h.lo) / h.bin_width()));
    h.counts[std::min(idx, bins - 1)]++;
  }
  return h;
}

Histogram weight_histogram(const RunReport& report, std::size_t bins) {
  if (report.config.mode == Mode::baseline_uniform) {
    throw ContractError("weight histogram is not applicable to baseline_uniform");
  }
  return weight_histogram(report.final_epoch_weights, bins);
}

}  // namespace oodgnn::harness
