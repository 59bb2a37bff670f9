#include "oodgnn/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "oodgnn/errors.hpp"
#include "oodgnn/graphdata/generators.hpp"
#include "oodgnn/graphdata/splits.hpp"
#include "oodgnn/numcore/rng.hpp"

namespace oodgnn::harness {

namespace {

TrainConfig experiment_base() {
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.batch_size = 32;
  cfg.lr = 1e-3;
  cfg.d = 32;
  cfg.num_layers = 2;
  cfg.num_classes = graphdata::kTriangleClasses;
  cfg.memory_k = 1;
  cfg.gammas = {globalmem::kDefaultGamma};
  return cfg;
}

}  // namespace

std::vector<std::string> experiment_names() { return {"triangles_size_shift", "feature_noise_shift"}; }

ExperimentSpec named_experiment(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.base = experiment_base();
  if (name == "triangles_size_shift") {
    spec.shift = graphdata::SplitKind::by_size;
  } else if (name == "feature_noise_shift") {
    spec.shift = graphdata::SplitKind::by_feature_noise;
    spec.base.split.kind = graphdata::SplitKind::by_feature_noise;
  } else {
    throw ConfigError("unknown experiment \"" + name + "\"");
  }
  return spec;
}

graphdata::TrainTest make_experiment_data(const ExperimentSpec& spec, std::uint64_t seed) {
  using graphdata::gen_triangles_dataset;
  if (spec.shift == graphdata::SplitKind::by_size) {
    return {gen_triangles_dataset(spec.train_count, spec.train_min_nodes, spec.train_max_nodes,
                                  mix_seed(seed, 11)),
            gen_triangles_dataset(spec.test_count, spec.test_min_nodes, spec.test_max_nodes,
                                  mix_seed(seed, 12))};
  }
  const graphdata::Dataset pool =
      gen_triangles_dataset(spec.train_count + spec.test_count, spec.train_min_nodes,
                            spec.train_max_nodes, mix_seed(seed, 21));
  graphdata::SplitSpec split;
  split.kind = graphdata::SplitKind::by_feature_noise;
  split.noise_sigma = spec.noise_sigma;
  split.test_fraction =
      static_cast<double>(spec.test_count) / static_cast<double>(pool.graphs.size());
  split.seed = mix_seed(seed, 22);
  return graphdata::apply_split(pool, split);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, std::span<const std::uint64_t> seeds,
                                std::span<const Mode> modes, unsigned threads) {
  if (seeds.empty() || modes.empty()) throw ConfigError("run_experiment: no seeds or no modes");
  ExperimentResult result;
  result.name = spec.name;
  result.runs.resize(seeds.size() * modes.size());

  std::vector<graphdata::TrainTest> data;
  data.reserve(seeds.size());
  for (std::uint64_t seed : seeds) data.push_back(make_experiment_data(spec, seed));

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(result.runs.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= result.runs.size()) return;
      const std::size_t s = job / modes.size();
      TrainConfig cfg = spec.base;
      cfg.seed = seeds[s];
      cfg.mode = modes[job % modes.size()];
      cfg.reweight.feature_map = cfg.mode == Mode::linear_decorr
                                     ? decorrelation::FeatureMapKind::identity
                                     : decorrelation::FeatureMapKind::random_fourier;
      try {
        result.runs[job] = train(cfg, data[s].train, data[s].test).report;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = result.runs.size();
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return result;
}

std::vector<RunSummary> summaries(const ExperimentResult& result) {
  std::vector<RunSummary> out;
  for (const RunReport& r : result.runs) {
    out.push_back({result.name, r.config.mode, r.config.seed, r.final_train_accuracy,
                   r.final_test_accuracy});
  }
  return out;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::string lines;
  for (const RunReport& r : result.runs) lines += format_run(r, result.name);
  for (const RunReport& r : result.runs) {
    if (r.config.mode == Mode::baseline_uniform) continue;
    lines += format_histogram(weight_histogram(r), result.name, r.config.mode, r.config.seed);
  }
  write_text_atomic(dir / "results.jsonl", lines);
  write_text_atomic(dir / "summary.txt", format_comparison(summaries(result)));
}

}  // namespace oodgnn::harness
