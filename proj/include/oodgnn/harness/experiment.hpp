#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oodgnn/graphdata/graph.hpp"
#include "oodgnn/harness/results.hpp"

namespace oodgnn::harness {

struct ExperimentSpec {
  std::string name;
  graphdata::SplitKind shift = graphdata::SplitKind::by_size;
  std::size_t train_count = 2000;
  std::size_t test_count = 500;
  std::size_t train_min_nodes = 4, train_max_nodes = 25;
  std::size_t test_min_nodes = 26, test_max_nodes = 60;  // by_size only
  double noise_sigma = 0.4;                              // by_feature_noise only
  TrainConfig base;  // mode and seed are set per run
};

// "triangles_size_shift" or "feature_noise_shift". Throws ConfigError otherwise.
ExperimentSpec named_experiment(const std::string& name);
std::vector<std::string> experiment_names();

// Train and test sets for one seed.
graphdata::TrainTest make_experiment_data(const ExperimentSpec& spec, std::uint64_t seed);

struct ExperimentResult {
  std::string name;
  std::vector<RunReport> runs;  // seed-major, modes in the order given
};

inline constexpr Mode kAllModes[] = {Mode::ood_gnn, Mode::baseline_uniform, Mode::linear_decorr};

// Every (seed, mode) run; runs are spread over `threads` workers (0 picks the
// hardware concurrency). Results do not depend on the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, std::span<const std::uint64_t> seeds,
                                std::span<const Mode> modes = kAllModes, unsigned threads = 0);

std::vector<RunSummary> summaries(const ExperimentResult& result);

// results.jsonl (one run line per run, then one histogram line per
// reweighting run) and summary.txt in dir.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace oodgnn::harness
