#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oodgnn/harness/trainer.hpp"

namespace oodgnn::harness {

// One JSON object per line:
//   {"type":"run", "experiment", "mode", "seed", "config", "final_train_accuracy",
//    "final_test_accuracy", "reweight_warnings", "epochs":[...], "wall_seconds"}
// wall_seconds is omitted when include_timing is false, which makes output
// from repeated runs with one seed byte-identical.
std::string format_run(const RunReport& report, const std::string& experiment,
                       bool include_timing = true);

std::string format_histogram(const Histogram& h, const std::string& experiment, Mode mode,
                             std::uint64_t seed);

// Writes to a sibling temporary file, then renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

struct RunSummary {
  std::string experiment;
  Mode mode = Mode::ood_gnn;
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

// Reads the "run" lines of a results file; other line types are skipped.
// Throws DataError on malformed lines.
std::vector<RunSummary> read_run_summaries(std::istream& in);
std::vector<RunSummary> load_run_summaries(const std::filesystem::path& path);

struct ModeStats {
  Mode mode = Mode::ood_gnn;
  std::size_t runs = 0;
  double train_mean = 0.0, train_std = 0.0;
  double test_mean = 0.0, test_std = 0.0;
};

// Mean and sample standard deviation per mode, in first-seen order.
std::vector<ModeStats> summarize(std::span<const RunSummary> runs);

// Plain-text comparison table, one block per experiment.
std::string format_comparison(std::span<const RunSummary> runs);

}  // namespace oodgnn::harness
