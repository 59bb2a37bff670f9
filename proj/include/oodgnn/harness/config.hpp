#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oodgnn/decorrelation/reweight.hpp"
#include "oodgnn/graphdata/splits.hpp"

namespace oodgnn::harness {

enum class Mode {
  ood_gnn,           // RFF decorrelation reweighting with global memory
  baseline_uniform,  // plain GIN, all weights 1
  linear_decorr,     // reweighting with identity feature maps instead of RFF
};

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

struct TrainConfig {
  int epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::size_t d = 32;
  std::size_t num_layers = 2;
  int num_classes = 10;
  decorrelation::ReweightConfig reweight;
  std::size_t memory_k = 1;
  std::vector<double> gammas = {0.9};
  std::uint64_t seed = 0;
  Mode mode = Mode::ood_gnn;

  // How `train` splits a single data file into train and test sets.
  graphdata::SplitSpec split;

  // Throws ConfigError naming the offending field.
  void validate() const;
  // Memory participates only when reweighting is active.
  bool uses_memory() const { return mode != Mode::baseline_uniform && memory_k > 0; }
};

// Flat key=value text, one key per line; '#' starts a comment. Unknown keys
// and malformed values raise ConfigError.
TrainConfig parse_config(std::istream& in);
TrainConfig load_config(const std::filesystem::path& path);
// Inverse of parse_config; every key is written.
std::string format_config(const TrainConfig& cfg);

}  // namespace oodgnn::harness
