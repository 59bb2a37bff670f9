// Command-line front end: dataset generation, training, experiments and
// result reports.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 training divergence.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oodgnn/errors.hpp"
#include "oodgnn/graphdata/dataset_io.hpp"
#include "oodgnn/graphdata/generators.hpp"
#include "oodgnn/graphdata/splits.hpp"
#include "oodgnn/harness/experiment.hpp"
#include "oodgnn/harness/results.hpp"
#include "oodgnn/harness/trainer.hpp"

namespace fs = std::filesystem;
using namespace oodgnn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const unsigned long long v = std::stoull(item, &used);
    if (used != item.size()) throw ConfigError("malformed seed \"" + item + "\"");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("--seeds lists no seeds");
  return seeds;
}

int cmd_gen(std::size_t count, std::size_t min_nodes, std::size_t max_nodes, std::uint64_t seed,
            const fs::path& out) {
  const auto data = graphdata::gen_triangles_dataset(count, min_nodes, max_nodes, seed);
  graphdata::save_dataset(out, data);
  std::cout << "wrote " << data.graphs.size() << " graphs to " << out.string() << '\n';
  return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& data_path,
              const std::optional<fs::path>& test_path, const fs::path& out_dir) {
  const harness::TrainConfig cfg = harness::load_config(config_path);
  graphdata::TrainTest sets;
  if (test_path) {
    sets.train = graphdata::load_dataset(data_path, cfg.num_classes);
    sets.test = graphdata::load_dataset(*test_path, cfg.num_classes);
  } else {
    sets = graphdata::apply_split(graphdata::load_dataset(data_path, cfg.num_classes), cfg.split);
  }
  const harness::TrainResult result = harness::train(cfg, sets.train, sets.test);
  std::string lines = harness::format_run(result.report, "train");
  if (cfg.mode != harness::Mode::baseline_uniform) {
    lines += harness::format_histogram(harness::weight_histogram(result.report), "train", cfg.mode,
                                       cfg.seed);
  }
  harness::write_text_atomic(out_dir / "results.jsonl", lines);
  encoder::save_manifest(out_dir / "checkpoint.txt", harness::make_checkpoint(result));
  std::cout << "train accuracy " << result.report.final_train_accuracy << ", test accuracy "
            << result.report.final_test_accuracy << '\n';
  return 0;
}

int cmd_evaluate(const fs::path& checkpoint, const fs::path& data_path) {
  const encoder::Manifest manifest = encoder::load_manifest(checkpoint);
  const encoder::Model model = encoder::restore_model(manifest);
  const auto data = graphdata::load_dataset(
      data_path, static_cast<int>(model.classifier.num_classes()));
  std::cout << "accuracy " << harness::evaluate(model, data) << '\n';
  return 0;
}

int cmd_experiment(const std::string& name, const std::string& seeds_text, const fs::path& out,
                   std::optional<int> epochs, unsigned threads) {
  harness::ExperimentSpec spec = harness::named_experiment(name);
  if (epochs) spec.base.epochs = *epochs;
  spec.base.validate();
  const auto seeds = parse_seeds(seeds_text);
  const auto result = harness::run_experiment(spec, seeds, harness::kAllModes, threads);
  harness::write_experiment(result, out);
  std::cout << harness::format_comparison(harness::summaries(result));
  return 0;
}

int cmd_report(const fs::path& in) {
  const fs::path file = fs::is_directory(in) ? in / "results.jsonl" : in;
  const auto runs = harness::load_run_summaries(file);
  if (runs.empty()) throw DataError("no run records in " + file.string());
  std::cout << harness::format_comparison(runs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Out-of-distribution graph classification with decorrelation reweighting"};
  app.require_subcommand(1);

  std::size_t count = 0, min_nodes = 4, max_nodes = 25;
  std::uint64_t seed = 0;
  fs::path gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a triangle-counting dataset (JSON lines)");
  gen->add_option("--count", count, "Number of graphs")->required();
  gen->add_option("--min-nodes", min_nodes, "Minimum node count");
  gen->add_option("--max-nodes", max_nodes, "Maximum node count");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", gen_out, "Output file")->required();

  fs::path config_path, data_path, train_out;
  std::optional<fs::path> test_path;
  auto* train = app.add_subcommand("train", "Train one model from a config file");
  train->add_option("--config", config_path, "key=value config file")->required();
  train->add_option("--data", data_path, "Dataset; split per the config unless --test is given")
      ->required();
  train->add_option("--test", test_path, "Separate test dataset");
  train->add_option("--out", train_out, "Output directory")->required();

  fs::path checkpoint_path, eval_data;
  auto* evaluate = app.add_subcommand("evaluate", "Accuracy of a checkpoint on a dataset");
  evaluate->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  evaluate->add_option("--data", eval_data, "Dataset")->required();

  std::string exp_name, seeds_text = "1,2,3,4,5";
  fs::path exp_out;
  std::optional<int> epochs;
  unsigned threads = 0;
  auto* experiment = app.add_subcommand("experiment", "Run all modes of a named experiment");
  experiment->add_option("--name", exp_name, "triangles_size_shift or feature_noise_shift")
      ->required();
  experiment->add_option("--seeds", seeds_text, "Comma-separated seeds");
  experiment->add_option("--out", exp_out, "Output directory")->required();
  experiment->add_option("--epochs", epochs, "Override the epoch count");
  experiment->add_option("--threads", threads, "Worker threads (0 = all cores)");

  fs::path report_in;
  auto* report = app.add_subcommand("report", "Summarize a results file or directory");
  report->add_option("--in", report_in, "results.jsonl or the directory holding it")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(count, min_nodes, max_nodes, seed, gen_out);
    if (*train) return cmd_train(config_path, data_path, test_path, train_out);
    if (*evaluate) return cmd_evaluate(checkpoint_path, eval_data);
    if (*experiment) return cmd_experiment(exp_name, seeds_text, exp_out, epochs, threads);
    if (*report) return cmd_report(report_in);
  } catch (const TrainingDivergence& e) {
    std::cerr << "error: training diverged at epoch " << e.epoch() << ", batch " << e.batch()
              << ": " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const GenerationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const SplitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
