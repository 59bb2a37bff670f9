#include "oodgnn/harness/results.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>
#include "oodgnn/errors.hpp"

namespace oodgnn::harness {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string format_run(const RunReport& report, const std::string& experiment,
                       bool include_timing) {
  json epochs = json::array();
  for (const EpochRecord& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"weighted_loss", e.weighted_loss},
                      {"decorrelation", e.decorrelation},
                      {"train_accuracy", e.train_accuracy},
                      {"test_accuracy", e.test_accuracy}});
  }
  json line = {{"type", "run"},
               {"experiment", experiment},
               {"mode", to_string(report.config.mode)},
               {"seed", report.config.seed},
               {"config", format_config(report.config)},
               {"final_train_accuracy", report.final_train_accuracy},
               {"final_test_accuracy", report.final_test_accuracy},
               {"reweight_warnings", report.reweight_warnings},
               {"nontrivial_weights", report.nontrivial_weights},
               {"epochs", std::move(epochs)}};
  if (include_timing) line["wall_seconds"] = report.wall_seconds;
  return line.dump() + '\n';
}

std::string format_histogram(const Histogram& h, const std::string& experiment, Mode mode,
                             std::uint64_t seed) {
  json line = {{"type", "weight_histogram"}, {"experiment", experiment},
               {"mode", to_string(mode)},    {"seed", seed},
               {"lo", h.lo},                 {"hi", h.hi},
               {"counts", h.counts}};
  return line.dump() + '\n';
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<RunSummary> read_run_summaries(std::istream& in) {
  std::vector<RunSummary> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.value("type", "") != "run") continue;
      RunSummary s;
      s.experiment = j.at("experiment").get<std::string>();
      s.mode = parse_mode(j.at("mode").get<std::string>());
      s.seed = j.at("seed").get<std::uint64_t>();
      s.train_accuracy = j.at("final_train_accuracy").get<double>();
      s.test_accuracy = j.at("final_test_accuracy").get<double>();
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw DataError("results line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw DataError("results line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<RunSummary> load_run_summaries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_run_summaries(in);
}

std::vector<ModeStats> summarize(std::span<const RunSummary> runs) {
  std::vector<Mode> order;
  std::map<Mode, std::pair<std::vector<double>, std::vector<double>>> acc;
  for (const RunSummary& r : runs) {
    if (std::find(order.begin(), order.end(), r.mode) == order.end()) order.push_back(r.mode);
    acc[r.mode].first.push_back(r.train_accuracy);
    acc[r.mode].second.push_back(r.test_accuracy);
  }
  std::vector<ModeStats> out;
  for (Mode m : order) {
    ModeStats s;
    s.mode = m;
    s.runs = acc[m].first.size();
    mean_std(acc[m].first, s.train_mean, s.train_std);
    mean_std(acc[m].second, s.test_mean, s.test_std);
    out.push_back(s);
  }
  return out;
}

std::string format_comparison(std::span<const RunSummary> runs) {
  std::vector<std::string> experiments;
  for (const RunSummary& r : runs) {
    if (std::find(experiments.begin(), experiments.end(), r.experiment) == experiments.end()) {
      experiments.push_back(r.experiment);
    }
  }
  std::ostringstream out;
  for (const std::string& name : experiments) {
    std::vector<RunSummary> subset;
    for (const RunSummary& r : runs)
      if (r.experiment == name) subset.push_back(r);
    out << name << '\n';
    out << "  mode               runs  train acc         test acc\n";
    for (const ModeStats& s : summarize(subset)) {
      std::string mode = to_string(s.mode);
      mode.resize(18, ' ');
      out << "  " << mode << ' ' << s.runs << "     " << fixed(s.train_mean, 4) << " +- "
          << fixed(s.train_std, 4) << "  " << fixed(s.test_mean, 4) << " +- "
          << fixed(s.test_std, 4) << '\n';
    }
  }
  return out.str();
}

}  // namespace oodgnn::harness
