#include "oodgnn/harness/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "oodgnn/errors.hpp"
#include "oodgnn/globalmem/memory.hpp"

namespace oodgnn::harness {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("config: key \"" + key + "\" has malformed value \"" + text + "\"");
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<double>(key, item));
  }
  return out;
}

graphdata::SplitKind parse_split(const std::string& text) {
  if (text == "by_size") return graphdata::SplitKind::by_size;
  if (text == "by_feature_noise") return graphdata::SplitKind::by_feature_noise;
  throw ConfigError("config: unknown split \"" + text + "\"");
}

decorrelation::FeatureMapKind feature_map_for(Mode mode) {
  return mode == Mode::linear_decorr ? decorrelation::FeatureMapKind::identity
                                     : decorrelation::FeatureMapKind::random_fourier;
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"epochs", [](TrainConfig& c, const std::string& v) { c.epochs = parse_number<int>("epochs", v); }},
      {"batch_size", [](TrainConfig& c, const std::string& v) { c.batch_size = parse_number<std::size_t>("batch_size", v); }},
      {"lr", [](TrainConfig& c, const std::string& v) { c.lr = parse_number<double>("lr", v); }},
      {"d", [](TrainConfig& c, const std::string& v) { c.d = parse_number<std::size_t>("d", v); }},
      {"num_layers", [](TrainConfig& c, const std::string& v) { c.num_layers = parse_number<std::size_t>("num_layers", v); }},
      {"num_classes", [](TrainConfig& c, const std::string& v) { c.num_classes = parse_number<int>("num_classes", v); }},
      {"seed", [](TrainConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }},
      {"mode", [](TrainConfig& c, const std::string& v) {
         c.mode = parse_mode(v);
         c.reweight.feature_map = feature_map_for(c.mode);
       }},
      {"epochs_reweight", [](TrainConfig& c, const std::string& v) { c.reweight.epochs_reweight = parse_number<int>("epochs_reweight", v); }},
      {"lr_w", [](TrainConfig& c, const std::string& v) { c.reweight.lr_w = parse_number<double>("lr_w", v); }},
      {"l2_lambda", [](TrainConfig& c, const std::string& v) { c.reweight.l2_lambda = parse_number<double>("l2_lambda", v); }},
      {"q", [](TrainConfig& c, const std::string& v) { c.reweight.q = parse_number<std::size_t>("q", v); }},
      {"pair_fraction", [](TrainConfig& c, const std::string& v) { c.reweight.pair_fraction = parse_number<double>("pair_fraction", v); }},
      {"memory_k", [](TrainConfig& c, const std::string& v) { c.memory_k = parse_number<std::size_t>("memory_k", v); }},
      {"gammas", [](TrainConfig& c, const std::string& v) { c.gammas = parse_list("gammas", v); }},
      {"split", [](TrainConfig& c, const std::string& v) { c.split.kind = parse_split(v); }},
      {"train_max_nodes", [](TrainConfig& c, const std::string& v) { c.split.train_max_nodes = parse_number<std::size_t>("train_max_nodes", v); }},
      {"noise_sigma", [](TrainConfig& c, const std::string& v) { c.split.noise_sigma = parse_number<double>("noise_sigma", v); }},
      {"test_fraction", [](TrainConfig& c, const std::string& v) { c.split.test_fraction = parse_number<double>("test_fraction", v); }},
      {"split_seed", [](TrainConfig& c, const std::string& v) { c.split.seed = parse_number<std::uint64_t>("split_seed", v); }},
  };
  return table;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::ood_gnn:
      return "ood_gnn";
    case Mode::baseline_uniform:
      return "baseline_uniform";
    case Mode::linear_decorr:
      return "linear_decorr";
  }
  return "unknown";
}

Mode parse_mode(const std::string& text) {
  if (text == "ood_gnn") return Mode::ood_gnn;
  if (text == "baseline_uniform") return Mode::baseline_uniform;
  if (text == "linear_decorr") return Mode::linear_decorr;
  throw ConfigError("unknown mode \"" + text + "\"");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size != 16 && batch_size != 32 && batch_size != 64) {
    throw ConfigError("batch_size must be one of {16, 32, 64}");
  }
  if (lr != 1e-4 && lr != 1e-3) throw ConfigError("lr must be one of {1e-4, 1e-3}");
  if (d == 0) throw ConfigError("d must be >= 1");
  if (num_layers < 2 || num_layers > 6) throw ConfigError("num_layers must lie in [2, 6]");
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (gammas.size() != memory_k) {
    throw ConfigError("gammas lists " + std::to_string(gammas.size()) + " values for memory_k = " +
                      std::to_string(memory_k));
  }
  for (double g : gammas)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("every gamma must lie in [0, 1)");
  try {
    reweight.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("reweight: ") + e.what());
  }
  if (mode != Mode::baseline_uniform && d < 2) throw ConfigError("decorrelation needs d >= 2");
  const bool identity = reweight.feature_map == decorrelation::FeatureMapKind::identity;
  if (identity != (mode == Mode::linear_decorr)) {
    throw ConfigError("feature map does not match mode " + to_string(mode));
  }
  if (!(split.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(split.test_fraction > 0.0 && split.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
}

TrainConfig parse_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  bool gammas_given = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    }
    it->second(cfg, value);
    gammas_given = gammas_given || key == "gammas";
  }
  // Without an explicit list every group uses the default momentum.
  if (!gammas_given) cfg.gammas.assign(cfg.memory_k, globalmem::kDefaultGamma);
  cfg.validate();
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

std::string format_config(const TrainConfig& cfg) {
  std::ostringstream out;
  out << "epochs=" << cfg.epochs << '\n'
      << "batch_size=" << cfg.batch_size << '\n'
      << "lr=" << format_double(cfg.lr) << '\n'
      << "d=" << cfg.d << '\n'
      << "num_layers=" << cfg.num_layers << '\n'
      << "num_classes=" << cfg.num_classes << '\n'
      << "seed=" << cfg.seed << '\n'
      << "mode=" << to_string(cfg.mode) << '\n'
      << "epochs_reweight=" << cfg.reweight.epochs_reweight << '\n'
      << "lr_w=" << format_double(cfg.reweight.lr_w) << '\n'
      << "l2_lambda=" << format_double(cfg.reweight.l2_lambda) << '\n'
      << "q=" << cfg.reweight.q << '\n'
      << "pair_fraction=" << format_double(cfg.reweight.pair_fraction) << '\n'
      << "memory_k=" << cfg.memory_k << '\n'
      << "gammas=";
  for (std::size_t k = 0; k < cfg.gammas.size(); ++k)
    out << (k ? "," : "") << format_double(cfg.gammas[k]);
  out << '\n'
      << "split="
      << (cfg.split.kind == graphdata::SplitKind::by_size ? "by_size" : "by_feature_noise") << '\n'
      << "train_max_nodes=" << cfg.split.train_max_nodes << '\n'
      << "noise_sigma=" << format_double(cfg.split.noise_sigma) << '\n'
      << "test_fraction=" << format_double(cfg.split.test_fraction) << '\n'
      << "split_seed=" << cfg.split.seed << '\n';
  return out.str();
}

}  // namespace oodgnn::harness
