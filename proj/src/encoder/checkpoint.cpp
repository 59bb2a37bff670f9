#include "oodgnn/encoder/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "oodgnn/errors.hpp"

namespace oodgnn::encoder {

namespace {

constexpr const char* kMagic = "oodgnn-checkpoint";
constexpr int kVersion = 1;

std::size_t meta_size(const Manifest& m, const std::string& key) {
  auto it = m.meta.find(key);
  if (it == m.meta.end()) throw DataError("checkpoint: missing meta \"" + key + "\"");
  try {
    return static_cast<std::size_t>(std::stoull(it->second));
  } catch (const std::exception&) {
    throw DataError("checkpoint: meta \"" + key + "\" is not an integer");
  }
}

}  // namespace

const Dense2D* Manifest::find(const std::string& name) const {
  for (const auto& [key, value] : params)
    if (key == name) return &value;
  return nullptr;
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  out << kMagic << ' ' << kVersion << '\n';
  for (const auto& [key, value] : manifest.meta) out << "meta " << key << ' ' << value << '\n';
  char buf[32];
  for (const auto& [name, value] : manifest.params) {
    out << "param " << name << ' ' << value.rows() << ' ' << value.cols();
    for (double v : value.values()) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ' ' << buf;
    }
    out << '\n';
  }
}

Manifest read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("checkpoint: empty input");
  {
    std::istringstream header(line);
    std::string magic;
    int version = 0;
    header >> magic >> version;
    if (magic != kMagic || version != kVersion) throw DataError("checkpoint: bad header");
  }
  Manifest manifest;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string kind, name;
    fields >> kind >> name;
    if (kind == "meta") {
      std::string value;
      fields >> value;
      manifest.meta[name] = value;
    } else if (kind == "param") {
      std::size_t rows = 0, cols = 0;
      if (!(fields >> rows >> cols) || rows == 0 || cols == 0) {
        throw DataError("checkpoint line " + std::to_string(line_no) + ": bad shape");
      }
      std::vector<double> values(rows * cols);
      for (double& v : values) {
        std::string token;
        if (!(fields >> token)) {
          throw DataError("checkpoint line " + std::to_string(line_no) + ": too few values");
        }
        v = std::stod(token);
      }
      std::string extra;
      if (fields >> extra) {
        throw DataError("checkpoint line " + std::to_string(line_no) + ": too many values");
      }
      manifest.params.emplace_back(name, Dense2D(rows, cols, std::move(values)));
    } else {
      throw DataError("checkpoint line " + std::to_string(line_no) + ": unknown record \"" +
                      kind + "\"");
    }
  }
  return manifest;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    write_manifest(out, manifest);
    if (!out) throw DataError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_manifest(in);
}

void append_model(Manifest& manifest, const Model& model) {
  manifest.meta["input_dim"] = std::to_string(model.encoder.input_dim);
  manifest.meta["hidden_dim"] = std::to_string(model.encoder.hidden_dim);
  manifest.meta["num_layers"] = std::to_string(model.encoder.layers.size());
  manifest.meta["num_classes"] = std::to_string(model.classifier.num_classes());
  for (const auto& [name, value] : named_parameters(model)) manifest.params.emplace_back(name, *value);
}

Model restore_model(const Manifest& manifest) {
  const std::size_t input_dim = meta_size(manifest, "input_dim");
  const std::size_t hidden_dim = meta_size(manifest, "hidden_dim");
  const std::size_t num_layers = meta_size(manifest, "num_layers");
  const std::size_t num_classes = meta_size(manifest, "num_classes");
  Model model = init_model(input_dim, hidden_dim, num_layers, num_classes, 0);
  for (auto& [name, slot] : named_parameters(model)) {
    const Dense2D* stored = manifest.find(name);
    if (!stored) throw DataError("checkpoint: missing parameter " + name);
    if (!stored->same_shape(*slot)) {
      throw DataError("checkpoint: parameter " + name + " has shape " + stored->shape_string() +
                      ", architecture expects " + slot->shape_string());
    }
    *slot = *stored;
  }
  return model;
}

}  // namespace oodgnn::encoder
