#include "oodgnn/graphdata/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oodgnn/errors.hpp"

namespace oodgnn::graphdata {

using nlohmann::json;

void write_dataset(std::ostream& out, const Dataset& d) {
  for (const Graph& g : d.graphs) {
    json edges = json::array();
    for (const auto& [u, v] : g.edges) edges.push_back({u, v});
    json x = json::array();
    for (std::size_t r = 0; r < g.features.rows(); ++r) {
      auto row = g.features.row(r);
      x.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json record = {{"n", g.num_nodes}, {"edges", std::move(edges)}, {"x", std::move(x)}};
    if (d.task_kind == TaskKind::classification) {
      record["y"] = g.label;
    } else {
      record["y"] = g.target;
    }
    out << record.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_dataset(out, d);
  if (!out) throw DataError("failed writing " + path.string());
}

namespace {

Graph parse_graph(const json& record) {
  if (!record.is_object()) throw DataError("record is not an object");
  for (const char* key : {"n", "edges", "x", "y"}) {
    if (!record.contains(key)) throw DataError(std::string("missing field \"") + key + "\"");
  }
  Graph g;
  if (!record["n"].is_number_integer() || record["n"].get<long long>() < 1) {
    throw DataError("\"n\" must be a positive integer");
  }
  g.num_nodes = record["n"].get<std::size_t>();

  const json& edges = record["edges"];
  if (!edges.is_array()) throw DataError("\"edges\" must be an array");
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer() || e[0].get<long long>() < 0 || e[1].get<long long>() < 0) {
      throw DataError("edge entries must be [u, v] pairs of non-negative integers");
    }
    auto u = e[0].get<std::size_t>(), v = e[1].get<std::size_t>();
    if (u > v) std::swap(u, v);
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());

  const json& x = record["x"];
  if (!x.is_array() || x.empty() || !x[0].is_array() || x[0].empty()) {
    throw DataError("\"x\" must be a non-empty array of non-empty rows");
  }
  const std::size_t cols = x[0].size();
  std::vector<double> values;
  values.reserve(x.size() * cols);
  for (const json& row : x) {
    if (!row.is_array() || row.size() != cols) throw DataError("\"x\" rows are ragged");
    for (const json& v : row) {
      if (!v.is_number()) throw DataError("\"x\" entries must be numbers");
      values.push_back(v.get<double>());
    }
  }
  g.features = Dense2D(x.size(), cols, std::move(values));

  const json& y = record["y"];
  if (!y.is_number_integer()) throw DataError("\"y\" must be an integer class index");
  g.label = y.get<int>();
  validate(g);
  return g;
}

}  // namespace

Dataset read_dataset(std::istream& in, std::optional<int> num_classes) {
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Graph g = parse_graph(json::parse(line));
      if (d.graphs.empty()) {
        d.feature_dim = g.features.cols();
      } else if (g.features.cols() != d.feature_dim) {
        throw DataError("feature dim " + std::to_string(g.features.cols()) + " != " +
                        std::to_string(d.feature_dim));
      }
      if (g.label < 0) throw DataError("negative label");
      if (num_classes && g.label >= *num_classes) {
        throw DataError("label " + std::to_string(g.label) + " outside [0, " +
                        std::to_string(*num_classes) + ")");
      }
      d.graphs.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DimensionError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (d.graphs.empty()) throw DataError("dataset contains no graphs");
  if (num_classes) {
    d.num_classes = *num_classes;
  } else {
    int top = 0;
    for (const Graph& g : d.graphs) top = std::max(top, g.label);
    d.num_classes = top + 1;
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_dataset(in, num_classes);
}

}  // namespace oodgnn::graphdata
