#include "oodgnn/encoder/gin.hpp"

#include <cmath>

#include "oodgnn/errors.hpp"

namespace oodgnn::encoder {

namespace {

void require_chain(const Dense2D& w, const Dense2D& b, std::size_t in, const std::string& what) {
  if (w.rows() != in || b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError(what + ": weight " + w.shape_string() + " / bias " + b.shape_string() +
                         " do not chain from input width " + std::to_string(in));
  }
}

Var maybe_relu(Var x, const EncoderOptions& opts) { return opts.activations ? relu(x) : x; }

Var mlp(Var x, Var w1, Var b1, Var w2, Var b2, const EncoderOptions& opts) {
  Var hidden = maybe_relu(add_row_bias(matmul(x, w1), b1), opts);
  return add_row_bias(matmul(hidden, w2), b2);
}

Var bind_one(Tape& tape, const Dense2D& value, bool trainable) {
  return trainable ? tape.leaf(value) : tape.constant(value);
}

}  // namespace

Dense2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Dense2D w(fan_in, fan_out);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                           Rng& rng) {
  if (num_layers < kMinLayers || num_layers > kMaxLayers) {
    throw DomainError("init_encoder: num_layers " + std::to_string(num_layers) +
                      " outside [2, 6]");
  }
  if (input_dim == 0 || hidden_dim == 0) throw DomainError("init_encoder: zero width");
  EncoderParams params;
  params.input_dim = input_dim;
  params.hidden_dim = hidden_dim;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? input_dim : hidden_dim;
    GINLayer layer;
    layer.eps = Dense2D(1, 1, 0.0);
    layer.mlp_w1 = glorot_uniform(in, hidden_dim, rng);
    layer.mlp_b1 = Dense2D(1, hidden_dim);
    layer.mlp_w2 = glorot_uniform(hidden_dim, hidden_dim, rng);
    layer.mlp_b2 = Dense2D(1, hidden_dim);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ClassifierParams init_classifier(std::size_t d, std::size_t num_classes, Rng& rng) {
  ClassifierParams params;
  params.w1 = glorot_uniform(d, d, rng);
  params.b1 = Dense2D(1, d);
  params.w2 = glorot_uniform(d, num_classes, rng);
  params.b2 = Dense2D(1, num_classes);
  return params;
}

Model init_model(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                 std::size_t num_classes, std::uint64_t seed) {
  Rng rng(seed);
  Model model;
  model.encoder = init_encoder(input_dim, hidden_dim, num_layers, rng);
  model.classifier = init_classifier(hidden_dim, num_classes, rng);
  return model;
}

void check_shapes(const EncoderParams& params) {
  std::size_t width = params.input_dim;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const GINLayer& layer = params.layers[l];
    const std::string where = "encoder layer " + std::to_string(l);
    if (layer.eps.rows() != 1 || layer.eps.cols() != 1) {
      throw DimensionError(where + ": eps must be 1x1");
    }
    require_chain(layer.mlp_w1, layer.mlp_b1, width, where + " mlp.1");
    require_chain(layer.mlp_w2, layer.mlp_b2, layer.mlp_w1.cols(), where + " mlp.2");
    width = layer.mlp_w2.cols();
  }
  if (width != params.hidden_dim) {
    throw DimensionError("encoder output width " + std::to_string(width) + " != hidden_dim " +
                         std::to_string(params.hidden_dim));
  }
}

void check_shapes(const ClassifierParams& params) {
  require_chain(params.w1, params.b1, params.w1.rows(), "classifier layer 1");
  require_chain(params.w2, params.b2, params.w1.cols(), "classifier layer 2");
}

std::vector<NamedParam> named_parameters(Model& model) {
  std::vector<NamedParam> out;
  for (std::size_t l = 0; l < model.encoder.layers.size(); ++l) {
    GINLayer& layer = model.encoder.layers[l];
    const std::string prefix = "encoder.layer" + std::to_string(l) + ".";
    out.push_back({prefix + "eps", &layer.eps});
    out.push_back({prefix + "mlp_w1", &layer.mlp_w1});
    out.push_back({prefix + "mlp_b1", &layer.mlp_b1});
    out.push_back({prefix + "mlp_w2", &layer.mlp_w2});
    out.push_back({prefix + "mlp_b2", &layer.mlp_b2});
  }
  out.push_back({"classifier.w1", &model.classifier.w1});
  out.push_back({"classifier.b1", &model.classifier.b1});
  out.push_back({"classifier.w2", &model.classifier.w2});
  out.push_back({"classifier.b2", &model.classifier.b2});
  return out;
}

std::vector<ConstNamedParam> named_parameters(const Model& model) {
  std::vector<ConstNamedParam> out;
  for (const auto& [name, value] : named_parameters(const_cast<Model&>(model)))
    out.push_back({name, value});
  return out;
}

GraphBatch make_batch(std::span<const Graph* const> graphs) {
  if (graphs.empty()) throw DomainError("make_batch: empty batch");
  const std::size_t feature_dim = graphs.front()->features.cols();
  GraphBatch batch;
  batch.offsets.reserve(graphs.size() + 1);
  batch.offsets.push_back(0);
  std::size_t total = 0;
  for (const Graph* g : graphs) {
    if (g->features.cols() != feature_dim || g->features.rows() != g->num_nodes) {
      throw DimensionError("make_batch: graph features " + g->features.shape_string() +
                           " inconsistent with " + std::to_string(g->num_nodes) + " nodes x " +
                           std::to_string(feature_dim));
    }
    total += g->num_nodes;
    batch.offsets.push_back(total);
  }
  std::vector<double> values;
  values.reserve(total * feature_dim);
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const Graph& g = *graphs[k];
    values.insert(values.end(), g.features.values().begin(), g.features.values().end());
    const std::size_t base = batch.offsets[k];
    for (const auto& [u, v] : g.edges) batch.edges.emplace_back(u + base, v + base);
  }
  batch.features = Dense2D(total, feature_dim, std::move(values));
  return batch;
}

EncoderVars bind(Tape& tape, const EncoderParams& params, bool trainable) {
  EncoderVars vars;
  for (const GINLayer& layer : params.layers) {
    vars.layers.push_back({bind_one(tape, layer.eps, trainable),
                           bind_one(tape, layer.mlp_w1, trainable),
                           bind_one(tape, layer.mlp_b1, trainable),
                           bind_one(tape, layer.mlp_w2, trainable),
                           bind_one(tape, layer.mlp_b2, trainable)});
  }
  return vars;
}

ClassifierVars bind(Tape& tape, const ClassifierParams& params, bool trainable) {
  return {bind_one(tape, params.w1, trainable), bind_one(tape, params.b1, trainable),
          bind_one(tape, params.w2, trainable), bind_one(tape, params.b2, trainable)};
}

Var gin_layer_forward(const LayerVars& layer, Var node_states, std::span<const Edge> edges,
                      const EncoderOptions& opts) {
  if (node_states.cols() != layer.w1.rows()) {
    throw DimensionError("gin_layer_forward: node states " + node_states.value().shape_string() +
                         " do not match layer input " + layer.w1.value().shape_string());
  }
  Var self = add(node_states, scale_by(node_states, layer.eps));
  Var combined = edges.empty() ? self : add(self, neighbor_sum(node_states, edges));
  return mlp(combined, layer.w1, layer.b1, layer.w2, layer.b2, opts);
}

Var encode_batch(const EncoderVars& params, Var node_features, const GraphBatch& batch,
                 const EncoderOptions& opts) {
  Var h = node_features;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    h = gin_layer_forward(params.layers[l], h, batch.edges, opts);
    if (l + 1 < params.layers.size()) h = maybe_relu(h, opts);
  }
  return segment_sum(h, batch.offsets);
}

Var classify(const ClassifierVars& params, Var z, const EncoderOptions& opts) {
  if (z.cols() != params.w1.rows()) {
    throw DimensionError("classify: representations " + z.value().shape_string() +
                         " do not match classifier input " + params.w1.value().shape_string());
  }
  return mlp(z, params.w1, params.b1, params.w2, params.b2, opts);
}

Dense2D gin_layer_forward(const GINLayer& layer, const Dense2D& node_states, const Graph& graph,
                          const EncoderOptions& opts) {
  if (node_states.rows() != graph.num_nodes) {
    throw DimensionError("gin_layer_forward: " + node_states.shape_string() + " node states for " +
                         std::to_string(graph.num_nodes) + " nodes");
  }
  Tape tape;
  LayerVars vars{tape.constant(layer.eps), tape.constant(layer.mlp_w1),
                 tape.constant(layer.mlp_b1), tape.constant(layer.mlp_w2),
                 tape.constant(layer.mlp_b2)};
  return gin_layer_forward(vars, tape.constant(node_states), graph.edges, opts).value();
}

Dense2D encode(const EncoderParams& params, const Graph& g, const EncoderOptions& opts) {
  const Graph* one[] = {&g};
  return encode_batch(params, one, opts);
}

Dense2D encode_batch(const EncoderParams& params, std::span<const Graph* const> graphs,
                     const EncoderOptions& opts) {
  const GraphBatch batch = make_batch(graphs);
  if (batch.features.cols() != params.input_dim) {
    throw DimensionError("encode: features " + batch.features.shape_string() +
                         " do not match encoder input_dim " + std::to_string(params.input_dim));
  }
  Tape tape;
  const EncoderVars vars = bind(tape, params, false);
  return encode_batch(vars, tape.constant(batch.features), batch, opts).value();
}

Dense2D encode_batch(const EncoderParams& params, std::span<const Graph> graphs,
                     const EncoderOptions& opts) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return encode_batch(params, ptrs, opts);
}

Dense2D classify(const ClassifierParams& params, const Dense2D& z, const EncoderOptions& opts) {
  Tape tape;
  const ClassifierVars vars = bind(tape, params, false);
  return classify(vars, tape.constant(z), opts).value();
}

Dense2D predict(const Model& model, std::span<const Graph* const> graphs) {
  const GraphBatch batch = make_batch(graphs);
  if (batch.features.cols() != model.encoder.input_dim) {
    throw DimensionError("predict: features " + batch.features.shape_string() +
                         " do not match encoder input_dim " +
                         std::to_string(model.encoder.input_dim));
  }
  Tape tape;
  const EncoderVars enc = bind(tape, model.encoder, false);
  const ClassifierVars clf = bind(tape, model.classifier, false);
  Var z = encode_batch(enc, tape.constant(batch.features), batch);
  return classify(clf, z).value();
}

}  // namespace oodgnn::encoder
