#pragma once

#include <span>
#include <string>
#include <vector>

#include "oodgnn/graphdata/graph.hpp"
#include "oodgnn/numcore/rng.hpp"
#include "oodgnn/numcore/tape.hpp"

namespace oodgnn::encoder {

using graphdata::Edge;
using graphdata::Graph;
using numcore::Dense2D;
using numcore::Tape;
using numcore::Var;

// h_v <- MLP((1 + eps) h_v + sum_{u in N(v)} h_u), MLP = Linear -> ReLU -> Linear.
struct GINLayer {
  Dense2D eps;  // 1x1, learnable
  Dense2D mlp_w1, mlp_b1;
  Dense2D mlp_w2, mlp_b2;

  std::size_t in_dim() const { return mlp_w1.rows(); }
  std::size_t out_dim() const { return mlp_w2.cols(); }
};

struct EncoderParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // also the representation dimension d
  std::vector<GINLayer> layers;
};

// Two-layer MLP d -> d -> num_classes.
struct ClassifierParams {
  Dense2D w1, b1;
  Dense2D w2, b2;

  std::size_t num_classes() const { return w2.cols(); }
};

struct Model {
  EncoderParams encoder;
  ClassifierParams classifier;
};

struct EncoderOptions {
  // When false every ReLU is bypassed, making the encoder linear in the node
  // features. Used to test pooling linearity.
  bool activations = true;
};

inline constexpr std::size_t kMinLayers = 2;
inline constexpr std::size_t kMaxLayers = 6;

// Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))).
Dense2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// Weights Glorot-uniform, biases and eps zero.
EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                           Rng& rng);
ClassifierParams init_classifier(std::size_t d, std::size_t num_classes, Rng& rng);
Model init_model(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_layers,
                 std::size_t num_classes, std::uint64_t seed);

// Throws DimensionError if layer shapes do not chain.
void check_shapes(const EncoderParams& params);
void check_shapes(const ClassifierParams& params);

struct NamedParam {
  std::string name;
  Dense2D* value;
};
struct ConstNamedParam {
  std::string name;
  const Dense2D* value;
};

// Stable parameter order shared by the optimizer, gradients and checkpoints.
std::vector<NamedParam> named_parameters(Model& model);
std::vector<ConstNamedParam> named_parameters(const Model& model);

// Disjoint union of a batch of graphs: stacked features, offset edges, and
// node offsets delimiting each graph.
struct GraphBatch {
  Dense2D features;
  std::vector<Edge> edges;
  std::vector<std::size_t> offsets;

  std::size_t num_graphs() const { return offsets.size() - 1; }
};

GraphBatch make_batch(std::span<const Graph* const> graphs);

// Parameters bound to tape nodes, in named_parameters order.
struct LayerVars {
  Var eps, w1, b1, w2, b2;
};
struct EncoderVars {
  std::vector<LayerVars> layers;
};
struct ClassifierVars {
  Var w1, b1, w2, b2;
};

// trainable=false records constants, so no gradients are kept.
EncoderVars bind(Tape& tape, const EncoderParams& params, bool trainable);
ClassifierVars bind(Tape& tape, const ClassifierParams& params, bool trainable);

Var gin_layer_forward(const LayerVars& layer, Var node_states, std::span<const Edge> edges,
                      const EncoderOptions& opts = {});
// Stacked GIN layers (ReLU between layers) then sum pooling per graph: B x d.
Var encode_batch(const EncoderVars& params, Var node_features, const GraphBatch& batch,
                 const EncoderOptions& opts = {});
Var classify(const ClassifierVars& params, Var z, const EncoderOptions& opts = {});

// Value-level forms.
Dense2D gin_layer_forward(const GINLayer& layer, const Dense2D& node_states, const Graph& graph,
                          const EncoderOptions& opts = {});
Dense2D encode(const EncoderParams& params, const Graph& g, const EncoderOptions& opts = {});
Dense2D encode_batch(const EncoderParams& params, std::span<const Graph* const> graphs,
                     const EncoderOptions& opts = {});
Dense2D encode_batch(const EncoderParams& params, std::span<const Graph> graphs,
                     const EncoderOptions& opts = {});
Dense2D classify(const ClassifierParams& params, const Dense2D& z,
                 const EncoderOptions& opts = {});

// Logits for a batch of graphs (encoder then classifier).
Dense2D predict(const Model& model, std::span<const Graph* const> graphs);

}  // namespace oodgnn::encoder
