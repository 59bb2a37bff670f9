#include <algorithm>
#include <cmath>
#include <limits>

#include "oodgnn/errors.hpp"
#include "oodgnn/numcore/tape.hpp"

namespace oodgnn::numcore {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
}

void require_same_shape(const Dense2D& a, const Dense2D& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Dense2D out = matmul(a.value(), b.value());
  return a.tape().record(std::move(out), {a, b},
                         [](const Dense2D& g, std::span<const Dense2D* const> in, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (dg[0]) add_inplace(*dg[0], matmul_nt(g, *in[1]));
                           if (dg[1]) add_inplace(*dg[1], matmul_tn(*in[0], g));
                         });
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Dense2D out = a.value();
  add_inplace(out, b.value());
  return a.tape().record(std::move(out), {a, b},
                         [](const Dense2D& g, std::span<const Dense2D* const>, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (dg[0]) add_inplace(*dg[0], g);
                           if (dg[1]) add_inplace(*dg[1], g);
                         });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Dense2D out = a.value();
  auto dst = out.values();
  auto src = b.value().values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= src[i];
  return a.tape().record(std::move(out), {a, b},
                         [](const Dense2D& g, std::span<const Dense2D* const>, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (dg[0]) add_inplace(*dg[0], g);
                           if (dg[1]) {
                             auto d = dg[1]->values();
                             auto gv = g.values();
                             for (std::size_t i = 0; i < d.size(); ++i) d[i] -= gv[i];
                           }
                         });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Dense2D out = a.value();
  auto dst = out.values();
  auto src = b.value().values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
  return a.tape().record(std::move(out), {a, b},
                         [](const Dense2D& g, std::span<const Dense2D* const> in, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           auto gv = g.values();
                           if (dg[0]) {
                             auto d = dg[0]->values();
                             auto other = in[1]->values();
                             for (std::size_t i = 0; i < d.size(); ++i) d[i] += gv[i] * other[i];
                           }
                           if (dg[1]) {
                             auto d = dg[1]->values();
                             auto other = in[0]->values();
                             for (std::size_t i = 0; i < d.size(); ++i) d[i] += gv[i] * other[i];
                           }
                         });
}

Var add_row_bias(Var a, Var bias) {
  require_same_tape(a, bias, "add_row_bias");
  if (bias.value().rows() != 1 || bias.value().cols() != a.value().cols()) {
    throw DimensionError("add_row_bias: bias " + bias.value().shape_string() +
                         " does not broadcast over " + a.value().shape_string());
  }
  Dense2D out = a.value();
  const auto b = bias.value().values();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  return a.tape().record(std::move(out), {a, bias},
                         [](const Dense2D& g, std::span<const Dense2D* const>, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (dg[0]) add_inplace(*dg[0], g);
                           if (dg[1]) {
                             auto d = dg[1]->values();
                             for (std::size_t r = 0; r < g.rows(); ++r) {
                               auto row = g.row(r);
                               for (std::size_t c = 0; c < row.size(); ++c) d[c] += row[c];
                             }
                           }
                         });
}

Var relu(Var a) {
  Dense2D out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return a.tape().record(std::move(out), {a},
                         [](const Dense2D& g, std::span<const Dense2D* const> in, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (!dg[0]) return;
                           auto d = dg[0]->values();
                           auto x = in[0]->values();
                           auto gv = g.values();
                           for (std::size_t i = 0; i < d.size(); ++i)
                             if (x[i] > 0.0) d[i] += gv[i];
                         });
}

Var scale(Var a, double factor) {
  Dense2D out = a.value();
  for (double& v : out.values()) v *= factor;
  return a.tape().record(std::move(out), {a},
                         [factor](const Dense2D& g, std::span<const Dense2D* const>,
                                  const Dense2D&, std::span<Dense2D* const> dg) {
                           if (!dg[0]) return;
                           auto d = dg[0]->values();
                           auto gv = g.values();
                           for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * gv[i];
                         });
}

Var scale_by(Var a, Var s) {
  require_same_tape(a, s, "scale_by");
  const double factor = s.value().item();
  Dense2D out = a.value();
  for (double& v : out.values()) v *= factor;
  return a.tape().record(std::move(out), {a, s},
                         [](const Dense2D& g, std::span<const Dense2D* const> in, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           const double factor = in[1]->item();
                           auto gv = g.values();
                           if (dg[0]) {
                             auto d = dg[0]->values();
                             for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * gv[i];
                           }
                           if (dg[1]) {
                             auto x = in[0]->values();
                             double acc = 0.0;
                             for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * gv[i];
                             (*dg[1])(0, 0) += acc;
                           }
                         });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  return a.tape().record(Dense2D(1, 1, total), {a},
                         [](const Dense2D& g, std::span<const Dense2D* const>, const Dense2D&,
                            std::span<Dense2D* const> dg) {
                           if (!dg[0]) return;
                           const double gv = g.item();
                           for (double& d : dg[0]->values()) d += gv;
                         });
}

Var segment_sum(Var a, std::vector<std::size_t> offsets) {
  const Dense2D& x = a.value();
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != x.rows() ||
      !std::is_sorted(offsets.begin(), offsets.end())) {
    throw DimensionError("segment_sum: offsets do not partition " + x.shape_string());
  }
  const std::size_t segments = offsets.size() - 1;
  Dense2D out(segments, x.cols());
  for (std::size_t s = 0; s < segments; ++s) {
    auto orow = out.row(s);
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
      auto xrow = x.row(r);
      for (std::size_t c = 0; c < orow.size(); ++c) orow[c] += xrow[c];
    }
  }
  return a.tape().record(std::move(out), {a},
                         [offsets = std::move(offsets)](const Dense2D& g,
                                                        std::span<const Dense2D* const>,
                                                        const Dense2D&,
                                                        std::span<Dense2D* const> dg) {
                           if (!dg[0]) return;
                           for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
                             auto grow = g.row(s);
                             for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
                               auto drow = dg[0]->row(r);
                               for (std::size_t c = 0; c < drow.size(); ++c) drow[c] += grow[c];
                             }
                           }
                         });
}

Var neighbor_sum(Var a, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  const Dense2D& x = a.value();
  for (const auto& [u, v] : edges) {
    if (u >= x.rows() || v >= x.rows()) {
      throw IndexError("neighbor_sum: edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") outside " + std::to_string(x.rows()) + " nodes");
    }
  }
  // Aggregation is symmetric, so the backward rule is the same scatter.
  auto scatter = [](const Dense2D& src, Dense2D& dst,
                    std::span<const std::pair<std::size_t, std::size_t>> es) {
    for (const auto& [u, v] : es) {
      auto su = src.row(u), sv = src.row(v);
      auto du = dst.row(u), dv = dst.row(v);
      for (std::size_t c = 0; c < du.size(); ++c) {
        du[c] += sv[c];
        dv[c] += su[c];
      }
    }
  };
  Dense2D out(x.rows(), x.cols());
  scatter(x, out, edges);
  std::vector<std::pair<std::size_t, std::size_t>> kept(edges.begin(), edges.end());
  return a.tape().record(std::move(out), {a},
                         [scatter, kept = std::move(kept)](const Dense2D& g,
                                                           std::span<const Dense2D* const>,
                                                           const Dense2D&,
                                                           std::span<Dense2D* const> dg) {
                           if (dg[0]) scatter(g, *dg[0], kept);
                         });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels,
                          std::span<const double> weights) {
  const Dense2D& z = logits.value();
  const std::size_t batch = z.rows(), classes = z.cols();
  if (labels.size() != batch || weights.size() != batch) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels and " +
                         std::to_string(weights.size()) + " weights for logits " +
                         z.shape_string());
  }
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw IndexError("softmax_cross_entropy: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  // Row-wise probabilities are kept for the backward rule.
  Dense2D probs(batch, classes);
  double loss = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    auto row = z.row(n);
    const double peak = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - peak);
    const double log_denom = std::log(denom);
    for (std::size_t c = 0; c < classes; ++c) probs(n, c) = std::exp(row[c] - peak - log_denom);
    const double nll = -(row[labels[n]] - peak - log_denom);
    loss += weights[n] * nll;
  }
  loss /= static_cast<double>(batch);

  std::vector<int> y(labels.begin(), labels.end());
  std::vector<double> w(weights.begin(), weights.end());
  return logits.tape().record(
      Dense2D(1, 1, loss), {logits},
      [probs = std::move(probs), y = std::move(y), w = std::move(w)](
          const Dense2D& g, std::span<const Dense2D* const>, const Dense2D&,
          std::span<Dense2D* const> dg) {
        if (!dg[0]) return;
        const double scale = g.item() / static_cast<double>(probs.rows());
        for (std::size_t n = 0; n < probs.rows(); ++n) {
          auto drow = dg[0]->row(n);
          auto prow = probs.row(n);
          const double coef = scale * w[n];
          for (std::size_t c = 0; c < drow.size(); ++c) drow[c] += coef * prow[c];
          drow[static_cast<std::size_t>(y[n])] -= coef;
        }
      });
}

}  // namespace oodgnn::numcore
