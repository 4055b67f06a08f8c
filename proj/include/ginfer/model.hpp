/**
 * Copyright (c) 2026 The ginfer authors.
 *     All rights reserved.
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing,
 *  software distributed under the License is distributed on an "AS
 *  IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either
 *  express or implied.  See the License for the specific language
 *  governing permissions and limitations under the License.
 */

#ifndef GINFER_MODEL_HPP
#define GINFER_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ginfer/aggregate.hpp"
#include "ginfer/graph.hpp"
#include "ginfer/rng.hpp"
#include "ginfer/tensor.hpp"

namespace ginfer {

enum class GnnAlgorithm : std::uint8_t { kSage, kGat, kGcn };

inline const char* to_string(GnnAlgorithm a) {
  switch (a) {
    case GnnAlgorithm::kSage: return "sage";
    case GnnAlgorithm::kGat: return "gat";
    case GnnAlgorithm::kGcn: return "gcn";
  }
  return "?";
}

inline GnnAlgorithm parse_algorithm(const std::string& s) {
  if (s == "sage") return GnnAlgorithm::kSage;
  if (s == "gat") return GnnAlgorithm::kGat;
  if (s == "gcn") return GnnAlgorithm::kGcn;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

constexpr float kGatLeakySlope = 0.2f;

// Per-layer stage metadata captured when a model is saved. The engines read
// it to decide how messages may be combined, compressed, or re-routed
// without changing results.
struct LayerSignature {
  AggregateKind aggregate_kind = AggregateKind::kSumCount;
  bool aggregate_is_size_reducing = true;
  bool message_uniform_over_out_edges = true;
  bool partial_gather = false;
  bool broadcast = false;
  bool shadow_nodes = false;
  std::uint32_t input_dim = 0;
  std::uint32_t output_dim = 0;

  void validate() const {
    if (partial_gather && !aggregate_is_size_reducing) {
      throw std::runtime_error(
          "signature: partial_gather requires a size-reducing aggregate");
    }
    if (broadcast && !message_uniform_over_out_edges) {
      throw std::runtime_error("signature: broadcast requires uniform messages");
    }
    if ((aggregate_kind == AggregateKind::kUnion) == aggregate_is_size_reducing) {
      throw std::runtime_error("signature: size_reducing flag contradicts aggregate kind");
    }
  }
};

struct GnnLayer {
  GnnAlgorithm algorithm = GnnAlgorithm::kSage;
  // sage
  DenseMatrix w_self;
  DenseMatrix w_nbr;
  // gcn / gat
  DenseMatrix w;
  // gat attention
  DenseVector a_src;
  DenseVector a_dst;
  // all
  DenseVector bias;
  LayerSignature signature;

  void validate() const {
    signature.validate();
    const std::size_t in = signature.input_dim;
    const std::size_t out = signature.output_dim;
    auto expect = [](bool ok, const char* what) {
      if (!ok) throw std::runtime_error(std::string("layer: bad shape for ") + what);
    };
    switch (algorithm) {
      case GnnAlgorithm::kSage:
        expect(w_self.rows == out && w_self.cols == in, "w_self");
        expect(w_nbr.rows == out && w_nbr.cols == in, "w_nbr");
        break;
      case GnnAlgorithm::kGcn:
        expect(w.rows == out && w.cols == in, "w");
        break;
      case GnnAlgorithm::kGat:
        expect(w.rows == out && w.cols == in, "w");
        expect(a_src.size() == out, "a_src");
        expect(a_dst.size() == out, "a_dst");
        break;
    }
    expect(bias.size() == out, "bias");
    for (float v : bias)
      if (!std::isfinite(v)) throw std::runtime_error("layer: non-finite parameter");
  }
};

struct PredictionHead {
  DenseMatrix w_out;
  DenseVector b_out;
};

struct ModelBundle {
  GnnAlgorithm algorithm = GnnAlgorithm::kSage;
  std::uint32_t feature_dim = 0;
  std::uint32_t num_classes = 0;
  std::vector<GnnLayer> layers;
  PredictionHead head;

  std::uint32_t depth() const { return static_cast<std::uint32_t>(layers.size()); }

  void validate() const {
    if (layers.empty()) throw std::runtime_error("model: needs at least one layer");
    if (layers.front().signature.input_dim != feature_dim) {
      throw std::runtime_error("model: layer 1 input dim != feature dim");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i].validate();
      if (i + 1 < layers.size() &&
          layers[i].signature.output_dim != layers[i + 1].signature.input_dim) {
        throw std::runtime_error("model: layer dim chain broken at layer " +
                                 std::to_string(i + 1));
      }
    }
    if (head.w_out.cols != layers.back().signature.output_dim ||
        head.w_out.rows != num_classes || head.b_out.size() != num_classes) {
      throw std::runtime_error("model: prediction head shape mismatch");
    }
  }
};

// Node-local facts that the stage functions need beyond the embedding:
// the out-degree in the original graph (sender-side GCN normalization) and
// whether the node carries a self-loop (local self-attention term in GAT).
struct NodeContext {
  std::uint64_t out_degree = 0;
  bool has_self_loop = false;
};

// ---------------------------------------------------------------------------
// Stage functions

// h^0 := raw features (identity input transform; layer 1 consumes them).
inline NodeState init_embedding(const GnnLayer& first_layer, const NodeRecord& record) {
  if (record.features.size() != first_layer.signature.input_dim) {
    throw std::invalid_argument("init_embedding: feature dim " +
                                std::to_string(record.features.size()) + " != layer input " +
                                std::to_string(first_layer.signature.input_dim));
  }
  return NodeState{record.features, 0};
}

// Message payload for one out-edge, computed from the sender's state. All
// built-in layers emit the same payload on every out-edge (recorded in the
// signature as message_uniform_over_out_edges).
//   sage: h
//   gcn:  h / sqrt(out_degree + 1)
//   gat:  [z, s] with z = W h and s = a_src . z
inline DenseVector apply_edge(const GnnLayer& layer, const NodeState& state,
                              const NodeContext& ctx, const OutEdge& /*edge*/) {
  switch (layer.algorithm) {
    case GnnAlgorithm::kSage:
      return state.embedding;
    case GnnAlgorithm::kGcn: {
      const float norm = 1.0f / std::sqrt(static_cast<float>(ctx.out_degree + 1));
      return scaled(state.embedding, norm);
    }
    case GnnAlgorithm::kGat: {
      DenseVector z = matvec(layer.w, state.embedding);
      const float s = dot(layer.a_src, z);
      z.push_back(s);
      return z;
    }
  }
  return {};
}

// Update a node from its previous state and the gathered in-edge reduction.
//
//   sage: act(W_self h + W_nbr mean + b)
//   gcn:  act(W (h / (sqrt(out+1) sqrt(in+1)) + sum / sqrt(in+1)) + b)
//         with in = message count, senders already scaled by 1/sqrt(out_u+1)
//   gat:  scores e_u = leaky_relu(s_u + a_dst . z_v) over in-edges in source
//         order, plus a local self term when the node has a self-loop;
//         alpha = softmax(e); act(sum alpha_u z_u)
//
// act is relu (sage/gcn) or elu (gat) on hidden layers and identity on the
// last layer.
inline NodeState apply_node(const GnnLayer& layer, const NodeState& state,
                            const AggregateState& gathered, const NodeContext& ctx,
                            bool is_last_layer) {
  if (state.embedding.size() != layer.signature.input_dim) {
    throw std::invalid_argument("apply_node: state dim mismatch");
  }
  if (gathered.kind != layer.signature.aggregate_kind) {
    throw std::invalid_argument("apply_node: aggregate kind mismatch");
  }
  DenseVector pre;
  switch (layer.algorithm) {
    case GnnAlgorithm::kSage: {
      const DenseVector mean = aggregate_finalize(gathered, layer.signature.input_dim);
      pre = matvec(layer.w_self, state.embedding);
      add_in_place(pre, matvec(layer.w_nbr, mean));
      add_in_place(pre, layer.bias);
      break;
    }
    case GnnAlgorithm::kGcn: {
      const float in_norm =
          1.0f / std::sqrt(static_cast<float>(gathered.count + 1));
      const float self_norm =
          in_norm / std::sqrt(static_cast<float>(ctx.out_degree + 1));
      DenseVector combined = scaled(state.embedding, self_norm);
      if (!gathered.sum.empty()) add_scaled_in_place(combined, in_norm, gathered.sum);
      pre = matvec(layer.w, combined);
      add_in_place(pre, layer.bias);
      break;
    }
    case GnnAlgorithm::kGat: {
      auto entries = aggregate_finalize_union(gathered);
      const std::size_t out_dim = layer.signature.output_dim;
      DenseVector z_self = matvec(layer.w, state.embedding);
      const float dst_term = dot(layer.a_dst, z_self);

      DenseVector scores;
      scores.reserve(entries.size() + 1);
      for (const auto& [src, payload] : entries) {
        if (payload.size() != out_dim + 1) {
          throw std::invalid_argument("apply_node: bad gat payload dimension");
        }
        scores.push_back(leaky_relu_scalar(payload[out_dim] + dst_term, kGatLeakySlope));
      }
      const bool self_term = ctx.has_self_loop;
      if (self_term) {
        const float s_self = dot(layer.a_src, z_self);
        scores.push_back(leaky_relu_scalar(s_self + dst_term, kGatLeakySlope));
      }
      pre.assign(out_dim, 0.0f);
      if (!scores.empty()) {
        const DenseVector alpha = softmax(scores);
        for (std::size_t i = 0; i < entries.size(); ++i) {
          for (std::size_t d = 0; d < out_dim; ++d) {
            pre[d] += alpha[i] * entries[i].second[d];
          }
        }
        if (self_term) {
          add_scaled_in_place(pre, alpha.back(), z_self);
        }
      }
      add_in_place(pre, layer.bias);
      break;
    }
  }
  Activation act = Activation::kIdentity;
  if (!is_last_layer) {
    act = layer.algorithm == GnnAlgorithm::kGat ? Activation::kElu : Activation::kRelu;
  }
  return NodeState{activation(act, pre), state.layer_index + 1};
}

struct Prediction {
  DenseVector logits;
  std::uint32_t predicted_class = 0;
};

// logits = W_out h + b_out; argmax with lowest-index tie-break.
inline Prediction predict(const PredictionHead& head, const NodeState& state) {
  Prediction p;
  p.logits = matvec(head.w_out, state.embedding);
  add_in_place(p.logits, head.b_out);
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < p.logits.size(); ++i) {
    if (p.logits[i] > p.logits[best]) best = i;
  }
  p.predicted_class = best;
  return p;
}

// ---------------------------------------------------------------------------
// Construction and serialization

inline LayerSignature default_signature(GnnAlgorithm algorithm, std::uint32_t input_dim,
                                        std::uint32_t output_dim) {
  LayerSignature sig;
  sig.input_dim = input_dim;
  sig.output_dim = output_dim;
  switch (algorithm) {
    case GnnAlgorithm::kSage:
    case GnnAlgorithm::kGcn:
      sig.aggregate_kind = AggregateKind::kSumCount;
      sig.aggregate_is_size_reducing = true;
      sig.message_uniform_over_out_edges = true;
      // Combining and broadcasting compose for these layers because every
      // out-edge carries the same size-reducible payload.
      sig.partial_gather = true;
      sig.broadcast = true;
      sig.shadow_nodes = false;
      break;
    case GnnAlgorithm::kGat:
      sig.aggregate_kind = AggregateKind::kUnion;
      sig.aggregate_is_size_reducing = false;
      sig.message_uniform_over_out_edges = true;
      sig.partial_gather = false;
      sig.broadcast = true;
      sig.shadow_nodes = true;
      break;
  }
  return sig;
}

namespace detail {

inline DenseMatrix glorot_matrix(std::size_t rows, std::size_t cols, SplitMix64& rng) {
  const float s = std::sqrt(6.0f / static_cast<float>(rows + cols));
  DenseMatrix m{rows, cols, std::vector<float>(rows * cols)};
  for (float& v : m.data) v = rng.next_symmetric(s);
  return m;
}

inline DenseVector glorot_vector(std::size_t dim, std::size_t fan_sum, SplitMix64& rng) {
  const float s = std::sqrt(6.0f / static_cast<float>(fan_sum));
  DenseVector v(dim);
  for (float& x : v) x = rng.next_symmetric(s);
  return v;
}

}  // namespace detail

// Deterministic random model: uniform(-s, s) with s = sqrt(6 / (fan_in +
// fan_out)), drawn from a splitmix64 stream so any platform reproduces the
// same parameters for a given seed.
inline ModelBundle seeded_random_model(GnnAlgorithm algorithm, std::uint32_t feature_dim,
                                       std::uint32_t hidden_dim, std::uint32_t num_classes,
                                       std::uint32_t num_layers, std::uint64_t seed) {
  if (num_layers == 0) throw std::invalid_argument("model: num_layers must be >= 1");
  if (feature_dim == 0 || hidden_dim == 0 || num_classes == 0) {
    throw std::invalid_argument("model: dims must be positive");
  }
  SplitMix64 rng(seed);
  ModelBundle m;
  m.algorithm = algorithm;
  m.feature_dim = feature_dim;
  m.num_classes = num_classes;
  for (std::uint32_t k = 0; k < num_layers; ++k) {
    const std::uint32_t in = k == 0 ? feature_dim : hidden_dim;
    const std::uint32_t out = hidden_dim;
    GnnLayer layer;
    layer.algorithm = algorithm;
    layer.signature = default_signature(algorithm, in, out);
    switch (algorithm) {
      case GnnAlgorithm::kSage:
        layer.w_self = detail::glorot_matrix(out, in, rng);
        layer.w_nbr = detail::glorot_matrix(out, in, rng);
        break;
      case GnnAlgorithm::kGcn:
        layer.w = detail::glorot_matrix(out, in, rng);
        break;
      case GnnAlgorithm::kGat:
        layer.w = detail::glorot_matrix(out, in, rng);
        layer.a_src = detail::glorot_vector(out, out + 1, rng);
        layer.a_dst = detail::glorot_vector(out, out + 1, rng);
        break;
    }
    layer.bias = detail::glorot_vector(out, in + out, rng);
    m.layers.push_back(std::move(layer));
  }
  m.head.w_out = detail::glorot_matrix(num_classes, hidden_dim, rng);
  m.head.b_out = detail::glorot_vector(num_classes, hidden_dim + num_classes, rng);
  m.validate();
  return m;
}

namespace detail {

constexpr int kModelFormatVersion = 1;

inline nlohmann::ordered_json matrix_to_json(const DenseMatrix& m) {
  return nlohmann::ordered_json{
      {"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

inline DenseMatrix matrix_from_json(const nlohmann::json& j) {
  DenseMatrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<float>>();
  if (m.data.size() != m.rows * m.cols) {
    throw std::runtime_error("model file: matrix payload size mismatch");
  }
  return m;
}

inline AggregateKind parse_aggregate_kind(const std::string& s) {
  if (s == "sum_count") return AggregateKind::kSumCount;
  if (s == "max") return AggregateKind::kMax;
  if (s == "union") return AggregateKind::kUnion;
  throw std::runtime_error("model file: unknown aggregate kind '" + s + "'");
}

}  // namespace detail

inline void save_model(const ModelBundle& model, const std::filesystem::path& path) {
  model.validate();
  nlohmann::ordered_json j;
  j["version"] = detail::kModelFormatVersion;
  j["algorithm"] = to_string(model.algorithm);
  j["feature_dim"] = model.feature_dim;
  j["num_classes"] = model.num_classes;
  j["layers"] = nlohmann::ordered_json::array();
  for (const GnnLayer& layer : model.layers) {
    nlohmann::ordered_json lj;
    lj["input_dim"] = layer.signature.input_dim;
    lj["output_dim"] = layer.signature.output_dim;
    nlohmann::ordered_json weights;
    switch (layer.algorithm) {
      case GnnAlgorithm::kSage:
        weights["w_self"] = detail::matrix_to_json(layer.w_self);
        weights["w_nbr"] = detail::matrix_to_json(layer.w_nbr);
        break;
      case GnnAlgorithm::kGcn:
        weights["w"] = detail::matrix_to_json(layer.w);
        break;
      case GnnAlgorithm::kGat:
        weights["w"] = detail::matrix_to_json(layer.w);
        weights["a_src"] = layer.a_src;
        weights["a_dst"] = layer.a_dst;
        break;
    }
    weights["bias"] = layer.bias;
    lj["weights"] = std::move(weights);
    lj["signature"] = nlohmann::ordered_json{
        {"aggregate_kind", to_string(layer.signature.aggregate_kind)},
        {"size_reducing", layer.signature.aggregate_is_size_reducing},
        {"message_uniform", layer.signature.message_uniform_over_out_edges},
        {"partial_gather", layer.signature.partial_gather},
        {"broadcast", layer.signature.broadcast},
        {"shadow_nodes", layer.signature.shadow_nodes},
    };
    j["layers"].push_back(std::move(lj));
  }
  j["head"] = nlohmann::ordered_json{{"W_out", detail::matrix_to_json(model.head.w_out)},
                                     {"b_out", model.head.b_out}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << j.dump(2) << '\n';
}

inline ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt model file " + path.string() + ": " + e.what());
  }
  try {
    const int version = j.at("version").get<int>();
    if (version != detail::kModelFormatVersion) {
      throw std::runtime_error("model file version " + std::to_string(version) +
                               " unsupported (expected " +
                               std::to_string(detail::kModelFormatVersion) + ")");
    }
    ModelBundle m;
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.feature_dim = j.at("feature_dim").get<std::uint32_t>();
    m.num_classes = j.at("num_classes").get<std::uint32_t>();
    for (const auto& lj : j.at("layers")) {
      GnnLayer layer;
      layer.algorithm = m.algorithm;
      layer.signature.input_dim = lj.at("input_dim").get<std::uint32_t>();
      layer.signature.output_dim = lj.at("output_dim").get<std::uint32_t>();
      const auto& sj = lj.at("signature");
      layer.signature.aggregate_kind =
          detail::parse_aggregate_kind(sj.at("aggregate_kind").get<std::string>());
      layer.signature.aggregate_is_size_reducing = sj.at("size_reducing").get<bool>();
      layer.signature.message_uniform_over_out_edges = sj.at("message_uniform").get<bool>();
      layer.signature.partial_gather = sj.at("partial_gather").get<bool>();
      layer.signature.broadcast = sj.at("broadcast").get<bool>();
      layer.signature.shadow_nodes = sj.at("shadow_nodes").get<bool>();
      const auto& weights = lj.at("weights");
      switch (m.algorithm) {
        case GnnAlgorithm::kSage:
          layer.w_self = detail::matrix_from_json(weights.at("w_self"));
          layer.w_nbr = detail::matrix_from_json(weights.at("w_nbr"));
          break;
        case GnnAlgorithm::kGcn:
          layer.w = detail::matrix_from_json(weights.at("w"));
          break;
        case GnnAlgorithm::kGat:
          layer.w = detail::matrix_from_json(weights.at("w"));
          layer.a_src = weights.at("a_src").get<DenseVector>();
          layer.a_dst = weights.at("a_dst").get<DenseVector>();
          break;
      }
      layer.bias = weights.at("bias").get<DenseVector>();
      m.layers.push_back(std::move(layer));
    }
    m.head.w_out = detail::matrix_from_json(j.at("head").at("W_out"));
    m.head.b_out = j.at("head").at("b_out").get<DenseVector>();
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupt model file " + path.string() + ": " + e.what());
  }
}

}  // namespace ginfer

#endif  // GINFER_MODEL_HPP
