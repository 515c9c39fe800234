// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_MODEL_HPP_
#define KFC_MODEL_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "kfc/activation.hpp"
#include "kfc/kfc_layer.hpp"
#include "kfc/kfc_spec.hpp"
#include "kfc/matrix.hpp"
#include "kfc/rng.hpp"

namespace kfc {

enum class LayerKind { kDense, kKfc, kActivation, kDropout, kSoftmaxXent };

// One node of a feed-forward stack. Only the fields for its kind are used.
struct LayerNode {
  LayerKind kind = LayerKind::kDense;
  std::string name;
  Matrix w;  // dense: in x out
  Matrix b;  // dense: 1 x out
  KfcSpec spec;
  KfcWeights kw;
  Activation act = Activation::kAbsTanh;
  double keep = 1.0;  // dropout keep probability
};

LayerNode dense_node(std::string name, std::size_t in, std::size_t out);
LayerNode kfc_node(std::string name, KfcSpec spec);
LayerNode activation_node(std::string name, Activation act);
LayerNode dropout_node(std::string name, double keep);
LayerNode softmax_xent_node(std::string name);

// Feed-forward classifier. When input_view is nonempty it permutes the
// feature columns before the first layer: fed(i, j) = x(i, input_view[j]).
// view_desc is the serialized recipe the view was built from.
struct Model {
  std::size_t input_dim = 0;
  std::vector<std::size_t> input_view;
  std::string view_desc;
  std::vector<LayerNode> layers;

  std::size_t output_dim() const;
  // Checks dimension chaining, the view permutation, and that the stack ends
  // with exactly one softmax-xent node.
  void validate() const;
};

// Fills trainable parameters: dense weights and KFC factors fan-based
// uniform, biases zero. Consumes the stream in layer order.
void init_model(Model* model, Rng& rng);

struct DropoutResult {
  Matrix y;
  Matrix mask;  // entries 0 or 1
};

// Inverted dropout: train mode keeps each entry with probability keep and
// scales by 1/keep; eval mode passes x through with an all-ones mask.
// keep == 1 draws nothing from the stream.
DropoutResult dropout_forward(const Matrix& x, double keep, Rng& rng,
                              bool train_mode);

struct LayerGrads {
  Matrix w;
  Matrix b;
  KfcWeights kw;
};

struct ModelGrads {
  std::vector<LayerGrads> layers;
};

struct ForwardCache {
  std::vector<Matrix> inputs;  // inputs[i] feeds layers[i]
  std::vector<Matrix> masks;   // dropout masks, empty elsewhere
};

// Runs the stack to logits; the trailing softmax-xent node passes through.
// Train mode draws dropout masks from rng and, when cache is given, records
// what backward needs.
Matrix model_forward(const Model& model, const Matrix& x, bool train_mode,
                     Rng* rng, ForwardCache* cache);

// Gradients of every trainable parameter given d(loss)/d(logits).
ModelGrads model_backward(const Model& model, const ForwardCache& cache,
                          const Matrix& grad_logits);

// Trainable parameter matrices in a fixed traversal order: per layer, dense
// {w, b}; KFC factors per group and term {a, b[, c]}, then the KFC bias.
// collect_grads yields the matching order over a gradient set.
std::vector<Matrix*> collect_params(Model* model);
std::vector<Matrix*> collect_grads(ModelGrads* grads);

// Total trainable entries, bias included.
std::uint64_t model_param_count(const Model& model);

}  // namespace kfc

#endif  // KFC_MODEL_HPP_
