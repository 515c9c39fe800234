// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/model.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

std::size_t layer_output_dim(const LayerNode& l, std::size_t cur) {
  switch (l.kind) {
    case LayerKind::kDense: return l.w.cols();
    case LayerKind::kKfc: return l.spec.output_dim;
    default: return cur;
  }
}

}  // namespace

LayerNode dense_node(std::string name, std::size_t in, std::size_t out) {
  if (in == 0 || out == 0) throw ArgumentError("dense layer dims must be positive");
  LayerNode l;
  l.kind = LayerKind::kDense;
  l.name = std::move(name);
  l.w = Matrix(in, out);
  l.b = Matrix(1, out);
  return l;
}

LayerNode kfc_node(std::string name, KfcSpec spec) {
  spec.validate();
  LayerNode l;
  l.kind = LayerKind::kKfc;
  l.name = std::move(name);
  l.spec = std::move(spec);
  return l;
}

LayerNode activation_node(std::string name, Activation act) {
  LayerNode l;
  l.kind = LayerKind::kActivation;
  l.name = std::move(name);
  l.act = act;
  return l;
}

LayerNode dropout_node(std::string name, double keep) {
  if (!(keep > 0.0) || keep > 1.0) {
    throw ArgumentError("dropout keep must be in (0, 1], got " + std::to_string(keep));
  }
  LayerNode l;
  l.kind = LayerKind::kDropout;
  l.name = std::move(name);
  l.keep = keep;
  return l;
}

LayerNode softmax_xent_node(std::string name) {
  LayerNode l;
  l.kind = LayerKind::kSoftmaxXent;
  l.name = std::move(name);
  return l;
}

std::size_t Model::output_dim() const {
  std::size_t cur = input_dim;
  for (const auto& l : layers) cur = layer_output_dim(l, cur);
  return cur;
}

void Model::validate() const {
  if (input_dim == 0) throw ArgumentError("model: input dim must be positive");
  if (layers.empty()) throw ArgumentError("model: no layers");
  if (!input_view.empty()) {
    if (input_view.size() != input_dim) {
      throw ShapeError("model: input view has " +
                       std::to_string(input_view.size()) + " entries for input dim " +
                       std::to_string(input_dim));
    }
    std::vector<bool> seen(input_dim, false);
    for (std::size_t j : input_view) {
      if (j >= input_dim || seen[j]) {
        throw ShapeError("model: input view is not a permutation");
      }
      seen[j] = true;
    }
  }
  std::size_t cur = input_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerNode& l = layers[i];
    const bool last = (i + 1 == layers.size());
    if ((l.kind == LayerKind::kSoftmaxXent) != last) {
      throw ArgumentError("model: softmax-xent must be the final node and "
                          "nothing else may be");
    }
    switch (l.kind) {
      case LayerKind::kDense:
        if (l.w.rows() != cur) {
          throw ShapeError("model: layer " + l.name + " expects input " +
                           std::to_string(l.w.rows()) + ", gets " +
                           std::to_string(cur));
        }
        if (l.b.rows() != 1 || l.b.cols() != l.w.cols()) {
          throw ShapeError("model: layer " + l.name + " bias shape mismatch");
        }
        break;
      case LayerKind::kKfc:
        l.spec.validate();
        if (l.spec.input_dim() != cur) {
          throw ShapeError("model: layer " + l.name + " expects input " +
                           std::to_string(l.spec.input_dim()) + ", gets " +
                           std::to_string(cur));
        }
        check_weights(l.spec, l.kw);
        break;
      case LayerKind::kDropout:
        if (!(l.keep > 0.0) || l.keep > 1.0) {
          throw ArgumentError("model: layer " + l.name + " keep out of range");
        }
        break;
      default:
        break;
    }
    cur = layer_output_dim(l, cur);
  }
}

void init_model(Model* model, Rng& rng) {
  for (LayerNode& l : model->layers) {
    if (l.kind == LayerKind::kDense) {
      const double s = std::sqrt(6.0 / (l.w.rows() + l.w.cols()));
      for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = rng.uniform(-s, s);
      l.b = Matrix(1, l.w.cols());
    } else if (l.kind == LayerKind::kKfc) {
      l.kw = init_weights(l.spec, rng);
    }
  }
  model->validate();
}

DropoutResult dropout_forward(const Matrix& x, double keep, Rng& rng,
                              bool train_mode) {
  if (!(keep > 0.0) || keep > 1.0) {
    throw ArgumentError("dropout: keep must be in (0, 1], got " + std::to_string(keep));
  }
  DropoutResult r{x, Matrix(x.rows(), x.cols())};
  if (!train_mode || keep == 1.0) {
    for (std::size_t i = 0; i < r.mask.size(); ++i) r.mask.data()[i] = 1.0;
    return r;
  }
  const double inv = 1.0 / keep;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool kept = rng.uniform(0.0, 1.0) < keep;
    r.mask.data()[i] = kept ? 1.0 : 0.0;
    r.y.data()[i] = kept ? x.data()[i] * inv : 0.0;
  }
  return r;
}

Matrix model_forward(const Model& model, const Matrix& x, bool train_mode,
                     Rng* rng, ForwardCache* cache) {
  model.validate();
  if (x.cols() != model.input_dim) {
    throw ShapeError("model: input is " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + ", model wants width " +
                     std::to_string(model.input_dim));
  }
  Matrix cur;
  if (model.input_view.empty()) {
    cur = x;
  } else {
    cur = Matrix(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double* src = x.data() + i * x.cols();
      double* dst = cur.data() + i * x.cols();
      for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = src[model.input_view[j]];
    }
  }
  if (cache) {
    cache->inputs.assign(model.layers.size(), Matrix());
    cache->masks.assign(model.layers.size(), Matrix());
  }
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const LayerNode& l = model.layers[i];
    if (cache) cache->inputs[i] = cur;
    switch (l.kind) {
      case LayerKind::kDense: {
        Matrix y = matmul(cur, l.w);
        const double* bias = l.b.data();
        for (std::size_t r = 0; r < y.rows(); ++r) {
          double* row = y.data() + r * y.cols();
          for (std::size_t c = 0; c < y.cols(); ++c) row[c] += bias[c];
        }
        cur = std::move(y);
        break;
      }
      case LayerKind::kKfc:
        cur = kfc_forward(l.spec, l.kw, cur);
        break;
      case LayerKind::kActivation: {
        apply_activation(l.act, &cur);
        break;
      }
      case LayerKind::kDropout: {
        if (train_mode && l.keep < 1.0 && rng == nullptr) {
          throw ArgumentError("model: dropout in train mode needs an rng");
        }
        Rng dummy(0);
        DropoutResult d = dropout_forward(cur, l.keep, rng ? *rng : dummy, train_mode);
        if (cache) cache->masks[i] = d.mask;
        cur = std::move(d.y);
        break;
      }
      case LayerKind::kSoftmaxXent:
        break;  // loss attaches outside; logits pass through
    }
  }
  return cur;
}

ModelGrads model_backward(const Model& model, const ForwardCache& cache,
                          const Matrix& grad_logits) {
  if (cache.inputs.size() != model.layers.size()) {
    throw ArgumentError("model: forward cache does not match the model");
  }
  ModelGrads grads;
  grads.layers.resize(model.layers.size());
  Matrix g = grad_logits;
  for (std::size_t idx = model.layers.size(); idx-- > 0;) {
    const LayerNode& l = model.layers[idx];
    const Matrix& x = cache.inputs[idx];
    switch (l.kind) {
      case LayerKind::kDense: {
        const std::size_t n = x.rows(), in = x.cols(), out = l.w.cols();
        if (g.rows() != n || g.cols() != out) {
          throw ShapeError("model: gradient shape mismatch at layer " + l.name);
        }
        LayerGrads& lg = grads.layers[idx];
        lg.w = Matrix(in, out);
        lg.b = Matrix(1, out);
        for (std::size_t r = 0; r < n; ++r) {
          const double* xrow = x.data() + r * in;
          const double* grow = g.data() + r * out;
          for (std::size_t i = 0; i < in; ++i) {
            const double xv = xrow[i];
            double* wrow = lg.w.data() + i * out;
            for (std::size_t j = 0; j < out; ++j) wrow[j] += xv * grow[j];
          }
          double* brow = lg.b.data();
          for (std::size_t j = 0; j < out; ++j) brow[j] += grow[j];
        }
        Matrix gx(n, in);
        for (std::size_t r = 0; r < n; ++r) {
          const double* grow = g.data() + r * out;
          double* gxrow = gx.data() + r * in;
          for (std::size_t i = 0; i < in; ++i) {
            const double* wrow = l.w.data() + i * out;
            double acc = 0.0;
            for (std::size_t j = 0; j < out; ++j) acc += grow[j] * wrow[j];
            gxrow[i] = acc;
          }
        }
        g = std::move(gx);
        break;
      }
      case LayerKind::kKfc: {
        KfcBackward bw = kfc_backward(l.spec, l.kw, x, g);
        grads.layers[idx].kw = std::move(bw.grad_w);
        g = std::move(bw.grad_x);
        break;
      }
      case LayerKind::kActivation:
        apply_activation_grad(l.act, x, &g);
        break;
      case LayerKind::kDropout: {
        const Matrix& mask = cache.masks[idx];
        if (mask.rows() != g.rows() || mask.cols() != g.cols()) {
          throw ShapeError("model: dropout mask missing from the cache");
        }
        const double inv = 1.0 / l.keep;
        for (std::size_t i = 0; i < g.size(); ++i) {
          g.data()[i] *= mask.data()[i] * inv;
        }
        break;
      }
      case LayerKind::kSoftmaxXent:
        break;
    }
  }
  return grads;
}

std::vector<Matrix*> collect_params(Model* model) {
  std::vector<Matrix*> out;
  for (LayerNode& l : model->layers) {
    if (l.kind == LayerKind::kDense) {
      out.push_back(&l.w);
      out.push_back(&l.b);
    } else if (l.kind == LayerKind::kKfc) {
      for (auto& group : l.kw.groups) {
        for (KfcTerm& t : group) {
          out.push_back(&t.a);
          out.push_back(&t.b);
          if (!t.c.empty()) out.push_back(&t.c);
        }
      }
      out.push_back(&l.kw.bias);
    }
  }
  return out;
}

std::vector<Matrix*> collect_grads(ModelGrads* grads) {
  std::vector<Matrix*> out;
  for (LayerGrads& lg : grads->layers) {
    if (!lg.w.empty()) {
      out.push_back(&lg.w);
      out.push_back(&lg.b);
    } else if (!lg.kw.groups.empty()) {
      for (auto& group : lg.kw.groups) {
        for (KfcTerm& t : group) {
          out.push_back(&t.a);
          out.push_back(&t.b);
          if (!t.c.empty()) out.push_back(&t.c);
        }
      }
      out.push_back(&lg.kw.bias);
    }
  }
  return out;
}

std::uint64_t model_param_count(const Model& model) {
  std::uint64_t total = 0;
  for (const LayerNode& l : model.layers) {
    if (l.kind == LayerKind::kDense) {
      total += l.w.size() + l.b.size();
    } else if (l.kind == LayerKind::kKfc) {
      total += count_params(l.spec) + l.spec.output_dim;
    }
  }
  return total;
}

}  // namespace kfc
