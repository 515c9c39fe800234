// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

void check_labels(const Matrix& x, const std::vector<int>& labels,
                  const char* where) {
  if (labels.size() != x.rows()) {
    throw ShapeError(std::string(where) + ": " + std::to_string(x.rows()) +
                     " rows but " + std::to_string(labels.size()) + " labels");
  }
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
  Matrix out(end - begin, x.cols());
  for (std::size_t i = begin; i < end; ++i) {
    std::memcpy(out.data() + (i - begin) * x.cols(),
                x.data() + order[i] * x.cols(), x.cols() * sizeof(double));
  }
  return out;
}

void check_aligned(const std::vector<Matrix*>& params,
                   const std::vector<Matrix*>& grads) {
  if (params.size() != grads.size()) {
    throw ArgumentError("optimizer: " + std::to_string(params.size()) +
                        " params vs " + std::to_string(grads.size()) +
                        " grads");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() ||
        params[i]->cols() != grads[i]->cols()) {
      throw ShapeError("optimizer: param/grad shape mismatch at slot " +
                       std::to_string(i));
    }
  }
}

void apply_decay(const std::vector<Matrix*>& params, const OptimState& s) {
  if (s.weight_decay == 0.0) return;
  const double shrink = 1.0 - s.lr * s.weight_decay;
  for (Matrix* p : params) {
    for (std::size_t i = 0; i < p->size(); ++i) p->data()[i] *= shrink;
  }
}

}  // namespace

XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels) {
  check_labels(logits, labels, "softmax_xent");
  const std::size_t n = logits.rows(), k = logits.cols();
  if (n == 0) throw ArgumentError("softmax_xent: empty batch");
  XentResult r{0.0, Matrix(n, k)};
  const double invn = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw ArgumentError("softmax_xent: label " + std::to_string(y) +
                          " outside [0, " + std::to_string(k) + ")");
    }
    const double* row = logits.data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    double* grow = r.grad.data() + i * k;
    for (std::size_t j = 0; j < k; ++j) {
      grow[j] = std::exp(row[j] - mx);
      sum += grow[j];
    }
    r.loss += (std::log(sum) - (row[y] - mx)) * invn;
    const double invs = invn / sum;
    for (std::size_t j = 0; j < k; ++j) grow[j] *= invs;
    grow[y] -= invn;
  }
  return r;
}

void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix*>& grads, OptimState* state) {
  check_aligned(params, grads);
  if (state->m.empty()) {
    for (Matrix* p : params) {
      state->m.emplace_back(p->rows(), p->cols());
      state->v.emplace_back(p->rows(), p->cols());
    }
  }
  if (state->m.size() != params.size()) {
    throw ArgumentError("adam_step: moment buffers built for " +
                        std::to_string(state->m.size()) + " params, got " +
                        std::to_string(params.size()));
  }
  apply_decay(params, *state);
  state->step_count += 1;
  const double t = static_cast<double>(state->step_count);
  const double bc1 = 1.0 - std::pow(state->beta1, t);
  const double bc2 = 1.0 - std::pow(state->beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = state->m[i].data();
    double* v = state->v[i].data();
    if (state->m[i].size() != params[i]->size()) {
      throw ShapeError("adam_step: moment shape drifted at slot " +
                       std::to_string(i));
    }
    for (std::size_t j = 0; j < params[i]->size(); ++j) {
      m[j] = state->beta1 * m[j] + (1.0 - state->beta1) * g[j];
      v[j] = state->beta2 * v[j] + (1.0 - state->beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[j] -= state->lr * mhat / (std::sqrt(vhat) + state->eps);
    }
  }
}

void sgd_step(const std::vector<Matrix*>& params,
              const std::vector<Matrix*>& grads, OptimState* state) {
  check_aligned(params, grads);
  apply_decay(params, *state);
  state->step_count += 1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    for (std::size_t j = 0; j < params[i]->size(); ++j) {
      p[j] -= state->lr * g[j];
    }
  }
}

TrainResult train(Model model, const Matrix& train_x,
                  const std::vector<int>& train_y, const Matrix& val_x,
                  const std::vector<int>& val_y, const TrainConfig& cfg,
                  Rng& rng, std::ostream* log) {
  model.validate();
  check_labels(train_x, train_y, "train");
  check_labels(val_x, val_y, "train (validation)");
  if (cfg.batch_size == 0) throw ArgumentError("train: batch size 0");
  if (cfg.epochs == 0) throw ArgumentError("train: epoch count 0");
  if (train_x.rows() == 0) throw ArgumentError("train: no training rows");

  OptimState state;
  state.kind = cfg.optimizer;
  state.lr = cfg.lr;
  state.weight_decay = cfg.weight_decay;

  TrainResult result;
  result.best_val_error = std::numeric_limits<double>::infinity();

  const std::size_t n = train_x.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<Matrix*> params = collect_params(&model);
  std::vector<int> batch_y;
  ForwardCache cache;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates; one swap per position keeps the draw count fixed.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_index(i + 1);
      std::swap(order[i], order[j]);
    }
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      Matrix xb = gather_rows(train_x, order, start, stop);
      batch_y.assign(stop - start, 0);
      for (std::size_t i = start; i < stop; ++i) {
        batch_y[i - start] = train_y[order[i]];
      }
      Matrix logits = model_forward(model, xb, true, &rng, &cache);
      XentResult xr = softmax_xent(logits, batch_y);
      if (!std::isfinite(xr.loss)) {
        throw NumericError("train: loss is not finite at epoch " +
                           std::to_string(epoch));
      }
      loss_sum += xr.loss * static_cast<double>(stop - start);
      ModelGrads grads = model_backward(model, cache, xr.grad);
      std::vector<Matrix*> gp = collect_grads(&grads);
      if (cfg.optimizer == OptKind::kAdam) {
        adam_step(params, gp, &state);
      } else {
        sgd_step(params, gp, &state);
      }
    }
    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(n);
    stats.val_error = evaluate(model, val_x, val_y);
    result.history.push_back(stats);
    if (stats.val_error < result.best_val_error) {
      result.best_val_error = stats.val_error;
      result.best_epoch = epoch;
      result.best_model = model;
    }
    if (log) {
      *log << "epoch " << epoch << " loss " << stats.train_loss
           << " val_error " << stats.val_error << "\n";
    }
  }
  return result;
}

std::size_t evaluate_errors(const Model& model, const Matrix& x,
                            const std::vector<int>& labels,
                            std::size_t batch_size) {
  check_labels(x, labels, "evaluate");
  if (batch_size == 0) throw ArgumentError("evaluate: batch size 0");
  std::size_t errors = 0;
  for (std::size_t start = 0; start < x.rows(); start += batch_size) {
    const std::size_t stop = std::min(x.rows(), start + batch_size);
    Matrix xb(stop - start, x.cols());
    std::memcpy(xb.data(), x.data() + start * x.cols(),
                (stop - start) * x.cols() * sizeof(double));
    Matrix logits = model_forward(model, xb, false, nullptr, nullptr);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const double* row = logits.data() + i * logits.cols();
      std::size_t arg = 0;
      for (std::size_t j = 1; j < logits.cols(); ++j) {
        if (row[j] > row[arg]) arg = j;  // first index wins ties
      }
      if (arg != static_cast<std::size_t>(labels[start + i])) ++errors;
    }
  }
  return errors;
}

double evaluate(const Model& model, const Matrix& x,
                const std::vector<int>& labels) {
  if (x.rows() == 0) throw ArgumentError("evaluate: empty dataset");
  return static_cast<double>(evaluate_errors(model, x, labels)) /
         static_cast<double>(x.rows());
}

}  // namespace kfc
