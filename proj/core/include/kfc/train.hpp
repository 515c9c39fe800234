// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_TRAIN_HPP_
#define KFC_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "kfc/matrix.hpp"
#include "kfc/model.hpp"
#include "kfc/rng.hpp"

namespace kfc {

struct XentResult {
  double loss;
  Matrix grad;  // d(mean cross-entropy)/d(logits)
};

// Mean softmax cross-entropy with max-subtraction; grad = (softmax - onehot)/N.
XentResult softmax_xent(const Matrix& logits, const std::vector<int>& labels);

enum class OptKind { kSgd, kAdam };

struct OptimState {
  OptKind kind = OptKind::kAdam;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t step_count = 0;
  std::vector<Matrix> m;  // first moments, allocated on first step
  std::vector<Matrix> v;  // second moments
};

// Decoupled weight decay (params *= 1 - lr*wd) followed by the bias-corrected
// Adam update. params and grads must align in count and shape.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix*>& grads, OptimState* state);

// Decoupled weight decay followed by params -= lr * grads.
void sgd_step(const std::vector<Matrix*>& params,
              const std::vector<Matrix*>& grads, OptimState* state);

struct TrainConfig {
  std::size_t batch_size = 100;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double dropout_keep = 0.5;  // consumed by the preset builders
  OptKind optimizer = OptKind::kAdam;
  std::size_t val_size = 10000;
};

struct EpochStats {
  double train_loss;
  double val_error;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;  // 1-based epoch of minimum validation error
  double best_val_error = 0.0;
  Model best_model;  // parameter snapshot at best_epoch
};

// Minibatch training, fully deterministic given (model, data, cfg, rng):
// shuffling and dropout draw from the one stream in a fixed order. Keeps the
// earliest minimum-validation snapshot for test reporting. Writes one
// "epoch E loss L val_error V" line per epoch to log when given.
TrainResult train(Model model, const Matrix& train_x,
                  const std::vector<int>& train_y, const Matrix& val_x,
                  const std::vector<int>& val_y, const TrainConfig& cfg,
                  Rng& rng, std::ostream* log = nullptr);

// Misclassification count over x (argmax of logits, lowest index on ties).
std::size_t evaluate_errors(const Model& model, const Matrix& x,
                            const std::vector<int>& labels,
                            std::size_t batch_size = 256);

// Error rate in [0, 1].
double evaluate(const Model& model, const Matrix& x,
                const std::vector<int>& labels);

}  // namespace kfc

#endif  // KFC_TRAIN_HPP_
