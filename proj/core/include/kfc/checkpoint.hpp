// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_CHECKPOINT_HPP_
#define KFC_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include "kfc/model.hpp"

namespace kfc {

// Training provenance stored alongside the weights. Negative error fields
// mean "not recorded" and are omitted from the container.
struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  double val_error = -1.0;
  double test_error = -1.0;
};

struct LoadedCheckpoint {
  Model model;
  CheckpointMeta meta;
};

// Line-oriented structural description of a model: input width, optional
// view recipe, one line per layer. Two models interoperate exactly when
// their topology texts are equal. Metadata is not part of it.
std::string topology_text(const Model& model);

// Rebuilds a model (zero-valued parameters) from its topology text.
Model model_from_topology(const std::string& text);

// Throws IoError listing both texts when they differ.
void check_topology_match(const std::string& expected,
                          const std::string& actual);

// Container layout, all multi-byte fields little-endian:
//   8-byte magic "KFCCKPT\0"
//   u32 version (= 1)
//   u32 text length, then topology text plus "meta k=v" lines (UTF-8)
//   u32 blob count, then per blob:
//     u32 name length, name bytes, u32 rows, u32 cols, rows*cols f64 payload
// Blobs appear in the model's fixed parameter traversal order. The write is
// atomic: a temp file in the same directory is renamed over path.
void save_checkpoint(const std::string& path, const Model& model,
                     const CheckpointMeta& meta);

// Throws IoError on a bad magic, an unsupported version, truncation, or a
// blob set that does not match the embedded topology. load(save(m)) is
// bit-exact on every parameter.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace kfc

#endif  // KFC_CHECKPOINT_HPP_
