// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_CONFIG_HPP_
#define KFC_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "kfc/train.hpp"

namespace kfc {

// Parsed run configuration. Zero-valued structure knobs (k1, k2, k3, c1,
// rank) mean "preset default". The key set is closed; see parse_config.
struct RunConfig {
  std::string model = "mnist-mlp-baseline";
  std::string formulation;  // empty = preset default
  std::size_t k1 = 0;
  std::size_t k2 = 0;
  std::size_t k3 = 0;
  std::size_t c1 = 0;
  std::size_t rank = 0;
  std::string groups;  // combined-shape override, e.g. "II:64,4:1+III:128,2:1"
  double lr = 1e-4;
  double weight_decay = 1e-4;
  double dropout_keep = 0.5;
  std::size_t batch_size = 100;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  bool seed_set = false;  // true when the file named a seed
  std::string data_dir;
  std::size_t hidden = 256;
  std::size_t val_size = 10000;
  std::string optimizer = "adam";
};

// Parses '#'-commented key=value lines. Keys outside the documented set,
// unparsable values, and out-of-range values all throw ConfigError naming
// the 1-based line; an empty file yields the defaults above.
RunConfig parse_config(const std::string& text);

RunConfig load_config(const std::string& path);

TrainConfig to_train_config(const RunConfig& cfg);

}  // namespace kfc

#endif  // KFC_CONFIG_HPP_
