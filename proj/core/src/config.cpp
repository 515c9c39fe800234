// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/config.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include "kfc/errors.hpp"
#include "kfc/idx.hpp"
#include "kfc/kfc_spec.hpp"

namespace kfc {
namespace {

// The full documented key set, also listed in the unknown-key message.
constexpr const char* kKeys =
    "model, formulation, k1, k2, k3, c1, rank, groups, lr, weight_decay, "
    "dropout_keep, batch_size, epochs, seed, data_dir, hidden, val_size, "
    "optimizer";

[[noreturn]] void fail(std::size_t lineno, const std::string& why) {
  throw ConfigError("config line " + std::to_string(lineno) + ": " + why);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::uint64_t parse_u64(const std::string& v, std::size_t lineno) {
  if (v.empty()) fail(lineno, "empty integer");
  // stoull would wrap a leading minus around; reject signs outright
  if (v[0] == '-' || v[0] == '+') fail(lineno, "bad integer '" + v + "'");
  std::size_t pos = 0;
  unsigned long long out = 0;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    fail(lineno, "bad integer '" + v + "'");
  }
  if (pos != v.size()) fail(lineno, "bad integer '" + v + "'");
  return out;
}

std::size_t parse_sz(const std::string& v, std::size_t lineno) {
  return static_cast<std::size_t>(parse_u64(v, lineno));
}

double parse_real(const std::string& v, std::size_t lineno) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double out = std::strtod(begin, &end);
  if (v.empty() || end != begin + v.size()) {
    fail(lineno, "bad real '" + v + "'");
  }
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::size_t lineno = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i != text.size() && text[i] != '\n') continue;
    ++lineno;
    std::string line = text.substr(start, i - start);
    start = i + 1;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      fail(lineno, "expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(lineno, "empty key");

    if (key == "model") {
      cfg.model = value;
    } else if (key == "formulation") {
      try {
        formulation_from_name(value);
      } catch (const Error& e) {
        fail(lineno, e.what());
      }
      cfg.formulation = value;
    } else if (key == "k1") {
      cfg.k1 = parse_sz(value, lineno);
    } else if (key == "k2") {
      cfg.k2 = parse_sz(value, lineno);
    } else if (key == "k3") {
      cfg.k3 = parse_sz(value, lineno);
    } else if (key == "c1") {
      cfg.c1 = parse_sz(value, lineno);
    } else if (key == "rank") {
      cfg.rank = parse_sz(value, lineno);
      if (cfg.rank == 0) fail(lineno, "rank must be positive");
    } else if (key == "groups") {
      cfg.groups = value;
    } else if (key == "lr") {
      cfg.lr = parse_real(value, lineno);
      if (!(cfg.lr > 0.0)) fail(lineno, "lr must be positive");
    } else if (key == "weight_decay") {
      cfg.weight_decay = parse_real(value, lineno);
      if (cfg.weight_decay < 0.0) fail(lineno, "weight_decay must be >= 0");
    } else if (key == "dropout_keep") {
      cfg.dropout_keep = parse_real(value, lineno);
      if (!(cfg.dropout_keep > 0.0) || cfg.dropout_keep > 1.0) {
        fail(lineno, "dropout_keep must be in (0, 1]");
      }
    } else if (key == "batch_size") {
      cfg.batch_size = parse_sz(value, lineno);
      if (cfg.batch_size == 0) fail(lineno, "batch_size must be positive");
    } else if (key == "epochs") {
      cfg.epochs = parse_sz(value, lineno);
      if (cfg.epochs == 0) fail(lineno, "epochs must be positive");
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, lineno);
      cfg.seed_set = true;
    } else if (key == "data_dir") {
      cfg.data_dir = value;
    } else if (key == "hidden") {
      cfg.hidden = parse_sz(value, lineno);
      if (cfg.hidden == 0) fail(lineno, "hidden must be positive");
    } else if (key == "val_size") {
      cfg.val_size = parse_sz(value, lineno);
      if (cfg.val_size == 0) fail(lineno, "val_size must be positive");
    } else if (key == "optimizer") {
      if (value != "adam" && value != "sgd") {
        fail(lineno, "optimizer must be adam or sgd, got '" + value + "'");
      }
      cfg.optimizer = value;
    } else {
      fail(lineno, "unknown key '" + key + "'; valid keys: " + std::string(kKeys));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

TrainConfig to_train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.batch_size = cfg.batch_size;
  t.epochs = cfg.epochs;
  t.seed = cfg.seed;
  t.lr = cfg.lr;
  t.weight_decay = cfg.weight_decay;
  t.dropout_keep = cfg.dropout_keep;
  t.optimizer = cfg.optimizer == "sgd" ? OptKind::kSgd : OptKind::kAdam;
  t.val_size = cfg.val_size;
  return t;
}

}  // namespace kfc
