// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/presets.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

// mnist-mlp-kfc2 structure knobs. The patch view turns a 28x28 raster into
// 16 channels of 7x7 patches so formulation II has a genuine (C, H, W) to
// factor against.
constexpr std::size_t kPatchSide = 7;
constexpr std::size_t kImageSide = 28;
constexpr std::size_t kKfc2K1 = 64;
constexpr std::size_t kKfc2Rank = 2;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (s.empty() || pos != s.size()) {
    throw ArgumentError(what + ": bad number '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

Model tail_to_ten(Model model, std::size_t hidden, double keep) {
  model.layers.push_back(activation_node("act1", Activation::kAbsTanh));
  model.layers.push_back(dropout_node("drop1", keep));
  model.layers.push_back(dense_node("fc2", hidden, 10));
  model.layers.push_back(softmax_xent_node("loss"));
  return model;
}

Model baseline_preset(const RunConfig& cfg) {
  Model model;
  model.input_dim = kImageSide * kImageSide;
  model.layers.push_back(dense_node("fc1", model.input_dim, cfg.hidden));
  return tail_to_ten(std::move(model), cfg.hidden, cfg.dropout_keep);
}

Model kfc2_preset(const RunConfig& cfg) {
  Model model;
  model.input_dim = kImageSide * kImageSide;
  model.input_view =
      patch_view(kImageSide, kImageSide, kPatchSide, kPatchSide);
  model.view_desc = "patch " + std::to_string(kImageSide) + " " +
                    std::to_string(kImageSide) + " " +
                    std::to_string(kPatchSide) + " " +
                    std::to_string(kPatchSide);
  const std::size_t grid = kImageSide / kPatchSide;
  const std::size_t c = grid * grid;
  const std::size_t h = kPatchSide, w = kPatchSide;
  const std::size_t k = cfg.hidden;

  KfcSpec spec;
  if (!cfg.groups.empty()) {
    spec.tensor_input = true;
    spec.channels = c;
    spec.height = h;
    spec.width = w;
    spec.output_dim = k;
    spec.groups = parse_groups_desc(cfg.groups, c, h, w, k);
    spec.validate();
  } else {
    const Formulation f = cfg.formulation.empty()
                              ? Formulation::kII
                              : formulation_from_name(cfg.formulation);
    if (f == Formulation::kKfcm) {
      throw ArgumentError(
          "preset mnist-mlp-kfc2 factors a tensor view; formulation must be "
          "I, II, III, or IV");
    }
    const std::size_t rank = cfg.rank ? cfg.rank : kKfc2Rank;
    std::size_t k1, k2, k3;
    if (f == Formulation::kI) {
      k1 = cfg.k1 ? cfg.k1 : 16;
      k2 = cfg.k2 ? cfg.k2 : 4;
      k3 = cfg.k3 ? cfg.k3 : (k1 * k2 ? k / (k1 * k2) : 0);
    } else {
      k1 = cfg.k1 ? cfg.k1 : kKfc2K1;
      k2 = cfg.k2 ? cfg.k2 : (k1 ? k / k1 : 0);
      k3 = 0;
    }
    spec = make_spec_formulation(f, c, h, w, k, k1, k2, k3, rank);
  }

  model.layers.push_back(kfc_node("kfc1", spec));
  return tail_to_ten(std::move(model), k, cfg.dropout_keep);
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"mnist-mlp-baseline", "mnist-mlp-kfc2"};
}

Model make_preset(const std::string& name, const RunConfig& cfg) {
  if (name == "mnist-mlp-baseline") return baseline_preset(cfg);
  if (name == "mnist-mlp-kfc2") return kfc2_preset(cfg);
  std::string known;
  for (const std::string& n : preset_names()) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  throw ArgumentError("unknown preset '" + name + "'; presets: " + known);
}

std::vector<std::size_t> patch_view(std::size_t image_h, std::size_t image_w,
                                    std::size_t patch_h, std::size_t patch_w) {
  if (patch_h == 0 || patch_w == 0 || image_h % patch_h != 0 ||
      image_w % patch_w != 0) {
    throw ArgumentError("patch view: " + std::to_string(patch_h) + "x" +
                        std::to_string(patch_w) + " patches do not tile a " +
                        std::to_string(image_h) + "x" +
                        std::to_string(image_w) + " image");
  }
  const std::size_t grid_c = image_w / patch_w;
  const std::size_t channels = (image_h / patch_h) * grid_c;
  std::vector<std::size_t> view(image_h * image_w);
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t pr = c / grid_c, pc = c % grid_c;
    for (std::size_t h = 0; h < patch_h; ++h) {
      for (std::size_t w = 0; w < patch_w; ++w) {
        view[c * patch_h * patch_w + h * patch_w + w] =
            (pr * patch_h + h) * image_w + (pc * patch_w + w);
      }
    }
  }
  return view;
}

std::vector<std::size_t> view_from_desc(const std::string& desc) {
  const std::vector<std::string> tok = split(desc, ' ');
  if (tok.size() == 5 && tok[0] == "patch") {
    return patch_view(parse_size(tok[1], "view"), parse_size(tok[2], "view"),
                      parse_size(tok[3], "view"), parse_size(tok[4], "view"));
  }
  throw ArgumentError("unknown view recipe '" + desc + "'");
}

std::vector<ShapeGroup> parse_groups_desc(const std::string& desc,
                                          std::size_t c, std::size_t h,
                                          std::size_t w, std::size_t k) {
  std::vector<ShapeGroup> out;
  for (const std::string& part : split(desc, '+')) {
    const std::vector<std::string> fields = split(part, ':');
    if (fields.size() != 3) {
      throw ArgumentError("groups: '" + part + "' is not FORM:factors:rank");
    }
    const Formulation f = formulation_from_name(fields[0]);
    if (f == Formulation::kKfcm) {
      throw ArgumentError("groups: KFCM takes c1/k1 keys, not a groups list");
    }
    const std::vector<std::string> ks = split(fields[1], ',');
    if (f == Formulation::kI ? ks.size() != 3 : ks.size() != 2) {
      throw ArgumentError("groups: '" + part + "' has the wrong factor count");
    }
    const std::size_t k1 = parse_size(ks[0], "groups");
    const std::size_t k2 = parse_size(ks[1], "groups");
    const std::size_t k3 = ks.size() == 3 ? parse_size(ks[2], "groups") : 0;
    const std::size_t rank = parse_size(fields[2], "groups");
    out.push_back(make_group(f, c, h, w, k, k1, k2, k3, rank));
  }
  if (out.empty()) throw ArgumentError("groups: empty description");
  return out;
}

}  // namespace kfc
