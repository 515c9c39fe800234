// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_PRESETS_HPP_
#define KFC_PRESETS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "kfc/config.hpp"
#include "kfc/model.hpp"

namespace kfc {

// Named model topologies. These strings are the reproducibility anchor: a
// preset name plus a seed pins every parameter of a fresh model.
//
//   mnist-mlp-baseline   784 -> dense 256 -> |tanh| -> dropout -> dense 10
//   mnist-mlp-kfc2       same stack, first dense replaced by a KFC layer on
//                        a 7x7-patch view of the image (16 channels of 49
//                        pixels), formulation II, K1=64, K2=4, rank 2
//
// cfg overrides hidden width, dropout keep, and for the KFC preset the
// formulation/k1/k2/k3/rank or a full combined-groups description.
std::vector<std::string> preset_names();
Model make_preset(const std::string& name, const RunConfig& cfg);

// Permutation sending a row-major image_h x image_w raster to patch order:
// patches of patch_h x patch_w scanned row-major, pixels row-major inside
// each patch. Patch dims must divide the image dims.
std::vector<std::size_t> patch_view(std::size_t image_h, std::size_t image_w,
                                    std::size_t patch_h, std::size_t patch_w);

// Rebuilds a view permutation from its serialized recipe, currently
// "patch IH IW PH PW".
std::vector<std::size_t> view_from_desc(const std::string& desc);

// Parses a combined-groups description "FORM:k1,k2[,k3]:rank" joined by '+'
// against a (c, h, w) input and k outputs.
std::vector<ShapeGroup> parse_groups_desc(const std::string& desc,
                                          std::size_t c, std::size_t h,
                                          std::size_t w, std::size_t k);

}  // namespace kfc

#endif  // KFC_PRESETS_HPP_
