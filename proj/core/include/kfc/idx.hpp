// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef KFC_IDX_HPP_
#define KFC_IDX_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "kfc/matrix.hpp"

namespace kfc {

// One IDX container: big-endian magic, big-endian u32 dimension sizes, raw
// unsigned-byte payload. Only the two MNIST magics are accepted:
// 0x00000803 (3-D image stack) and 0x00000801 (1-D label list).
struct IdxFile {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;

// Parses a full IDX byte buffer. Throws ParseError naming the byte offset on
// a bad magic, a truncated header or payload, or a dimension product that
// overflows. parse then write is the identity on every valid buffer.
IdxFile parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> write_idx(const IdxFile& file);

// Labeled example set. images is N x features with entries scaled to [0, 1]
// by 1/255; image_rows/image_cols keep the source raster shape.
struct Dataset {
  Matrix images;
  std::vector<int> labels;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;
  int num_classes = 0;  // 1 + max label seen
};

// Converts parsed IDX parts to a Dataset; counts must agree.
Dataset make_dataset(const IdxFile& images, const IdxFile& labels);

std::vector<std::uint8_t> read_file(const std::string& path);

// Loads an images/labels pair from disk.
Dataset load_dataset(const std::string& images_path,
                     const std::string& labels_path);

// Loads the standard four files (train-images-idx3-ubyte and friends) from
// dir. test is the t10k pair.
struct MnistData {
  Dataset train;
  Dataset test;
};
MnistData load_mnist(const std::string& dir);

// Splits the last val_size rows off as validation, keeping order.
void split_validation(const Dataset& full, std::size_t val_size,
                      Dataset* train, Dataset* val);

}  // namespace kfc

#endif  // KFC_IDX_HPP_
