// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/idx.hpp"

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "kfc/errors.hpp"

namespace kfc {
namespace {

std::uint32_t read_u32_be(const std::vector<std::uint8_t>& b,
                          std::size_t offset, const char* what) {
  if (offset + 4 > b.size()) {
    throw ParseError("idx: truncated " + std::string(what) + " at byte " +
                     std::to_string(offset) + " (file has " +
                     std::to_string(b.size()) + " bytes)");
  }
  return (static_cast<std::uint32_t>(b[offset]) << 24) |
         (static_cast<std::uint32_t>(b[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(b[offset + 2]) << 8) |
         static_cast<std::uint32_t>(b[offset + 3]);
}

void append_u32_be(std::vector<std::uint8_t>* out, std::uint32_t v) {
  out->push_back(static_cast<std::uint8_t>(v >> 24));
  out->push_back(static_cast<std::uint8_t>(v >> 16));
  out->push_back(static_cast<std::uint8_t>(v >> 8));
  out->push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxFile parse_idx(const std::vector<std::uint8_t>& bytes) {
  IdxFile f;
  f.magic = read_u32_be(bytes, 0, "magic");
  std::size_t ndims;
  if (f.magic == kIdxImagesMagic) {
    ndims = 3;
  } else if (f.magic == kIdxLabelsMagic) {
    ndims = 1;
  } else {
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", f.magic);
    throw ParseError(std::string("idx: bad magic ") + buf +
                     " at byte 0 (want 0x00000803 images or "
                     "0x00000801 labels)");
  }
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    const std::size_t off = 4 + 4 * i;
    const std::uint32_t d = read_u32_be(bytes, off, "dimension");
    if (d == 0) {
      throw ParseError("idx: zero dimension at byte " + std::to_string(off));
    }
    total *= d;
    if (total > (std::uint64_t{1} << 40)) {
      throw ParseError("idx: dimension product overflows at byte " +
                       std::to_string(off));
    }
    f.dims.push_back(d);
  }
  const std::size_t header = 4 + 4 * ndims;
  const std::uint64_t have = bytes.size() - header;
  if (have != total) {
    throw ParseError("idx: payload at byte " + std::to_string(header) +
                     " has " + std::to_string(have) + " bytes, dims need " +
                     std::to_string(total));
  }
  f.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header),
                   bytes.end());
  return f;
}

std::vector<std::uint8_t> write_idx(const IdxFile& file) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * file.dims.size() + file.payload.size());
  append_u32_be(&out, file.magic);
  for (std::uint32_t d : file.dims) append_u32_be(&out, d);
  out.insert(out.end(), file.payload.begin(), file.payload.end());
  return out;
}

Dataset make_dataset(const IdxFile& images, const IdxFile& labels) {
  if (images.magic != kIdxImagesMagic || images.dims.size() != 3) {
    throw ParseError("idx: image part does not carry magic 0x00000803");
  }
  if (labels.magic != kIdxLabelsMagic || labels.dims.size() != 1) {
    throw ParseError("idx: label part does not carry magic 0x00000801");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw ParseError("idx: " + std::to_string(images.dims[0]) +
                     " images but " + std::to_string(labels.dims[0]) +
                     " labels");
  }
  Dataset d;
  d.image_rows = images.dims[1];
  d.image_cols = images.dims[2];
  const std::size_t n = images.dims[0];
  const std::size_t features = d.image_rows * d.image_cols;
  d.images = Matrix(n, features);
  constexpr double kScale = 1.0 / 255.0;
  for (std::size_t i = 0; i < n * features; ++i) {
    d.images.data()[i] = static_cast<double>(images.payload[i]) * kScale;
  }
  d.labels.resize(n);
  int mx = -1;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = static_cast<int>(labels.payload[i]);
    if (d.labels[i] > mx) mx = d.labels[i];
  }
  d.num_classes = mx + 1;
  return d;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes;
  std::uint8_t buf[1 << 16];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) {
    bytes.insert(bytes.end(), buf, buf + got);
  }
  const bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) throw IoError("read failed on " + path);
  return bytes;
}

Dataset load_dataset(const std::string& images_path,
                     const std::string& labels_path) {
  return make_dataset(parse_idx(read_file(images_path)),
                      parse_idx(read_file(labels_path)));
}

MnistData load_mnist(const std::string& dir) {
  MnistData m;
  m.train = load_dataset(dir + "/train-images-idx3-ubyte",
                         dir + "/train-labels-idx1-ubyte");
  m.test = load_dataset(dir + "/t10k-images-idx3-ubyte",
                        dir + "/t10k-labels-idx1-ubyte");
  return m;
}

void split_validation(const Dataset& full, std::size_t val_size,
                      Dataset* train, Dataset* val) {
  if (val_size == 0 || val_size >= full.images.rows()) {
    throw ArgumentError("split: validation size " + std::to_string(val_size) +
                        " out of range for " +
                        std::to_string(full.images.rows()) + " rows");
  }
  const std::size_t n = full.images.rows();
  const std::size_t ntrain = n - val_size;
  const std::size_t features = full.images.cols();
  auto slice = [&](std::size_t begin, std::size_t count, Dataset* out) {
    out->images = Matrix(count, features);
    std::memcpy(out->images.data(), full.images.data() + begin * features,
                count * features * sizeof(double));
    out->labels.assign(full.labels.begin() + static_cast<std::ptrdiff_t>(begin),
                       full.labels.begin() +
                           static_cast<std::ptrdiff_t>(begin + count));
    out->image_rows = full.image_rows;
    out->image_cols = full.image_cols;
    out->num_classes = full.num_classes;
  };
  slice(0, ntrain, train);
  slice(ntrain, val_size, val);
}

}  // namespace kfc
