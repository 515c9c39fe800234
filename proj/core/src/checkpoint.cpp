// Copyright 2026 The kronfc Authors
// SPDX-License-Identifier: Apache-2.0

#include "kfc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kfc/errors.hpp"
#include "kfc/idx.hpp"
#include "kfc/presets.hpp"

namespace kfc {
namespace {

constexpr char kMagic[8] = {'K', 'F', 'C', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

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

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void bad_line(std::size_t lineno, const std::string& why) {
  throw ParseError("topology line " + std::to_string(lineno) + ": " + why);
}

std::size_t parse_size(const std::string& s, std::size_t lineno) {
  if (s.empty()) bad_line(lineno, "empty number");
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    bad_line(lineno, "bad number '" + s + "'");
  }
  if (pos != s.size()) bad_line(lineno, "bad number '" + s + "'");
  return static_cast<std::size_t>(v);
}

double parse_double(const std::string& s, std::size_t lineno) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty()) {
    bad_line(lineno, "bad real '" + s + "'");
  }
  return v;
}

// key=value attributes after the fixed tokens of a layer line.
std::string take_attr(const std::vector<std::string>& tokens,
                      std::size_t from, const std::string& key,
                      std::size_t lineno) {
  const std::string prefix = key + "=";
  for (std::size_t i = from; i < tokens.size(); ++i) {
    if (tokens[i].rfind(prefix, 0) == 0) return tokens[i].substr(prefix.size());
  }
  bad_line(lineno, "missing attribute " + key);
}

std::string groups_to_text(const KfcSpec& spec) {
  std::string out;
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const ShapeGroup& grp = spec.groups[g];
    if (g) out += '+';
    out += formulation_name(grp.formulation);
    out += ':';
    const FactorShape& s = grp.shape;
    out += std::to_string(s.rows_a) + "x" + std::to_string(s.cols_a) + "," +
           std::to_string(s.rows_b) + "x" + std::to_string(s.cols_b);
    if (s.has_third()) {
      out += "," + std::to_string(s.rows_c) + "x" + std::to_string(s.cols_c);
    }
    out += ':' + std::to_string(grp.rank);
  }
  return out;
}

std::vector<ShapeGroup> groups_from_text(const std::string& text,
                                         std::size_t lineno) {
  std::vector<ShapeGroup> out;
  for (const std::string& part : split(text, '+')) {
    const std::vector<std::string> fields = split(part, ':');
    if (fields.size() != 3) bad_line(lineno, "group '" + part + "' is not FORM:shapes:rank");
    ShapeGroup g;
    try {
      g.formulation = formulation_from_name(fields[0]);
    } catch (const Error& e) {
      bad_line(lineno, e.what());
    }
    const std::vector<std::string> shapes = split(fields[1], ',');
    if (shapes.size() != 2 && shapes.size() != 3) {
      bad_line(lineno, "group '" + part + "' needs two or three factor shapes");
    }
    std::size_t dims[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < shapes.size(); ++i) {
      const std::vector<std::string> rc = split(shapes[i], 'x');
      if (rc.size() != 2) bad_line(lineno, "factor shape '" + shapes[i] + "' is not RxC");
      dims[2 * i] = parse_size(rc[0], lineno);
      dims[2 * i + 1] = parse_size(rc[1], lineno);
    }
    g.shape = FactorShape{dims[0], dims[1], dims[2], dims[3], dims[4], dims[5]};
    g.rank = parse_size(fields[2], lineno);
    out.push_back(g);
  }
  if (out.empty()) bad_line(lineno, "empty group list");
  return out;
}

void check_name(const std::string& name) {
  if (name.empty()) throw ArgumentError("checkpoint: empty layer name");
  for (char c : name) {
    if (c == ' ' || c == '\n' || c == '\t') {
      throw ArgumentError("checkpoint: layer name '" + name +
                          "' contains whitespace");
    }
  }
}

KfcWeights zero_weights(const KfcSpec& spec) {
  KfcWeights w;
  w.groups.resize(spec.groups.size());
  for (std::size_t g = 0; g < spec.groups.size(); ++g) {
    const FactorShape& s = spec.groups[g].shape;
    w.groups[g].resize(spec.groups[g].rank);
    for (KfcTerm& t : w.groups[g]) {
      t.a = Matrix(s.rows_a, s.cols_a);
      t.b = Matrix(s.rows_b, s.cols_b);
      if (s.has_third()) t.c = Matrix(s.rows_c, s.cols_c);
    }
  }
  w.bias = Matrix(1, spec.output_dim);
  return w;
}

// Walks parameter matrices with their blob names in the same traversal
// order as collect_params. ModelT may be const or mutable.
template <typename ModelT, typename Fn>
void for_each_named_param(ModelT& model, Fn&& fn) {
  for (auto& l : model.layers) {
    if (l.kind == LayerKind::kDense) {
      fn(l.name + ".w", &l.w);
      fn(l.name + ".b", &l.b);
    } else if (l.kind == LayerKind::kKfc) {
      for (std::size_t g = 0; g < l.kw.groups.size(); ++g) {
        for (std::size_t t = 0; t < l.kw.groups[g].size(); ++t) {
          const std::string stem =
              l.name + ".g" + std::to_string(g) + ".t" + std::to_string(t);
          auto& term = l.kw.groups[g][t];
          fn(stem + ".a", &term.a);
          fn(stem + ".b", &term.b);
          if (!term.c.empty()) fn(stem + ".c", &term.c);
        }
      }
      fn(l.name + ".bias", &l.kw.bias);
    }
  }
}

template <typename ModelT>
std::size_t count_param_blobs(ModelT& model) {
  std::size_t n = 0;
  for_each_named_param(model, [&](const std::string&, auto*) { ++n; });
  return n;
}

void append_u32(std::vector<std::uint8_t>* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out->push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void append_f64(std::vector<std::uint8_t>* out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    out->push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

struct Cursor {
  const std::vector<std::uint8_t>& bytes;
  std::size_t off = 0;

  void need(std::size_t n) const {
    if (off + n > bytes.size()) {
      throw IoError("checkpoint: truncated at byte " + std::to_string(off) +
                    " (file has " + std::to_string(bytes.size()) + " bytes)");
    }
  }
  std::uint32_t take_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[off + i];
    off += 4;
    return v;
  }
  double take_f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[off + i];
    off += 8;
    return std::bit_cast<double>(v);
  }
  std::string take_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + off), n);
    off += n;
    return s;
  }
};

CheckpointMeta meta_from_text(const std::string& text) {
  CheckpointMeta meta;
  std::size_t lineno = 0;
  for (const std::string& line : split(text, '\n')) {
    ++lineno;
    if (line.rfind("meta ", 0) != 0) continue;
    const std::vector<std::string> kv = split(line.substr(5), '=');
    if (kv.size() != 2) bad_line(lineno, "meta line is not key=value");
    if (kv[0] == "seed") {
      meta.seed = parse_size(kv[1], lineno);
    } else if (kv[0] == "epoch") {
      meta.epoch = parse_size(kv[1], lineno);
    } else if (kv[0] == "val_error") {
      meta.val_error = parse_double(kv[1], lineno);
    } else if (kv[0] == "test_error") {
      meta.test_error = parse_double(kv[1], lineno);
    } else {
      bad_line(lineno, "unknown meta key '" + kv[0] + "'");
    }
  }
  return meta;
}

}  // namespace

std::string topology_text(const Model& model) {
  std::ostringstream out;
  out << "input " << model.input_dim << "\n";
  if (!model.input_view.empty()) {
    if (model.view_desc.empty()) {
      throw ArgumentError("checkpoint: input view has no serializable recipe");
    }
    out << "view " << model.view_desc << "\n";
  }
  for (const LayerNode& l : model.layers) {
    check_name(l.name);
    out << "layer " << l.name << " ";
    switch (l.kind) {
      case LayerKind::kDense:
        out << "dense in=" << l.w.rows() << " out=" << l.w.cols();
        break;
      case LayerKind::kKfc: {
        const KfcSpec& s = l.spec;
        out << "kfc in=";
        if (s.tensor_input) {
          out << "tensor:" << s.channels << "x" << s.height << "x" << s.width;
        } else {
          out << "flat:" << s.channels;
        }
        out << " out=" << s.output_dim << " pad=" << s.pad_input
            << " groups=" << groups_to_text(s);
        break;
      }
      case LayerKind::kActivation:
        out << "act "
            << (l.act == Activation::kAbsTanh ? "abs_tanh" : "identity");
        break;
      case LayerKind::kDropout:
        out << "dropout keep=" << fmt_double(l.keep);
        break;
      case LayerKind::kSoftmaxXent:
        out << "softmax_xent";
        break;
    }
    out << "\n";
  }
  return out.str();
}

Model model_from_topology(const std::string& text) {
  Model model;
  bool saw_input = false;
  std::size_t lineno = 0;
  for (const std::string& line : split(text, '\n')) {
    ++lineno;
    if (line.empty() || line.rfind("meta ", 0) == 0) continue;
    const std::vector<std::string> tok = split_ws(line);
    if (tok[0] == "input") {
      if (saw_input) bad_line(lineno, "duplicate input line");
      if (tok.size() != 2) bad_line(lineno, "input line wants one number");
      model.input_dim = parse_size(tok[1], lineno);
      saw_input = true;
    } else if (tok[0] == "view") {
      if (!saw_input) bad_line(lineno, "view before input");
      std::string desc;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        if (i > 1) desc += ' ';
        desc += tok[i];
      }
      model.view_desc = desc;
      model.input_view = view_from_desc(desc);
    } else if (tok[0] == "layer") {
      if (!saw_input) bad_line(lineno, "layer before input");
      if (tok.size() < 3) bad_line(lineno, "layer line wants a name and kind");
      const std::string& name = tok[1];
      const std::string& kind = tok[2];
      if (kind == "dense") {
        const std::size_t in = parse_size(take_attr(tok, 3, "in", lineno), lineno);
        const std::size_t out = parse_size(take_attr(tok, 3, "out", lineno), lineno);
        model.layers.push_back(dense_node(name, in, out));
      } else if (kind == "kfc") {
        KfcSpec spec;
        const std::string in = take_attr(tok, 3, "in", lineno);
        const std::vector<std::string> inparts = split(in, ':');
        if (inparts.size() != 2) bad_line(lineno, "kfc in wants kind:dims");
        if (inparts[0] == "tensor") {
          const std::vector<std::string> dims = split(inparts[1], 'x');
          if (dims.size() != 3) bad_line(lineno, "tensor input wants CxHxW");
          spec.tensor_input = true;
          spec.channels = parse_size(dims[0], lineno);
          spec.height = parse_size(dims[1], lineno);
          spec.width = parse_size(dims[2], lineno);
        } else if (inparts[0] == "flat") {
          spec.tensor_input = false;
          spec.channels = parse_size(inparts[1], lineno);
        } else {
          bad_line(lineno, "kfc input kind '" + inparts[0] + "'");
        }
        spec.output_dim = parse_size(take_attr(tok, 3, "out", lineno), lineno);
        spec.pad_input = parse_size(take_attr(tok, 3, "pad", lineno), lineno);
        spec.groups = groups_from_text(take_attr(tok, 3, "groups", lineno), lineno);
        try {
          spec.validate();
        } catch (const Error& e) {
          bad_line(lineno, e.what());
        }
        LayerNode node = kfc_node(name, spec);
        node.kw = zero_weights(node.spec);
        model.layers.push_back(std::move(node));
      } else if (kind == "act") {
        if (tok.size() != 4) bad_line(lineno, "act line wants a function name");
        Activation act;
        if (tok[3] == "abs_tanh") {
          act = Activation::kAbsTanh;
        } else if (tok[3] == "identity") {
          act = Activation::kIdentity;
        } else {
          bad_line(lineno, "unknown activation '" + tok[3] + "'");
        }
        model.layers.push_back(activation_node(name, act));
      } else if (kind == "dropout") {
        const double keep = parse_double(take_attr(tok, 3, "keep", lineno), lineno);
        model.layers.push_back(dropout_node(name, keep));
      } else if (kind == "softmax_xent") {
        model.layers.push_back(softmax_xent_node(name));
      } else {
        bad_line(lineno, "unknown layer kind '" + kind + "'");
      }
    } else {
      bad_line(lineno, "unknown directive '" + tok[0] + "'");
    }
  }
  if (!saw_input) throw ParseError("topology: missing input line");
  try {
    model.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("topology: ") + e.what());
  }
  return model;
}

void check_topology_match(const std::string& expected,
                          const std::string& actual) {
  if (expected == actual) return;
  throw IoError("topology mismatch\n--- expected ---\n" + expected +
                "--- found ---\n" + actual);
}

void save_checkpoint(const std::string& path, const Model& model,
                     const CheckpointMeta& meta) {
  model.validate();
  std::string text = topology_text(model);
  text += "meta seed=" + std::to_string(meta.seed) + "\n";
  text += "meta epoch=" + std::to_string(meta.epoch) + "\n";
  if (meta.val_error >= 0.0) {
    text += "meta val_error=" + fmt_double(meta.val_error) + "\n";
  }
  if (meta.test_error >= 0.0) {
    text += "meta test_error=" + fmt_double(meta.test_error) + "\n";
  }

  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 8);
  append_u32(&out, kVersion);
  if (text.size() > 0xFFFFFFFFu) throw IoError("checkpoint: topology too large");
  append_u32(&out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  append_u32(&out, static_cast<std::uint32_t>(count_param_blobs(model)));
  for_each_named_param(model, [&](const std::string& name, const Matrix* m) {
    append_u32(&out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    append_u32(&out, static_cast<std::uint32_t>(m->rows()));
    append_u32(&out, static_cast<std::uint32_t>(m->cols()));
    for (std::size_t i = 0; i < m->size(); ++i) append_f64(&out, m->data()[i]);
  });

  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw IoError("cannot open " + tmp + " for writing");
  const std::size_t wrote = std::fwrite(out.data(), 1, out.size(), f);
  const bool flushed = std::fflush(f) == 0;
  std::fclose(f);
  if (wrote != out.size() || !flushed) {
    std::remove(tmp.c_str());
    throw IoError("short write on " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move " + tmp + " over " + path);
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  Cursor cur{bytes};
  const std::string magic = cur.take_string(8);
  if (std::memcmp(magic.data(), kMagic, 8) != 0) {
    throw IoError("checkpoint: bad magic in " + path);
  }
  const std::uint32_t version = cur.take_u32();
  if (version != kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t tlen = cur.take_u32();
  const std::string text = cur.take_string(tlen);

  LoadedCheckpoint loaded;
  loaded.model = model_from_topology(text);
  loaded.meta = meta_from_text(text);

  const std::uint32_t count = cur.take_u32();
  const std::size_t expected = count_param_blobs(loaded.model);
  if (count != expected) {
    throw IoError("checkpoint: " + std::to_string(count) +
                  " blobs but the topology needs " + std::to_string(expected));
  }
  for_each_named_param(loaded.model, [&](const std::string& name, Matrix* m) {
    const std::uint32_t nlen = cur.take_u32();
    const std::string got = cur.take_string(nlen);
    if (got != name) {
      throw IoError("checkpoint: blob '" + got + "' where the topology expects '" +
                    name + "'");
    }
    const std::uint32_t rows = cur.take_u32();
    const std::uint32_t cols = cur.take_u32();
    if (rows != m->rows() || cols != m->cols()) {
      throw IoError("checkpoint: blob '" + name + "' is " +
                    std::to_string(rows) + "x" + std::to_string(cols) +
                    ", topology wants " + std::to_string(m->rows()) + "x" +
                    std::to_string(m->cols()));
    }
    for (std::size_t i = 0; i < m->size(); ++i) m->data()[i] = cur.take_f64();
  });
  if (cur.off != bytes.size()) {
    throw IoError("checkpoint: " + std::to_string(bytes.size() - cur.off) +
                  " trailing bytes after the last blob");
  }
  return loaded;
}

}  // namespace kfc
