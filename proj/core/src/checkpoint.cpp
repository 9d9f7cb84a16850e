// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace pcr {
namespace {

std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", x);
  return buf;
}

double parse_double(const std::string& tok) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("checkpoint: bad numeric literal '" + tok + "'");
  }
  return x;
}

long parse_long(const std::string& tok) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  const long x = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("checkpoint: bad integer literal '" + tok + "'");
  }
  return x;
}

// "key=value" -> value, enforcing the expected key.
std::string take_kv(std::istringstream& is, const char* key) {
  std::string tok;
  if (!(is >> tok)) {
    throw std::runtime_error(std::string("checkpoint: missing field ") + key);
  }
  const std::string prefix = std::string(key) + "=";
  if (tok.rfind(prefix, 0) != 0) {
    throw std::runtime_error("checkpoint: expected field " + prefix +
                             "..., got '" + tok + "'");
  }
  return tok.substr(prefix.size());
}

}  // namespace

void save_checkpoint(std::ostream& os, const model::ModelConfig& cfg,
                     const ParamSet& params) {
  os << "pcrlab-checkpoint v1"
     << " vocab_size=" << cfg.vocab_size << " d_model=" << cfg.d_model
     << " d_ff=" << cfg.d_ff << " max_seq_len=" << cfg.max_seq_len
     << " ln_eps=" << hex_double(cfg.ln_eps)
     << " entries=" << params.entries.size() << "\n";
  for (const auto& e : params.entries) {
    os << e.name << " " << layer_tag_name(e.tag) << " " << e.shape.size();
    for (int d : e.shape) os << " " << d;
    os << "\n";
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      if (i) os << " ";
      os << hex_double(e.values[i]);
    }
    os << "\n";
  }
  if (!os) throw std::runtime_error("checkpoint: write failed");
}

void save_checkpoint_file(const std::string& path,
                          const model::ModelConfig& cfg,
                          const ParamSet& params) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  save_checkpoint(os, cfg, params);
}

Checkpoint load_checkpoint(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) {
    throw std::runtime_error("checkpoint: empty input");
  }
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "pcrlab-checkpoint" || version != "v1") {
    throw std::runtime_error("checkpoint: bad magic/version");
  }

  Checkpoint ckpt;
  ckpt.config.vocab_size = static_cast<int>(parse_long(take_kv(hs, "vocab_size")));
  ckpt.config.d_model = static_cast<int>(parse_long(take_kv(hs, "d_model")));
  ckpt.config.d_ff = static_cast<int>(parse_long(take_kv(hs, "d_ff")));
  ckpt.config.max_seq_len = static_cast<int>(parse_long(take_kv(hs, "max_seq_len")));
  ckpt.config.ln_eps = parse_double(take_kv(hs, "ln_eps"));
  const long n_entries = parse_long(take_kv(hs, "entries"));
  if (n_entries < 0) throw std::runtime_error("checkpoint: negative entry count");
  ckpt.config.validate();

  for (long n = 0; n < n_entries; ++n) {
    std::string desc;
    if (!std::getline(is, desc)) {
      throw std::runtime_error("checkpoint: truncated entry descriptor");
    }
    std::istringstream ds(desc);
    TensorEntry e;
    std::string tag_name;
    std::size_t ndims = 0;
    if (!(ds >> e.name >> tag_name >> ndims)) {
      throw std::runtime_error("checkpoint: malformed descriptor '" + desc + "'");
    }
    const auto tag = layer_tag_from_name(tag_name);
    if (!tag) throw std::runtime_error("checkpoint: unknown tag '" + tag_name + "'");
    e.tag = *tag;
    std::size_t count = 1;
    for (std::size_t i = 0; i < ndims; ++i) {
      int dim = 0;
      if (!(ds >> dim) || dim < 0) {
        throw std::runtime_error("checkpoint: malformed shape in '" + desc + "'");
      }
      e.shape.push_back(dim);
      count *= static_cast<std::size_t>(dim);
    }
    if (ndims == 0) count = 0;

    std::string values_line;
    if (!std::getline(is, values_line)) {
      throw std::runtime_error("checkpoint: truncated values for " + e.name);
    }
    std::istringstream vs(values_line);
    std::string tok;
    e.values.reserve(count);
    while (vs >> tok) e.values.push_back(parse_double(tok));
    if (e.values.size() != count) {
      throw std::runtime_error("checkpoint: value count mismatch for " + e.name);
    }
    ckpt.params.entries.push_back(std::move(e));
  }
  return ckpt;
}

Checkpoint load_checkpoint_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  return load_checkpoint(is);
}

}  // namespace pcr
