// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#include "pcr/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace pcr {

const char* layer_tag_name(LayerTag tag) {
  switch (tag) {
    case LayerTag::Mlp: return "mlp";
    case LayerTag::Attention: return "attention";
    case LayerTag::Norm: return "norm";
    case LayerTag::Embedding: return "embedding";
    case LayerTag::Head: return "head";
  }
  throw std::invalid_argument("layer_tag_name: unknown tag");
}

std::optional<LayerTag> layer_tag_from_name(std::string_view name) {
  if (name == "mlp") return LayerTag::Mlp;
  if (name == "attention") return LayerTag::Attention;
  if (name == "norm") return LayerTag::Norm;
  if (name == "embedding") return LayerTag::Embedding;
  if (name == "head") return LayerTag::Head;
  return std::nullopt;
}

bool TensorEntry::shape_matches_size() const {
  std::size_t n = 1;
  if (shape.empty()) return values.empty();
  for (int d : shape) {
    if (d < 0) return false;
    n *= static_cast<std::size_t>(d);
  }
  return n == values.size();
}

std::size_t TensorSet::total_dim() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.values.size();
  return n;
}

bool TensorSet::congruent_with(const TensorSet& other) const {
  if (entries.size() != other.entries.size()) return false;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& a = entries[i];
    const auto& b = other.entries[i];
    if (a.name != b.name || a.tag != b.tag || a.shape != b.shape ||
        a.values.size() != b.values.size()) {
      return false;
    }
  }
  return true;
}

const TensorEntry* TensorSet::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

TensorEntry* TensorSet::find(std::string_view name) {
  for (auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool TensorSet::all_finite() const {
  for (const auto& e : entries) {
    for (double v : e.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

void require_congruent(const TensorSet& a, const TensorSet& b) {
  if (!a.congruent_with(b)) {
    throw std::invalid_argument("tensor sets are not congruent");
  }
}

double dot(const DenseVec& a, const DenseVec& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm_sq(const DenseVec& a) {
  double acc = 0.0;
  for (double v : a) acc += v * v;
  return acc;
}

double norm(const DenseVec& a) { return std::sqrt(norm_sq(a)); }

double dot(const TensorSet& a, const TensorSet& b) {
  require_congruent(a, b);
  double acc = 0.0;
  for (std::size_t e = 0; e < a.entries.size(); ++e) {
    const auto& x = a.entries[e].values;
    const auto& y = b.entries[e].values;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  }
  return acc;
}

double norm_sq(const TensorSet& a) {
  double acc = 0.0;
  for (const auto& e : a.entries) {
    for (double v : e.values) acc += v * v;
  }
  return acc;
}

double norm(const TensorSet& a) { return std::sqrt(norm_sq(a)); }

void axpy_into(GradSet& dst, double scale, const GradSet& src) {
  require_congruent(dst, src);
  for (std::size_t e = 0; e < dst.entries.size(); ++e) {
    auto& d = dst.entries[e].values;
    const auto& s = src.entries[e].values;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += scale * s[i];
  }
}

void scale_into(TensorSet& dst, double scale) {
  for (auto& e : dst.entries) {
    for (double& v : e.values) v *= scale;
  }
}

GradSet zeros_like(const TensorSet& s) {
  GradSet out;
  out.entries.reserve(s.entries.size());
  for (const auto& e : s.entries) {
    TensorEntry z;
    z.name = e.name;
    z.tag = e.tag;
    z.shape = e.shape;
    z.values.assign(e.values.size(), 0.0);
    out.entries.push_back(std::move(z));
  }
  return out;
}

std::vector<const TensorEntry*> layer_slices(const TensorSet& s,
                                             std::optional<LayerTag> tag) {
  std::vector<const TensorEntry*> out;
  for (const auto& e : s.entries) {
    if (!tag || e.tag == *tag) out.push_back(&e);
  }
  return out;
}

}  // namespace pcr
