// Copyright 2026 the pcrlab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcr {

// Role of a parameter block inside the model.  Conflict resolution policies
// are allowed to treat the groups differently (e.g. project only Mlp blocks).
enum class LayerTag { Mlp, Attention, Norm, Embedding, Head };

const char* layer_tag_name(LayerTag tag);
std::optional<LayerTag> layer_tag_from_name(std::string_view name);

// Flat storage for one parameter/gradient block.  All arithmetic treats the
// values as a flat vector; `shape` is carried for I/O and sanity checks only.
using DenseVec = std::vector<double>;

struct TensorEntry {
  std::string name;
  LayerTag tag = LayerTag::Mlp;
  std::vector<int> shape;
  DenseVec values;

  std::size_t size() const { return values.size(); }
  bool shape_matches_size() const;
};

// Ordered collection of named blocks.  Parameters and gradients share this
// representation; two sets are "congruent" when names, tags and shapes match
// entry by entry, which is the precondition for all binary operations.
struct TensorSet {
  std::vector<TensorEntry> entries;

  std::size_t total_dim() const;
  bool congruent_with(const TensorSet& other) const;
  const TensorEntry* find(std::string_view name) const;
  TensorEntry* find(std::string_view name);
  bool all_finite() const;
};

using ParamSet = TensorSet;
using GradSet = TensorSet;

// Throws std::invalid_argument when a/b differ in structure.
void require_congruent(const TensorSet& a, const TensorSet& b);

// Inner product / squared norm with a fixed left-to-right accumulation order
// so results are bit-reproducible.  Length mismatch throws.
double dot(const DenseVec& a, const DenseVec& b);
double norm_sq(const DenseVec& a);
double norm(const DenseVec& a);

// Whole-set reductions: entries in canonical order, coordinates left to right.
double dot(const TensorSet& a, const TensorSet& b);
double norm_sq(const TensorSet& a);
double norm(const TensorSet& a);

// dst += scale * src (congruent sets).
void axpy_into(GradSet& dst, double scale, const GradSet& src);
// dst *= scale.
void scale_into(TensorSet& dst, double scale);

// Structural copy with zeroed values.
GradSet zeros_like(const TensorSet& s);

// Views over the entries, optionally filtered by tag.  Pointers remain valid
// while the underlying set is alive and unmodified.
std::vector<const TensorEntry*> layer_slices(const TensorSet& s,
                                             std::optional<LayerTag> tag = {});

}  // namespace pcr
