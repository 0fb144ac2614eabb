/*
 * Copyright 2026 The subsetforge authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subsetforge/dataset_index.hpp"

namespace subsetforge {

enum class Method { random, per_class, monspec };

/// Canonical CLI/report spelling: "random", "per-class", "monspec".
const char* method_name(Method method);
std::optional<Method> parse_method(std::string_view name);

/// Subset size given either as a fraction of D or as an absolute count.
struct SizeSpec {
  enum class Kind { fraction, absolute };
  Kind kind = Kind::fraction;
  double fraction = 1.0;
  std::int64_t count = 0;
};
SizeSpec fraction_size(double fraction);
SizeSpec absolute_size(std::int64_t count);

/// Fractions resolve to N = round(f * D) with round-half-up, clamped to
/// [1, D]; absolute counts pass through. Random sampling additionally
/// requires N <= D (it draws without replacement).
std::int64_t resolve_size(const DatasetIndex& index, const SizeSpec& size,
                          Method method);

/// Per-class sample quotas summing exactly to the subset size.
struct QuotaVector {
  std::vector<std::int64_t> per_class;  // q_k
  std::int64_t total = 0;               // N
};

/// floor(N/C) per class; the remainder goes one-per-class to the classes
/// with the fewest objects (ties broken by canonical class order), since
/// extra coverage matters most for the sparse classes.
QuotaVector quota_per_class(std::int64_t subset_size,
                            const ClassFrequencies& frequencies);

inline constexpr std::int32_t kNoProvenance = -1;

struct SubsetEntry {
  std::uint32_t ordinal;     // position in DatasetIndex sample order
  std::int32_t provenance;   // class the entry was drawn for, or kNoProvenance

  bool operator==(const SubsetEntry&) const = default;
};

/// A class quota that could not be met because idx_k was too small.
struct ShortfallWarning {
  std::int32_t class_index;
  std::int64_t requested;
  std::int64_t taken;
};

/// An ordered multiset of selected samples. Per-class methods may select
/// the same ordinal for several classes; such duplicates stay in the list
/// and all downstream statistics count their objects with multiplicity.
struct Subset {
  std::vector<SubsetEntry> entries;
  std::vector<ShortfallWarning> shortfalls;

  std::int64_t size() const {  // N
    return static_cast<std::int64_t>(entries.size());
  }
};

struct SamplerConfig {
  Method method = Method::random;
  SizeSpec size = fraction_size(1.0);
  std::uint64_t seed = 0;  // ignored by monspec
};

/// N distinct ordinals drawn uniformly without replacement via a seeded
/// partial shuffle; entries in draw order, no provenance.
Subset sample_random(const DatasetIndex& index, std::int64_t subset_size,
                     std::uint64_t seed);

/// For each class k in canonical order, draws min(q_k, |idx_k|) ordinals
/// uniformly without replacement from idx_k, using the stream seed
/// mix_seed(seed, k) so class results do not depend on each other. A class
/// with fewer candidates than its quota yields all of them plus a
/// shortfall warning.
Subset sample_per_class(const DatasetIndex& index,
                        const InvertedIndex& inverted,
                        const QuotaVector& quotas, std::uint64_t seed);

/// For each class k in canonical order, takes the min(q_k, |idx_k|) samples
/// with the most class-k objects, ties broken by ascending ordinal.
/// Deterministic; no seed.
Subset sample_monspec(const DatasetIndex& index, const InvertedIndex& inverted,
                      const QuotaVector& quotas);

/// Resolves the size and dispatches on the configured method.
Subset draw_subset(const DatasetIndex& index,
                   const ClassFrequencies& frequencies,
                   const InvertedIndex& inverted, const SamplerConfig& config);

/// Subset export format: one sample_id per line in entry order (duplicates
/// repeated), then a "# method=... N=... seed=..." provenance comment and
/// any extra comment lines.
void write_subset(const Subset& subset, const DatasetIndex& index,
                  Method method, std::optional<std::uint64_t> seed,
                  std::ostream& out,
                  const std::vector<std::string>& extra_comments = {});

/// Reads a subset file back as ordinals in file order. Unknown sample ids
/// and files without any sample line are ValidationErrors.
std::vector<std::uint32_t> read_subset_ordinals(std::istream& in,
                                                const DatasetIndex& index);

}  // namespace subsetforge
