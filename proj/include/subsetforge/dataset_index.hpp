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
#include <span>
#include <string>
#include <vector>

#include "subsetforge/error.hpp"

namespace subsetforge {

/// One annotation record: a sample id plus its per-class object counts.
/// counts must have exactly one entry per class, in canonical class order.
struct SampleRecord {
  std::string sample_id;
  std::vector<std::uint32_t> counts;
};

/// The annotation index: C class names in canonical (lexicographically
/// sorted) order and D samples with dense per-class object counts. Class
/// position k in class_names() is the class index used everywhere
/// downstream. Immutable once constructed and safe to share across threads.
class DatasetIndex {
 public:
  /// Validates and flattens the records. class_names must be sorted and
  /// unique; every record needs a unique sample_id and a counts vector of
  /// length class_names.size(); the total object count must be >= 1.
  DatasetIndex(std::vector<std::string> class_names,
               std::vector<SampleRecord> samples);

  std::int64_t num_samples() const {  // D
    return static_cast<std::int64_t>(sample_ids_.size());
  }
  std::int64_t num_classes() const {  // C
    return static_cast<std::int64_t>(class_names_.size());
  }
  std::int64_t total_objects() const { return total_objects_; }  // d

  const std::vector<std::string>& class_names() const { return class_names_; }
  const std::string& sample_id(std::int64_t ordinal) const {
    return sample_ids_[static_cast<std::size_t>(ordinal)];
  }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }

  std::uint32_t count(std::int64_t ordinal, std::int64_t class_index) const {
    return counts_[static_cast<std::size_t>(ordinal * num_classes() +
                                            class_index)];
  }
  std::span<const std::uint32_t> counts_row(std::int64_t ordinal) const {
    return {counts_.data() + ordinal * num_classes(),
            static_cast<std::size_t>(num_classes())};
  }

  bool operator==(const DatasetIndex& other) const = default;

 private:
  std::vector<std::string> class_names_;
  std::vector<std::string> sample_ids_;
  std::vector<std::uint32_t> counts_;  // row-major D x C
  std::int64_t total_objects_ = 0;
};

/// Per-class object totals d_k, the grand total d, and the dataset class
/// distribution p_dataset_k = d_k / d.
struct ClassFrequencies {
  std::vector<std::int64_t> per_class;  // d_k
  std::int64_t total = 0;               // d
  std::vector<double> p_dataset;        // d_k / d
};

/// lists[k] holds the ordinals of all samples with at least one object of
/// class k, in ascending ordinal order. A list may be empty.
struct InvertedIndex {
  std::vector<std::vector<std::uint32_t>> lists;
};

/// Parses the line-delimited annotation-index format: each non-empty line is
///   {"sample_id": "<token>", "counts": {"<class>": <non-negative int>, ...}}
/// and lines starting with '#' are comments. The class list becomes the
/// sorted union of all class names seen; missing keys mean count zero;
/// sample order follows file order. Throws ValidationError with a line
/// number for malformed records, duplicate ids, negative or non-integer
/// counts, an empty file, or an index with zero objects in total.
DatasetIndex load_index(std::istream& in);
DatasetIndex load_index_file(const std::string& path);

/// Writes the external format with dense counts in canonical class order,
/// so reloading the output reproduces the index exactly.
void save_index(const DatasetIndex& index, std::ostream& out);
void save_index_file(const DatasetIndex& index, const std::string& path);

ClassFrequencies dataset_frequencies(const DatasetIndex& index);

InvertedIndex build_inverted_index(const DatasetIndex& index);

struct SyntheticConfig {
  std::int64_t num_classes = 10;
  std::int64_t num_samples = 28310;
  double tail_exponent = 1.5;
  double mean_objects_per_sample = 35.0;
  std::uint64_t seed = 1;
};

/// Deterministic synthetic index with a long-tailed class distribution:
/// class popularity follows a power law (weight of class k proportional to
/// k^-tail_exponent), per-sample object totals are Poisson draws around
/// mean_objects_per_sample scaled by a per-sample scene-density factor, and
/// every class is guaranteed to occur in at least one sample. The density
/// factor makes object counts of different classes rise and fall together
/// across samples, as they do in real driving scenes.
DatasetIndex generate_synthetic(const SyntheticConfig& config);

}  // namespace subsetforge
