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
#include <span>
#include <vector>

#include "subsetforge/dataset_index.hpp"
#include "subsetforge/samplers.hpp"

namespace subsetforge {

/// The three subset-quality metrics reported everywhere: L1 distance to the
/// dataset class distribution and the min/mean of the normalized per-class
/// object counts.
struct MetricTriple {
  double l1 = 0.0;
  double n_norm_min = 0.0;
  double n_norm_avg = 0.0;
};

struct SubsetStats {
  std::int64_t subset_size = 0;                 // N, entries with multiplicity
  std::int64_t total_objects = 0;               // n
  std::vector<std::int64_t> objects_per_class;  // n_k
  std::vector<double> p_subset;                 // n_k / n
  std::vector<double> n_norm;                   // n_k / ((N/D) * d_k)
  double l1 = 0.0;
  double n_norm_min = 0.0;
  double n_norm_avg = 0.0;
};

/// Object count normalized by the expected count under uniform random
/// sampling of subset_size out of dataset_samples.
inline double normalized_count(std::int64_t objects, std::int64_t dataset_samples,
                               std::int64_t subset_size, std::int64_t dataset_objects) {
  return (static_cast<double>(objects) * static_cast<double>(dataset_samples)) /
         (static_cast<double>(subset_size) * static_cast<double>(dataset_objects));
}

/// Sum of |p_k - q_k|. Both vectors must have the same length and each must
/// sum to 1 within 1e-9. Symmetric; result lies in [0, 2].
double l1_distance(std::span<const double> p, std::span<const double> q);

struct NormalizedCounts {
  std::vector<double> n_norm;
  double n_norm_min = 0.0;
  double n_norm_avg = 0.0;
};

/// n_norm_k = n_k * D / (N * d_k) with min and mean over classes. Every d_k
/// must be positive and N >= 1.
NormalizedCounts normalized_counts(std::span<const std::int64_t> objects_per_class,
                                   std::int64_t subset_size,
                                   std::int64_t dataset_samples,
                                   std::span<const std::int64_t> dataset_per_class);

/// Metric kernel shared by subset_stats, the Monte-Carlo engine, and the
/// exact enumerator, so the same per-class counts always produce bitwise
/// identical metric values on every path. Throws when the counts hold no
/// objects at all (the statistics are undefined then).
MetricTriple metrics_from_counts(std::span<const std::int64_t> objects_per_class,
                                 std::int64_t subset_size,
                                 std::int64_t dataset_samples,
                                 const ClassFrequencies& frequencies);

/// Full statistics of one subset; duplicate entries count with multiplicity.
SubsetStats subset_stats(const DatasetIndex& index,
                         const ClassFrequencies& frequencies,
                         const Subset& subset);

}  // namespace subsetforge
