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
#include "subsetforge/stats.hpp"

#include <cmath>
#include <limits>

namespace subsetforge {

namespace {

void require_positive_class_totals(const ClassFrequencies& frequencies) {
  for (std::size_t k = 0; k < frequencies.per_class.size(); ++k) {
    if (frequencies.per_class[k] <= 0) {
      throw ValidationError("class " + std::to_string(k) +
                            " has no objects in the dataset; normalized "
                            "counts are undefined");
    }
  }
}

}  // namespace

double l1_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("probability vectors differ in length");
  }
  double p_sum = 0.0;
  double q_sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p_sum += p[k];
    q_sum += q[k];
  }
  if (std::abs(p_sum - 1.0) > 1e-9 || std::abs(q_sum - 1.0) > 1e-9) {
    throw ValidationError("probability vectors must sum to 1");
  }
  double distance = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    distance += std::abs(p[k] - q[k]);
  }
  return distance;
}

NormalizedCounts normalized_counts(
    std::span<const std::int64_t> objects_per_class, std::int64_t subset_size,
    std::int64_t dataset_samples,
    std::span<const std::int64_t> dataset_per_class) {
  if (subset_size < 1) {
    throw ValidationError("subset size must be at least 1");
  }
  if (objects_per_class.size() != dataset_per_class.size()) {
    throw ValidationError("count vectors differ in length");
  }
  NormalizedCounts result;
  result.n_norm.resize(objects_per_class.size());
  result.n_norm_min = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < objects_per_class.size(); ++k) {
    if (dataset_per_class[k] <= 0) {
      throw ValidationError("class " + std::to_string(k) +
                            " has no objects in the dataset; normalized "
                            "counts are undefined");
    }
    const double value = normalized_count(objects_per_class[k],
                                          dataset_samples, subset_size,
                                          dataset_per_class[k]);
    result.n_norm[k] = value;
    result.n_norm_min = std::min(result.n_norm_min, value);
    sum += value;
  }
  result.n_norm_avg = sum / static_cast<double>(objects_per_class.size());
  return result;
}

MetricTriple metrics_from_counts(
    std::span<const std::int64_t> objects_per_class, std::int64_t subset_size,
    std::int64_t dataset_samples, const ClassFrequencies& frequencies) {
  if (subset_size < 1) {
    throw ValidationError("subset size must be at least 1");
  }
  if (objects_per_class.size() != frequencies.per_class.size()) {
    throw ValidationError("count vector / frequency shape mismatch");
  }
  std::int64_t total = 0;
  for (const std::int64_t count : objects_per_class) {
    total += count;
  }
  if (total == 0) {
    throw ValidationError(
        "subset contains no objects; statistics are undefined");
  }

  MetricTriple metrics;
  metrics.n_norm_min = std::numeric_limits<double>::infinity();
  double n_norm_sum = 0.0;
  for (std::size_t k = 0; k < objects_per_class.size(); ++k) {
    const double p_subset = static_cast<double>(objects_per_class[k]) /
                            static_cast<double>(total);
    metrics.l1 += std::abs(frequencies.p_dataset[k] - p_subset);
    const double n_norm = normalized_count(objects_per_class[k],
                                           dataset_samples, subset_size,
                                           frequencies.per_class[k]);
    metrics.n_norm_min = std::min(metrics.n_norm_min, n_norm);
    n_norm_sum += n_norm;
  }
  metrics.n_norm_avg =
      n_norm_sum / static_cast<double>(objects_per_class.size());
  return metrics;
}

SubsetStats subset_stats(const DatasetIndex& index,
                         const ClassFrequencies& frequencies,
                         const Subset& subset) {
  if (subset.entries.empty()) {
    throw ValidationError("subset is empty");
  }
  require_positive_class_totals(frequencies);

  const std::int64_t num_classes = index.num_classes();
  SubsetStats stats;
  stats.subset_size = subset.size();
  stats.objects_per_class.assign(static_cast<std::size_t>(num_classes), 0);
  for (const SubsetEntry& entry : subset.entries) {
    if (entry.ordinal >= index.num_samples()) {
      throw ValidationError("subset entry ordinal out of range");
    }
    const auto row = index.counts_row(entry.ordinal);
    for (std::int64_t k = 0; k < num_classes; ++k) {
      stats.objects_per_class[static_cast<std::size_t>(k)] += row[k];
    }
  }

  const MetricTriple metrics =
      metrics_from_counts(stats.objects_per_class, stats.subset_size,
                          index.num_samples(), frequencies);
  stats.l1 = metrics.l1;
  stats.n_norm_min = metrics.n_norm_min;
  stats.n_norm_avg = metrics.n_norm_avg;

  for (const std::int64_t count : stats.objects_per_class) {
    stats.total_objects += count;
  }
  stats.p_subset.resize(static_cast<std::size_t>(num_classes));
  stats.n_norm.resize(static_cast<std::size_t>(num_classes));
  for (std::int64_t k = 0; k < num_classes; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    stats.p_subset[idx] = static_cast<double>(stats.objects_per_class[idx]) /
                          static_cast<double>(stats.total_objects);
    stats.n_norm[idx] =
        normalized_count(stats.objects_per_class[idx], index.num_samples(),
                         stats.subset_size, frequencies.per_class[idx]);
  }
  return stats;
}

}  // namespace subsetforge
