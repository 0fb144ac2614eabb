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
#include "subsetforge/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "sampling_detail.hpp"

namespace subsetforge {

const char* method_name(Method method) {
  switch (method) {
    case Method::random:
      return "random";
    case Method::per_class:
      return "per-class";
    case Method::monspec:
      return "monspec";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "random") {
    return Method::random;
  }
  if (name == "per-class" || name == "per_class") {
    return Method::per_class;
  }
  if (name == "monspec") {
    return Method::monspec;
  }
  return std::nullopt;
}

SizeSpec fraction_size(double fraction) {
  SizeSpec spec;
  spec.kind = SizeSpec::Kind::fraction;
  spec.fraction = fraction;
  return spec;
}

SizeSpec absolute_size(std::int64_t count) {
  SizeSpec spec;
  spec.kind = SizeSpec::Kind::absolute;
  spec.count = count;
  return spec;
}

std::int64_t resolve_size(const DatasetIndex& index, const SizeSpec& size,
                          Method method) {
  const std::int64_t total = index.num_samples();
  std::int64_t resolved = 0;
  if (size.kind == SizeSpec::Kind::fraction) {
    if (!(size.fraction > 0.0) || size.fraction > 1.0) {
      throw ValidationError("fraction must lie in (0, 1]");
    }
    // Round half up, clamped to [1, D].
    resolved = static_cast<std::int64_t>(
        std::floor(size.fraction * static_cast<double>(total) + 0.5));
    resolved = std::clamp<std::int64_t>(resolved, 1, total);
  } else {
    resolved = size.count;
    if (resolved < 1) {
      throw ValidationError("subset size must be at least 1");
    }
  }
  if (method == Method::random && resolved > total) {
    throw ValidationError("random sampling cannot draw " +
                          std::to_string(resolved) + " distinct samples from " +
                          std::to_string(total));
  }
  return resolved;
}

QuotaVector quota_per_class(std::int64_t subset_size,
                            const ClassFrequencies& frequencies) {
  if (subset_size < 1) {
    throw ValidationError("subset size must be at least 1");
  }
  const auto num_classes =
      static_cast<std::int64_t>(frequencies.per_class.size());
  QuotaVector quotas;
  quotas.total = subset_size;
  quotas.per_class.assign(frequencies.per_class.size(),
                          subset_size / num_classes);

  std::int64_t remainder = subset_size % num_classes;
  if (remainder > 0) {
    // Rarest classes first, canonical order on ties.
    std::vector<std::int64_t> order(frequencies.per_class.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::int64_t a, std::int64_t b) {
                if (frequencies.per_class[a] != frequencies.per_class[b]) {
                  return frequencies.per_class[a] < frequencies.per_class[b];
                }
                return a < b;
              });
    for (std::int64_t r = 0; r < remainder; ++r) {
      ++quotas.per_class[static_cast<std::size_t>(order[r])];
    }
  }
  return quotas;
}

Subset sample_random(const DatasetIndex& index, std::int64_t subset_size,
                     std::uint64_t seed) {
  const std::int64_t total = index.num_samples();
  if (subset_size < 1) {
    throw ValidationError("subset size must be at least 1");
  }
  if (subset_size > total) {
    throw ValidationError("random sampling cannot draw " +
                          std::to_string(subset_size) +
                          " distinct samples from " + std::to_string(total));
  }

  std::vector<std::uint32_t> pool(static_cast<std::size_t>(total));
  std::iota(pool.begin(), pool.end(), 0);

  Subset subset;
  subset.entries.reserve(static_cast<std::size_t>(subset_size));
  SplitMix64 rng(seed);
  detail::draw_without_replacement(
      pool, subset_size, rng, nullptr, [&](std::uint32_t ordinal) {
        subset.entries.push_back({ordinal, kNoProvenance});
      });
  return subset;
}

Subset sample_per_class(const DatasetIndex& index,
                        const InvertedIndex& inverted,
                        const QuotaVector& quotas, std::uint64_t seed) {
  const auto num_classes = static_cast<std::size_t>(index.num_classes());
  if (inverted.lists.size() != num_classes ||
      quotas.per_class.size() != num_classes) {
    throw ValidationError("inverted index / quota shape mismatch");
  }

  Subset subset;
  subset.entries.reserve(static_cast<std::size_t>(quotas.total));
  std::vector<std::uint32_t> scratch;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const std::int64_t quota = quotas.per_class[k];
    const auto available = static_cast<std::int64_t>(inverted.lists[k].size());
    if (quota > available) {
      subset.shortfalls.push_back(
          {static_cast<std::int32_t>(k), quota, available});
    }
    const std::int64_t take = std::min(quota, available);
    if (take == 0) {
      continue;
    }
    scratch = inverted.lists[k];
    SplitMix64 rng(mix_seed(seed, k));
    detail::draw_without_replacement(
        scratch, take, rng, nullptr, [&](std::uint32_t ordinal) {
          subset.entries.push_back({ordinal, static_cast<std::int32_t>(k)});
        });
  }
  return subset;
}

Subset sample_monspec(const DatasetIndex& index, const InvertedIndex& inverted,
                      const QuotaVector& quotas) {
  const auto num_classes = static_cast<std::size_t>(index.num_classes());
  if (inverted.lists.size() != num_classes ||
      quotas.per_class.size() != num_classes) {
    throw ValidationError("inverted index / quota shape mismatch");
  }

  Subset subset;
  subset.entries.reserve(static_cast<std::size_t>(quotas.total));
  std::vector<std::uint32_t> scratch;
  for (std::size_t k = 0; k < num_classes; ++k) {
    const std::int64_t quota = quotas.per_class[k];
    const auto available = static_cast<std::int64_t>(inverted.lists[k].size());
    if (quota > available) {
      subset.shortfalls.push_back(
          {static_cast<std::int32_t>(k), quota, available});
    }
    const std::int64_t take = std::min(quota, available);
    if (take == 0) {
      continue;
    }
    scratch = inverted.lists[k];
    const auto class_index = static_cast<std::int64_t>(k);
    std::partial_sort(scratch.begin(),
                      scratch.begin() + static_cast<std::ptrdiff_t>(take),
                      scratch.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        const std::uint32_t ca = index.count(a, class_index);
                        const std::uint32_t cb = index.count(b, class_index);
                        if (ca != cb) {
                          return ca > cb;
                        }
                        return a < b;
                      });
    for (std::int64_t i = 0; i < take; ++i) {
      subset.entries.push_back({scratch[static_cast<std::size_t>(i)],
                                static_cast<std::int32_t>(k)});
    }
  }
  return subset;
}

Subset draw_subset(const DatasetIndex& index,
                   const ClassFrequencies& frequencies,
                   const InvertedIndex& inverted,
                   const SamplerConfig& config) {
  const std::int64_t subset_size =
      resolve_size(index, config.size, config.method);
  switch (config.method) {
    case Method::random:
      return sample_random(index, subset_size, config.seed);
    case Method::per_class:
      return sample_per_class(index, inverted,
                              quota_per_class(subset_size, frequencies),
                              config.seed);
    case Method::monspec:
      return sample_monspec(index, inverted,
                            quota_per_class(subset_size, frequencies));
  }
  throw ValidationError("unknown sampling method");
}

void write_subset(const Subset& subset, const DatasetIndex& index,
                  Method method, std::optional<std::uint64_t> seed,
                  std::ostream& out,
                  const std::vector<std::string>& extra_comments) {
  for (const SubsetEntry& entry : subset.entries) {
    out << index.sample_id(entry.ordinal) << "\n";
  }
  out << "# method=" << method_name(method) << " N=" << subset.size()
      << " seed=" << (seed ? std::to_string(*seed) : "-") << "\n";
  for (const std::string& comment : extra_comments) {
    out << "# " << comment << "\n";
  }
}

std::vector<std::uint32_t> read_subset_ordinals(std::istream& in,
                                                const DatasetIndex& index) {
  std::unordered_map<std::string, std::uint32_t> lookup;
  lookup.reserve(static_cast<std::size_t>(index.num_samples()));
  for (std::int64_t i = 0; i < index.num_samples(); ++i) {
    lookup.emplace(index.sample_id(i), static_cast<std::uint32_t>(i));
  }

  std::vector<std::uint32_t> ordinals;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    const auto found = lookup.find(line);
    if (found == lookup.end()) {
      throw ValidationError("unknown sample_id \"" + line +
                            "\" in subset file");
    }
    ordinals.push_back(found->second);
  }
  if (ordinals.empty()) {
    throw ValidationError("subset file contains no samples");
  }
  return ordinals;
}

}  // namespace subsetforge
