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
#include "subsetforge/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "sampling_detail.hpp"

namespace subsetforge {

namespace {

// Accumulates the object-count row of one selected sample.
inline void accumulate_row(const DatasetIndex& index, std::uint32_t ordinal,
                           std::vector<std::int64_t>& class_counts) {
  const auto row = index.counts_row(ordinal);
  for (std::size_t k = 0; k < class_counts.size(); ++k) {
    class_counts[k] += row[k];
  }
}

// Per-worker scratch. Pools are restored after every trial, so trial i sees
// the same starting state regardless of which worker runs it.
struct Workspace {
  std::vector<std::uint32_t> random_pool;
  std::vector<std::vector<std::uint32_t>> class_pools;
  std::vector<std::uint32_t> undo;
  std::vector<std::int64_t> class_counts;
};

Workspace make_workspace(const DatasetIndex& index,
                         const InvertedIndex& inverted, Method method) {
  Workspace ws;
  ws.class_counts.assign(static_cast<std::size_t>(index.num_classes()), 0);
  if (method == Method::random) {
    ws.random_pool.resize(static_cast<std::size_t>(index.num_samples()));
    std::iota(ws.random_pool.begin(), ws.random_pool.end(), 0);
  } else if (method == Method::per_class) {
    ws.class_pools = inverted.lists;
  }
  return ws;
}

double binomial_capped(std::int64_t n, std::int64_t r, double cap) {
  if (r < 0 || r > n) {
    return 0.0;
  }
  r = std::min(r, n - r);
  double result = 1.0;
  for (std::int64_t i = 1; i <= r; ++i) {
    result *= static_cast<double>(n - r + i) / static_cast<double>(i);
    if (result > cap) {
      return result;
    }
  }
  return result;
}

using MetricKey = std::array<double, 3>;

MetricKey key_of(const MetricTriple& metrics) {
  return {metrics.l1, metrics.n_norm_min, metrics.n_norm_avg};
}

ExactDistribution finish_distribution(const std::map<MetricKey, double>& acc) {
  ExactDistribution dist;
  dist.outcomes.reserve(acc.size());
  for (const auto& [key, probability] : acc) {
    ExactOutcome outcome;
    outcome.metrics = {key[0], key[1], key[2]};
    outcome.probability = probability;
    dist.outcomes.push_back(outcome);
    dist.mean_l1 += probability * key[0];
    dist.mean_n_norm_min += probability * key[1];
    dist.mean_n_norm_avg += probability * key[2];
  }
  return dist;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

}  // namespace

TrialMatrix run_trials(const DatasetIndex& index,
                       const ClassFrequencies& frequencies,
                       const InvertedIndex& inverted, Method method,
                       std::int64_t subset_size, std::int64_t trials,
                       std::uint64_t master_seed, int workers) {
  if (trials < 1) {
    throw ValidationError("trial count must be at least 1");
  }
  if (subset_size < 1) {
    throw ValidationError("subset size must be at least 1");
  }
  if (method == Method::random && subset_size > index.num_samples()) {
    throw ValidationError("random sampling cannot draw " +
                          std::to_string(subset_size) +
                          " distinct samples from " +
                          std::to_string(index.num_samples()));
  }
  if (method == Method::monspec) {
    trials = 1;  // deterministic sampler: one evaluation suffices
  }

  QuotaVector quotas;
  std::int64_t shortfalls_per_trial = 0;
  if (method != Method::random) {
    quotas = quota_per_class(subset_size, frequencies);
    for (std::size_t k = 0; k < quotas.per_class.size(); ++k) {
      if (quotas.per_class[k] >
          static_cast<std::int64_t>(inverted.lists[k].size())) {
        ++shortfalls_per_trial;
      }
    }
  }

  TrialMatrix matrix;
  matrix.method = method;
  matrix.subset_size = subset_size;
  matrix.master_seed = master_seed;
  matrix.l1.resize(static_cast<std::size_t>(trials));
  matrix.n_norm_min.resize(static_cast<std::size_t>(trials));
  matrix.n_norm_avg.resize(static_cast<std::size_t>(trials));
  matrix.shortfall_warnings = shortfalls_per_trial * trials;

  const std::int64_t dataset_samples = index.num_samples();
  const auto num_classes = static_cast<std::size_t>(index.num_classes());

  auto run_range = [&](std::int64_t begin, std::int64_t end) {
    Workspace ws = make_workspace(index, inverted, method);
    for (std::int64_t t = begin; t < end; ++t) {
      try {
        const std::uint64_t trial_seed =
            mix_seed(master_seed, static_cast<std::uint64_t>(t));
        std::fill(ws.class_counts.begin(), ws.class_counts.end(), 0);
        std::int64_t entries = 0;
        switch (method) {
          case Method::random: {
            SplitMix64 rng(trial_seed);
            detail::draw_without_replacement(
                ws.random_pool, subset_size, rng, &ws.undo,
                [&](std::uint32_t ordinal) {
                  accumulate_row(index, ordinal, ws.class_counts);
                });
            entries = subset_size;
            break;
          }
          case Method::per_class: {
            for (std::size_t k = 0; k < num_classes; ++k) {
              const std::int64_t take = std::min(
                  quotas.per_class[k],
                  static_cast<std::int64_t>(ws.class_pools[k].size()));
              if (take == 0) {
                continue;
              }
              SplitMix64 rng(mix_seed(trial_seed, k));
              detail::draw_without_replacement(
                  ws.class_pools[k], take, rng, &ws.undo,
                  [&](std::uint32_t ordinal) {
                    accumulate_row(index, ordinal, ws.class_counts);
                  });
              entries += take;
            }
            break;
          }
          case Method::monspec: {
            const Subset subset = sample_monspec(index, inverted, quotas);
            for (const SubsetEntry& entry : subset.entries) {
              accumulate_row(index, entry.ordinal, ws.class_counts);
            }
            entries = subset.size();
            break;
          }
        }
        const MetricTriple metrics = metrics_from_counts(
            ws.class_counts, entries, dataset_samples, frequencies);
        const auto slot = static_cast<std::size_t>(t);
        matrix.l1[slot] = metrics.l1;
        matrix.n_norm_min[slot] = metrics.n_norm_min;
        matrix.n_norm_avg[slot] = metrics.n_norm_avg;
      } catch (const std::exception& e) {
        throw ValidationError("trial " + std::to_string(t) + ": " + e.what());
      }
    }
  };

  int worker_count = workers;
  if (worker_count <= 0) {
    worker_count = static_cast<int>(std::thread::hardware_concurrency());
  }
  worker_count = std::max(worker_count, 1);
  worker_count =
      static_cast<int>(std::min<std::int64_t>(worker_count, trials));

  if (worker_count == 1) {
    run_range(0, trials);
    return matrix;
  }

  struct WorkerFailure {
    std::int64_t begin;
    std::exception_ptr error;
  };
  std::vector<WorkerFailure> failures;
  std::vector<std::thread> threads;
  std::mutex failure_mutex;
  threads.reserve(static_cast<std::size_t>(worker_count));
  for (int w = 0; w < worker_count; ++w) {
    const std::int64_t begin = trials * w / worker_count;
    const std::int64_t end = trials * (w + 1) / worker_count;
    threads.emplace_back([&, begin, end] {
      try {
        run_range(begin, end);
      } catch (...) {
        const std::scoped_lock lock(failure_mutex);
        failures.push_back({begin, std::current_exception()});
      }
    });
  }
  for (std::thread& thread : threads) {
    thread.join();
  }
  if (!failures.empty()) {
    // Report the earliest failing range for a stable error message.
    auto first = std::min_element(failures.begin(), failures.end(),
                                  [](const auto& a, const auto& b) {
                                    return a.begin < b.begin;
                                  });
    std::rethrow_exception(first->error);
  }
  return matrix;
}

DistributionSummary summarize(std::span<const double> values,
                              std::string metric_name) {
  if (values.empty()) {
    throw ValidationError("cannot summarize an empty value array");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  const auto at_rank = [&](double p) {
    const double rank = p * static_cast<double>(sorted.size() - 1);
    const auto lower = static_cast<std::size_t>(rank);
    const double fraction = rank - static_cast<double>(lower);
    if (fraction == 0.0) {
      return sorted[lower];
    }
    return sorted[lower] * (1.0 - fraction) + sorted[lower + 1] * fraction;
  };

  DistributionSummary summary;
  summary.metric = std::move(metric_name);
  summary.count = static_cast<std::int64_t>(sorted.size());
  summary.min = sorted.front();
  summary.q1 = at_rank(0.25);
  summary.median = at_rank(0.5);
  summary.q3 = at_rank(0.75);
  summary.max = sorted.back();
  double sum = 0.0;
  for (const double v : sorted) {
    sum += v;
  }
  summary.mean = sum / static_cast<double>(sorted.size());
  return summary;
}

double exceedance(std::span<const double> values, double threshold) {
  if (values.empty()) {
    throw ValidationError("cannot compute exceedance of an empty array");
  }
  std::int64_t below = 0;
  for (const double v : values) {
    if (v < threshold) {
      ++below;
    }
  }
  return static_cast<double>(below) / static_cast<double>(values.size());
}

ExactDistribution enumerate_exact(const DatasetIndex& index,
                                  const ClassFrequencies& frequencies,
                                  const InvertedIndex& inverted, Method method,
                                  std::int64_t subset_size, double max_states) {
  const std::int64_t dataset_samples = index.num_samples();
  const auto num_classes = static_cast<std::size_t>(index.num_classes());
  std::map<MetricKey, double> acc;
  std::vector<std::int64_t> class_counts(num_classes, 0);

  switch (method) {
    case Method::random: {
      if (subset_size < 1 || subset_size > dataset_samples) {
        throw ValidationError("subset size out of range for random sampling");
      }
      const double states =
          binomial_capped(dataset_samples, subset_size, max_states);
      if (states > max_states) {
        throw ValidationError(
            "exact enumeration infeasible: C(" +
            std::to_string(dataset_samples) + "," +
            std::to_string(subset_size) + ") = " + format_double(states) +
            " exceeds " + format_double(max_states));
      }
      const double probability = 1.0 / states;
      std::vector<std::int64_t> combination(
          static_cast<std::size_t>(subset_size));
      std::iota(combination.begin(), combination.end(), 0);
      while (true) {
        std::fill(class_counts.begin(), class_counts.end(), 0);
        for (const std::int64_t ordinal : combination) {
          accumulate_row(index, static_cast<std::uint32_t>(ordinal),
                         class_counts);
        }
        acc[key_of(metrics_from_counts(class_counts, subset_size,
                                       dataset_samples, frequencies))] +=
            probability;

        std::int64_t pos = subset_size - 1;
        while (pos >= 0 &&
               combination[static_cast<std::size_t>(pos)] ==
                   dataset_samples - subset_size + pos) {
          --pos;
        }
        if (pos < 0) {
          break;
        }
        ++combination[static_cast<std::size_t>(pos)];
        for (std::int64_t i = pos + 1; i < subset_size; ++i) {
          combination[static_cast<std::size_t>(i)] =
              combination[static_cast<std::size_t>(i - 1)] + 1;
        }
      }
      break;
    }
    case Method::per_class: {
      const QuotaVector quotas = quota_per_class(subset_size, frequencies);
      std::vector<std::int64_t> takes(num_classes, 0);
      double states = 1.0;
      std::int64_t entries = 0;
      for (std::size_t k = 0; k < num_classes; ++k) {
        const auto available =
            static_cast<std::int64_t>(inverted.lists[k].size());
        takes[k] = std::min(quotas.per_class[k], available);
        entries += takes[k];
        states *= binomial_capped(available, takes[k], max_states);
        if (states > max_states) {
          throw ValidationError(
              "exact enumeration infeasible: per-class state space " +
              format_double(states) + " exceeds " + format_double(max_states));
        }
      }
      if (entries == 0) {
        throw ValidationError("per-class enumeration selects no samples");
      }
      const double probability = 1.0 / states;

      // DFS over classes; within a class, recurse over m-subsets of idx_k.
      auto record = [&]() {
        acc[key_of(metrics_from_counts(class_counts, entries, dataset_samples,
                                       frequencies))] += probability;
      };
      auto enumerate_class = [&](auto&& self, std::size_t k) -> void {
        if (k == num_classes) {
          record();
          return;
        }
        const auto& candidates = inverted.lists[k];
        const std::int64_t take = takes[k];
        if (take == 0) {
          self(self, k + 1);
          return;
        }
        auto choose = [&](auto&& chooser, std::size_t start,
                          std::int64_t remaining) -> void {
          if (remaining == 0) {
            self(self, k + 1);
            return;
          }
          for (std::size_t i = start;
               i + static_cast<std::size_t>(remaining) <= candidates.size();
               ++i) {
            accumulate_row(index, candidates[i], class_counts);
            chooser(chooser, i + 1, remaining - 1);
            const auto row = index.counts_row(candidates[i]);
            for (std::size_t c = 0; c < class_counts.size(); ++c) {
              class_counts[c] -= row[c];
            }
          }
        };
        choose(choose, 0, take);
      };
      enumerate_class(enumerate_class, 0);
      break;
    }
    case Method::monspec: {
      const QuotaVector quotas = quota_per_class(subset_size, frequencies);
      const Subset subset = sample_monspec(index, inverted, quotas);
      for (const SubsetEntry& entry : subset.entries) {
        accumulate_row(index, entry.ordinal, class_counts);
      }
      acc[key_of(metrics_from_counts(class_counts, subset.size(),
                                     dataset_samples, frequencies))] += 1.0;
      break;
    }
  }
  return finish_distribution(acc);
}

BenchResult bench_sampler(const DatasetIndex& index,
                          const ClassFrequencies& frequencies,
                          const InvertedIndex& inverted, Method method,
                          std::int64_t subset_size, std::int64_t runs,
                          std::uint64_t seed) {
  if (runs < 1) {
    throw ValidationError("bench run count must be at least 1");
  }
  QuotaVector quotas;
  if (method != Method::random) {
    quotas = quota_per_class(subset_size, frequencies);
  }

  const auto draw = [&](std::uint64_t run_seed) {
    switch (method) {
      case Method::random:
        return sample_random(index, subset_size, run_seed);
      case Method::per_class:
        return sample_per_class(index, inverted, quotas, run_seed);
      case Method::monspec:
        return sample_monspec(index, inverted, quotas);
    }
    throw ValidationError("unknown sampling method");
  };

  std::size_t sink = 0;  // keeps the draws observable
  sink += draw(mix_seed(seed, 0)).entries.size();  // warm-up, not measured

  BenchResult result;
  result.method = method;
  result.subset_size = subset_size;
  result.runs = runs;
  result.min_ms = std::numeric_limits<double>::infinity();
  double total_ms = 0.0;
  for (std::int64_t r = 0; r < runs; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const Subset subset = draw(mix_seed(seed, static_cast<std::uint64_t>(r)));
    const auto stop = std::chrono::steady_clock::now();
    sink += subset.entries.size();
    const double elapsed_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    total_ms += elapsed_ms;
    result.min_ms = std::min(result.min_ms, elapsed_ms);
    result.max_ms = std::max(result.max_ms, elapsed_ms);
  }
  result.mean_ms = total_ms / static_cast<double>(runs);
  if (sink == 0) {
    throw ValidationError("benchmark drew empty subsets");
  }
  return result;
}

ReportCell analyze_cell(const DatasetIndex& index,
                        const ClassFrequencies& frequencies,
                        const InvertedIndex& inverted, Method method,
                        double fraction, std::int64_t subset_size,
                        std::int64_t trials, std::uint64_t master_seed,
                        int workers) {
  const TrialMatrix matrix =
      run_trials(index, frequencies, inverted, method, subset_size, trials,
                 master_seed, workers);
  ReportCell cell;
  cell.method = method;
  cell.fraction = fraction;
  cell.subset_size = subset_size;
  cell.trials = matrix.trials();
  cell.l1 = summarize(matrix.l1, "l1");
  cell.n_norm_min = summarize(matrix.n_norm_min, "n_norm_min");
  cell.n_norm_avg = summarize(matrix.n_norm_avg, "n_norm_avg");
  cell.p_n_norm_min_below_1 = exceedance(matrix.n_norm_min, 1.0);
  cell.shortfall_warnings = matrix.shortfall_warnings;
  return cell;
}

void write_report_csv(const MonteCarloReport& report, std::ostream& out) {
  out << "method,fraction,N,trials,metric,min,q1,median,q3,max,mean\n";
  for (const ReportCell& cell : report.cells) {
    const std::string prefix = std::string(method_name(cell.method)) + "," +
                               format_double(cell.fraction) + "," +
                               std::to_string(cell.subset_size) + "," +
                               std::to_string(cell.trials) + ",";
    for (const DistributionSummary* summary :
         {&cell.l1, &cell.n_norm_min, &cell.n_norm_avg}) {
      out << prefix << summary->metric << "," << format_double(summary->min)
          << "," << format_double(summary->q1) << ","
          << format_double(summary->median) << ","
          << format_double(summary->q3) << "," << format_double(summary->max)
          << "," << format_double(summary->mean) << "\n";
    }
    out << prefix << "p_n_norm_min_below_1,,,,,,"
        << format_double(cell.p_n_norm_min_below_1) << "\n";
  }
}

}  // namespace subsetforge
