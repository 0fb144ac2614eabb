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

#include "subsetforge/dataset_index.hpp"
#include "subsetforge/samplers.hpp"
#include "subsetforge/stats.hpp"

namespace subsetforge {

/// Per-trial metric values for one (method, N) cell. Slot i always holds
/// the trial seeded with mix_seed(master_seed, i), so the matrix is a pure
/// function of its inputs no matter how many workers filled it.
struct TrialMatrix {
  Method method = Method::random;
  std::int64_t subset_size = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> l1;
  std::vector<double> n_norm_min;
  std::vector<double> n_norm_avg;
  std::int64_t shortfall_warnings = 0;  // summed over trials

  std::int64_t trials() const { return static_cast<std::int64_t>(l1.size()); }
};

/// Runs seeded trials of the given sampler and records the three metrics per
/// trial. monspec is deterministic, so its trial count is forced to 1.
/// workers <= 0 means use the hardware concurrency. A failing trial aborts
/// the run with its trial index in the error message.
TrialMatrix run_trials(const DatasetIndex& index,
                       const ClassFrequencies& frequencies,
                       const InvertedIndex& inverted, Method method,
                       std::int64_t subset_size, std::int64_t trials,
                       std::uint64_t master_seed, int workers = 0);

/// Five-number box-plot summary plus the mean. Quartiles and the median use
/// linear interpolation at rank p * (count - 1); the whiskers (min/max) are
/// the exact extremes of the values.
struct DistributionSummary {
  std::string metric;
  std::int64_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

DistributionSummary summarize(std::span<const double> values,
                              std::string metric_name);

/// Fraction of values strictly below the threshold.
double exceedance(std::span<const double> values, double threshold);

/// One exactly enumerated metric outcome and its probability.
struct ExactOutcome {
  MetricTriple metrics;
  double probability = 0.0;
};

struct ExactDistribution {
  std::vector<ExactOutcome> outcomes;  // sorted by (l1, n_norm_min, n_norm_avg)
  double mean_l1 = 0.0;
  double mean_n_norm_min = 0.0;
  double mean_n_norm_avg = 0.0;
};

/// Exhaustively enumerates every equally likely selection of the given
/// method and merges selections with identical metric triples. Oracle for
/// validating the Monte-Carlo estimator on small instances; throws when the
/// state space (C(D,N) for random, the product of per-class binomials for
/// per-class) exceeds max_states, reporting the bound.
ExactDistribution enumerate_exact(const DatasetIndex& index,
                                  const ClassFrequencies& frequencies,
                                  const InvertedIndex& inverted, Method method,
                                  std::int64_t subset_size,
                                  double max_states = 1e6);

struct BenchResult {
  Method method = Method::random;
  std::int64_t subset_size = 0;
  std::int64_t runs = 0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
};

/// Wall-clock time of the subset draw alone (dataset and inverted index are
/// prebuilt, quotas precomputed). One warm-up draw runs before the measured
/// ones. Single-threaded by contract.
BenchResult bench_sampler(const DatasetIndex& index,
                          const ClassFrequencies& frequencies,
                          const InvertedIndex& inverted, Method method,
                          std::int64_t subset_size, std::int64_t runs,
                          std::uint64_t seed = 0);

/// Summary of one (method, fraction) grid cell.
struct ReportCell {
  Method method = Method::random;
  double fraction = 0.0;
  std::int64_t subset_size = 0;
  std::int64_t trials = 0;
  DistributionSummary l1;
  DistributionSummary n_norm_min;
  DistributionSummary n_norm_avg;
  double p_n_norm_min_below_1 = 0.0;
  std::int64_t shortfall_warnings = 0;
};

struct MonteCarloReport {
  std::vector<ReportCell> cells;
};

/// run_trials plus summaries and the exceedance probability for one cell.
ReportCell analyze_cell(const DatasetIndex& index,
                        const ClassFrequencies& frequencies,
                        const InvertedIndex& inverted, Method method,
                        double fraction, std::int64_t subset_size,
                        std::int64_t trials, std::uint64_t master_seed,
                        int workers = 0);

/// CSV schema: method,fraction,N,trials,metric,min,q1,median,q3,max,mean —
/// three metric rows per cell plus a p_n_norm_min_below_1 row carrying the
/// exceedance probability in the mean column.
void write_report_csv(const MonteCarloReport& report, std::ostream& out);

}  // namespace subsetforge
