#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "subsetforge/dataset_index.hpp"
#include "subsetforge/montecarlo.hpp"
#include "subsetforge/rng.hpp"
#include "subsetforge/samplers.hpp"
#include "subsetforge/stats.hpp"

using namespace subsetforge;

namespace {

struct F1Setup {
  DatasetIndex index = testfix::make_f1();
  ClassFrequencies freq = dataset_frequencies(index);
  InvertedIndex inverted = build_inverted_index(index);
};

using MetricKey = std::array<double, 3>;

std::map<MetricKey, std::int64_t> trial_outcomes(const TrialMatrix& matrix) {
  std::map<MetricKey, std::int64_t> counts;
  for (std::int64_t t = 0; t < matrix.trials(); ++t) {
    const auto slot = static_cast<std::size_t>(t);
    ++counts[{matrix.l1[slot], matrix.n_norm_min[slot],
              matrix.n_norm_avg[slot]}];
  }
  return counts;
}

// Monte-Carlo frequencies must land on exactly enumerated outcomes (the
// engine and the enumerator share the metric kernel, so the triples match
// bitwise) and agree within the given tolerance.
void check_oracle_agreement(const F1Setup& f1, Method method,
                            std::int64_t subset_size, std::int64_t trials,
                            std::uint64_t seed) {
  const ExactDistribution exact = enumerate_exact(
      f1.index, f1.freq, f1.inverted, method, subset_size);
  const TrialMatrix matrix = run_trials(f1.index, f1.freq, f1.inverted,
                                        method, subset_size, trials, seed);
  const auto observed = trial_outcomes(matrix);

  double observed_total = 0.0;
  for (const auto& [key, count] : observed) {
    const bool known =
        std::any_of(exact.outcomes.begin(), exact.outcomes.end(),
                    [&](const ExactOutcome& outcome) {
                      return MetricKey{outcome.metrics.l1,
                                       outcome.metrics.n_norm_min,
                                       outcome.metrics.n_norm_avg} == key;
                    });
    CHECK(known);
    observed_total += static_cast<double>(count);
  }
  CHECK(observed_total == static_cast<double>(matrix.trials()));

  for (const ExactOutcome& outcome : exact.outcomes) {
    const MetricKey key = {outcome.metrics.l1, outcome.metrics.n_norm_min,
                           outcome.metrics.n_norm_avg};
    const auto found = observed.find(key);
    const double frequency =
        found == observed.end()
            ? 0.0
            : static_cast<double>(found->second) /
                  static_cast<double>(matrix.trials());
    CHECK(std::abs(frequency - outcome.probability) <= 0.01);
  }

  // Monte-Carlo means within 3 standard errors of the exact means.
  const auto check_mean = [&](const std::vector<double>& values,
                              double exact_mean) {
    double sum = 0.0;
    for (const double v : values) {
      sum += v;
    }
    const double mean = sum / static_cast<double>(values.size());
    double var = 0.0;
    for (const double v : values) {
      var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(values.size() - 1);
    const double standard_error =
        std::sqrt(var / static_cast<double>(values.size()));
    CHECK(std::abs(mean - exact_mean) <= 3.0 * standard_error + 1e-12);
  };
  check_mean(matrix.l1, exact.mean_l1);
  check_mean(matrix.n_norm_min, exact.mean_n_norm_min);
  check_mean(matrix.n_norm_avg, exact.mean_n_norm_avg);
}

}  // namespace

TEST_CASE("run_trials forces one trial for the deterministic sampler") {
  F1Setup f1;
  const TrialMatrix matrix = run_trials(f1.index, f1.freq, f1.inverted,
                                        Method::monspec, 2, 1000000, 5);
  CHECK(matrix.trials() == 1);
  const ExactDistribution exact =
      enumerate_exact(f1.index, f1.freq, f1.inverted, Method::monspec, 2);
  REQUIRE(exact.outcomes.size() == 1);
  CHECK(exact.outcomes[0].probability == 1.0);
  CHECK(matrix.l1[0] == exact.outcomes[0].metrics.l1);
}

TEST_CASE("run_trials is a pure function of its arguments") {
  F1Setup f1;
  const TrialMatrix a =
      run_trials(f1.index, f1.freq, f1.inverted, Method::random, 2, 5000, 7);
  const TrialMatrix b =
      run_trials(f1.index, f1.freq, f1.inverted, Method::random, 2, 5000, 7);
  CHECK(a.l1 == b.l1);
  CHECK(a.n_norm_min == b.n_norm_min);
  CHECK(a.n_norm_avg == b.n_norm_avg);

  const TrialMatrix other =
      run_trials(f1.index, f1.freq, f1.inverted, Method::random, 2, 5000, 8);
  CHECK(a.l1 != other.l1);
}

TEST_CASE("run_trials output does not depend on the worker count") {
  SyntheticConfig config;
  config.num_classes = 5;
  config.num_samples = 400;
  config.seed = 77;
  const DatasetIndex index = generate_synthetic(config);
  const ClassFrequencies freq = dataset_frequencies(index);
  const InvertedIndex inverted = build_inverted_index(index);

  for (const Method method : {Method::random, Method::per_class}) {
    const TrialMatrix one =
        run_trials(index, freq, inverted, method, 40, 2000, 13, 1);
    const TrialMatrix two =
        run_trials(index, freq, inverted, method, 40, 2000, 13, 2);
    const TrialMatrix eight =
        run_trials(index, freq, inverted, method, 40, 2000, 13, 8);
    CHECK(one.l1 == two.l1);
    CHECK(one.l1 == eight.l1);
    CHECK(one.n_norm_min == eight.n_norm_min);
    CHECK(one.n_norm_avg == eight.n_norm_avg);
  }
}

TEST_CASE("each trial reproduces the public sampler seeded with "
          "mix_seed(master, trial)") {
  F1Setup f1;
  const std::uint64_t master = 99;

  SUBCASE("random") {
    const TrialMatrix matrix = run_trials(f1.index, f1.freq, f1.inverted,
                                          Method::random, 3, 10, master, 2);
    for (std::int64_t t = 0; t < matrix.trials(); ++t) {
      const Subset subset = sample_random(
          f1.index, 3, mix_seed(master, static_cast<std::uint64_t>(t)));
      const SubsetStats stats = subset_stats(f1.index, f1.freq, subset);
      const auto slot = static_cast<std::size_t>(t);
      CHECK(matrix.l1[slot] == stats.l1);
      CHECK(matrix.n_norm_min[slot] == stats.n_norm_min);
      CHECK(matrix.n_norm_avg[slot] == stats.n_norm_avg);
    }
  }
  SUBCASE("per-class") {
    const QuotaVector quotas = quota_per_class(2, f1.freq);
    const TrialMatrix matrix = run_trials(f1.index, f1.freq, f1.inverted,
                                          Method::per_class, 2, 10, master, 2);
    for (std::int64_t t = 0; t < matrix.trials(); ++t) {
      const Subset subset =
          sample_per_class(f1.index, f1.inverted, quotas,
                           mix_seed(master, static_cast<std::uint64_t>(t)));
      const SubsetStats stats = subset_stats(f1.index, f1.freq, subset);
      CHECK(matrix.l1[static_cast<std::size_t>(t)] == stats.l1);
    }
  }
}

TEST_CASE("summarize applies the rank p*(count-1) interpolation convention") {
  SUBCASE("textbook five values") {
    const std::vector<double> values = {5, 4, 3, 2, 1};
    const DistributionSummary s = summarize(values, "x");
    CHECK(s.min == 1.0);
    CHECK(s.q1 == 2.0);
    CHECK(s.median == 3.0);
    CHECK(s.q3 == 4.0);
    CHECK(s.max == 5.0);
    CHECK(s.mean == 3.0);
    CHECK(s.count == 5);
  }
  SUBCASE("single value") {
    const std::vector<double> values = {7.5};
    const DistributionSummary s = summarize(values, "x");
    CHECK(s.min == 7.5);
    CHECK(s.q1 == 7.5);
    CHECK(s.median == 7.5);
    CHECK(s.q3 == 7.5);
    CHECK(s.max == 7.5);
  }
  SUBCASE("two values interpolate") {
    const std::vector<double> values = {0, 10};
    const DistributionSummary s = summarize(values, "x");
    CHECK(s.q1 == 2.5);
    CHECK(s.median == 5.0);
    CHECK(s.q3 == 7.5);
  }
  SUBCASE("empty input throws") {
    const std::vector<double> none;
    CHECK_THROWS_AS(summarize(none, "x"), ValidationError);
  }
}

TEST_CASE("summary whiskers span the exact range") {
  SplitMix64 rng(31337);
  std::vector<double> values(997);
  for (double& v : values) {
    v = rng.unit_positive() * 10.0 - 5.0;
  }
  const DistributionSummary s = summarize(values, "x");
  CHECK(s.min == *std::min_element(values.begin(), values.end()));
  CHECK(s.max == *std::max_element(values.begin(), values.end()));
  CHECK(s.min <= s.q1);
  CHECK(s.q1 <= s.median);
  CHECK(s.median <= s.q3);
  CHECK(s.q3 <= s.max);
}

TEST_CASE("exceedance counts strictly-below values") {
  const std::vector<double> above = {1.0, 1.5, 2.0};
  CHECK(exceedance(above, 1.0) == 0.0);
  const std::vector<double> half = {0.5, 1.5};
  CHECK(exceedance(half, 1.0) == 0.5);
  const std::vector<double> none;
  CHECK_THROWS_AS(exceedance(none, 1.0), ValidationError);
}

TEST_CASE("enumerate_exact lists all six N=2 outcomes of F1 at 1/6") {
  F1Setup f1;
  const ExactDistribution exact =
      enumerate_exact(f1.index, f1.freq, f1.inverted, Method::random, 2);
  REQUIRE(exact.outcomes.size() == 6);
  double total = 0.0;
  for (const ExactOutcome& outcome : exact.outcomes) {
    CHECK(outcome.probability == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    total += outcome.probability;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  // L1 values of the six pairs, sorted; 7/26 appears twice.
  std::vector<double> l1_values;
  for (const ExactOutcome& outcome : exact.outcomes) {
    l1_values.push_back(outcome.metrics.l1);
  }
  std::sort(l1_values.begin(), l1_values.end());
  const std::vector<double> expected = {14.0 / 117.0, 7.0 / 26.0, 7.0 / 26.0,
                                        28.0 / 65.0,  27.0 / 52.0, 54.0 / 65.0};
  REQUIRE(l1_values.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(l1_values[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  }
  CHECK(exact.mean_l1 == doctest::Approx(0.4064814814814815).epsilon(1e-9));
}

TEST_CASE("enumerate_exact degenerate cases") {
  F1Setup f1;
  SUBCASE("N = D has a single zero-distance outcome") {
    const ExactDistribution exact =
        enumerate_exact(f1.index, f1.freq, f1.inverted, Method::random, 4);
    REQUIRE(exact.outcomes.size() == 1);
    CHECK(exact.outcomes[0].probability == 1.0);
    CHECK(std::abs(exact.outcomes[0].metrics.l1) <= 1e-12);
  }
  SUBCASE("monspec is a point mass matching sample_monspec") {
    const ExactDistribution exact =
        enumerate_exact(f1.index, f1.freq, f1.inverted, Method::monspec, 2);
    REQUIRE(exact.outcomes.size() == 1);
    const Subset subset =
        sample_monspec(f1.index, f1.inverted, quota_per_class(2, f1.freq));
    const SubsetStats stats = subset_stats(f1.index, f1.freq, subset);
    CHECK(exact.outcomes[0].metrics.l1 == stats.l1);
    CHECK(exact.outcomes[0].metrics.n_norm_min == stats.n_norm_min);
  }
}

TEST_CASE("enumerate_exact merges per-class selections with equal metrics") {
  F1Setup f1;
  // quotas (1,1): 3 x 3 selections, but (car s2, ped s4) and (car s4, ped
  // s2) produce the same counts (6,2), so 8 distinct outcomes remain.
  const ExactDistribution exact =
      enumerate_exact(f1.index, f1.freq, f1.inverted, Method::per_class, 2);
  REQUIRE(exact.outcomes.size() == 8);
  double total = 0.0;
  int merged = 0;
  for (const ExactOutcome& outcome : exact.outcomes) {
    total += outcome.probability;
    if (outcome.probability == doctest::Approx(2.0 / 9.0).epsilon(1e-12)) {
      ++merged;
    } else {
      CHECK(outcome.probability ==
            doctest::Approx(1.0 / 9.0).epsilon(1e-12));
    }
  }
  CHECK(merged == 1);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enumerate_exact refuses infeasible state spaces and reports the "
          "bound") {
  SyntheticConfig config;
  config.num_classes = 3;
  config.num_samples = 30;
  config.seed = 3;
  const DatasetIndex index = generate_synthetic(config);
  const ClassFrequencies freq = dataset_frequencies(index);
  const InvertedIndex inverted = build_inverted_index(index);
  CHECK_THROWS_WITH_AS(
      enumerate_exact(index, freq, inverted, Method::random, 15),
      doctest::Contains("exceeds"), ValidationError);
}

TEST_CASE("Monte-Carlo frequencies agree with exact enumeration") {
  F1Setup f1;
  SUBCASE("random") {
    check_oracle_agreement(f1, Method::random, 2, 100000, 2025);
  }
  SUBCASE("per-class") {
    check_oracle_agreement(f1, Method::per_class, 2, 100000, 2026);
  }
}

TEST_CASE("F1 random N=2 Monte-Carlo mean L1 approaches 0.406481") {
  F1Setup f1;
  const TrialMatrix matrix = run_trials(f1.index, f1.freq, f1.inverted,
                                        Method::random, 2, 100000, 314);
  double sum = 0.0;
  for (const double v : matrix.l1) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(matrix.trials());
  CHECK(std::abs(mean - 0.406481) <= 0.005);
}

TEST_CASE("summaries are stable when the trial count doubles") {
  SyntheticConfig config;
  config.num_classes = 5;
  config.num_samples = 200;
  config.mean_objects_per_sample = 8.0;
  config.seed = 3;
  const DatasetIndex index = generate_synthetic(config);
  const ClassFrequencies freq = dataset_frequencies(index);
  const InvertedIndex inverted = build_inverted_index(index);

  const TrialMatrix base =
      run_trials(index, freq, inverted, Method::random, 20, 20000, 51);
  const TrialMatrix doubled =
      run_trials(index, freq, inverted, Method::random, 20, 40000, 51);
  const auto check_metric = [&](const std::vector<double>& a,
                                const std::vector<double>& b) {
    const DistributionSummary sa = summarize(a, "m");
    const DistributionSummary sb = summarize(b, "m");
    const double iqr = sa.q3 - sa.q1;
    CHECK(std::abs(sa.median - sb.median) < iqr);
  };
  check_metric(base.l1, doubled.l1);
  check_metric(base.n_norm_min, doubled.n_norm_min);
  check_metric(base.n_norm_avg, doubled.n_norm_avg);
}

TEST_CASE("per-class shortfalls are tallied across trials") {
  const DatasetIndex index = testfix::make_f1();
  const ClassFrequencies freq = dataset_frequencies(index);
  const InvertedIndex inverted = build_inverted_index(index);
  // N=8 gives quotas (4,4) but each class has only 3 candidates.
  const TrialMatrix matrix =
      run_trials(index, freq, inverted, Method::per_class, 8, 10, 1);
  CHECK(matrix.shortfall_warnings == 2 * 10);
}

TEST_CASE("bench_sampler reports consistent extremes") {
  SyntheticConfig config;
  config.num_classes = 4;
  config.num_samples = 500;
  config.seed = 8;
  const DatasetIndex index = generate_synthetic(config);
  const ClassFrequencies freq = dataset_frequencies(index);
  const InvertedIndex inverted = build_inverted_index(index);

  for (const Method method :
       {Method::random, Method::per_class, Method::monspec}) {
    const BenchResult result =
        bench_sampler(index, freq, inverted, method, 50, 50);
    CHECK(result.runs == 50);
    CHECK(result.min_ms <= result.mean_ms);
    CHECK(result.mean_ms <= result.max_ms);
    CHECK(result.min_ms >= 0.0);
  }

  const BenchResult single =
      bench_sampler(index, freq, inverted, Method::random, 50, 1);
  CHECK(single.min_ms == single.mean_ms);
  CHECK(single.mean_ms == single.max_ms);
}

TEST_CASE("report CSV has the pinned schema and one exceedance row per cell") {
  F1Setup f1;
  MonteCarloReport report;
  report.cells.push_back(analyze_cell(f1.index, f1.freq, f1.inverted,
                                      Method::random, 0.5, 2, 2000, 10));
  report.cells.push_back(analyze_cell(f1.index, f1.freq, f1.inverted,
                                      Method::monspec, 0.5, 2, 2000, 10));
  std::ostringstream out;
  write_report_csv(report, out);

  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,fraction,N,trials,metric,min,q1,median,q3,max,mean");
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    rows.push_back(line);
  }
  REQUIRE(rows.size() == 8);  // two cells x (3 metrics + exceedance)
  CHECK(rows[0].find("random,0.5,2,2000,l1,") == 0);
  CHECK(rows[3].find("random,0.5,2,2000,p_n_norm_min_below_1,,,,,,") == 0);
  // monspec runs one trial and its summary collapses to a point.
  CHECK(rows[4].find("monspec,0.5,2,1,l1,") == 0);
  const DistributionSummary& mono = report.cells[1].l1;
  CHECK(mono.min == mono.max);
  CHECK(mono.q1 == mono.q3);
  CHECK(mono.median == mono.mean);
}
