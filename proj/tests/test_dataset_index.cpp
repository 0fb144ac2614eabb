#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "subsetforge/dataset_index.hpp"

using namespace subsetforge;

TEST_CASE("load_index parses the F1 fixture") {
  const DatasetIndex index = testfix::make_f1();
  CHECK(index.num_samples() == 4);
  CHECK(index.num_classes() == 2);
  CHECK(index.class_names() == std::vector<std::string>{"car", "ped"});
  CHECK(index.sample_id(0) == "s1");
  CHECK(index.sample_id(3) == "s4");
  // Missing class keys densify to zero.
  CHECK(index.count(0, 0) == 2);
  CHECK(index.count(0, 1) == 0);
  CHECK(index.count(2, 0) == 0);
  CHECK(index.count(2, 1) == 3);
  CHECK(index.total_objects() == 13);
}

TEST_CASE("load_index skips comments and blank lines") {
  std::istringstream in(
      "# header comment\n"
      "\n"
      "{\"sample_id\": \"a\", \"counts\": {\"x\": 1}}\n"
      "   \n"
      "# trailing comment\n");
  const DatasetIndex index = load_index(in);
  CHECK(index.num_samples() == 1);
  CHECK(index.total_objects() == 1);
}

TEST_CASE("load_index rejects duplicate sample ids by name") {
  std::istringstream in(
      "{\"sample_id\": \"s1\", \"counts\": {\"car\": 1}}\n"
      "{\"sample_id\": \"s1\", \"counts\": {\"car\": 2}}\n");
  CHECK_THROWS_WITH_AS(load_index(in),
                       doctest::Contains("duplicate sample_id \"s1\""),
                       ValidationError);
}

TEST_CASE("load_index reports line numbers for bad counts") {
  SUBCASE("negative count") {
    std::istringstream in(
        "{\"sample_id\": \"s1\", \"counts\": {\"car\": 1}}\n"
        "{\"sample_id\": \"s2\", \"counts\": {\"car\": -1}}\n");
    CHECK_THROWS_WITH_AS(load_index(in), doctest::Contains("line 2"),
                         ValidationError);
  }
  SUBCASE("non-integer count") {
    std::istringstream in(
        "{\"sample_id\": \"s1\", \"counts\": {\"car\": 1.5}}\n");
    CHECK_THROWS_WITH_AS(load_index(in), doctest::Contains("non-integer"),
                         ValidationError);
  }
  SUBCASE("malformed json") {
    std::istringstream in("{\"sample_id\": \"s1\", \n");
    CHECK_THROWS_WITH_AS(load_index(in), doctest::Contains("line 1"),
                         ValidationError);
  }
}

TEST_CASE("load_index rejects empty and zero-object inputs") {
  SUBCASE("no records") {
    std::istringstream in("# only a comment\n");
    CHECK_THROWS_AS(load_index(in), ValidationError);
  }
  SUBCASE("zero objects in total") {
    std::istringstream in("{\"sample_id\": \"s1\", \"counts\": {\"car\": 0}}\n");
    CHECK_THROWS_WITH_AS(load_index(in), doctest::Contains("zero objects"),
                         ValidationError);
  }
}

TEST_CASE("dataset_frequencies on F1") {
  const DatasetIndex index = testfix::make_f1();
  const ClassFrequencies freq = dataset_frequencies(index);
  CHECK(freq.per_class == std::vector<std::int64_t>{8, 5});
  CHECK(freq.total == 13);
  CHECK(freq.p_dataset[0] == doctest::Approx(8.0 / 13.0).epsilon(1e-15));
  CHECK(freq.p_dataset[1] == doctest::Approx(5.0 / 13.0).epsilon(1e-15));

  const double sum =
      std::accumulate(freq.p_dataset.begin(), freq.p_dataset.end(), 0.0);
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("dataset_frequencies degenerate cases") {
  SUBCASE("single sample, single class") {
    std::istringstream in("{\"sample_id\": \"a\", \"counts\": {\"x\": 1}}\n");
    const ClassFrequencies freq = dataset_frequencies(load_index(in));
    CHECK(freq.per_class == std::vector<std::int64_t>{1});
    CHECK(freq.total == 1);
    CHECK(freq.p_dataset[0] == 1.0);
  }
  SUBCASE("two classes with equal totals") {
    std::istringstream in(
        "{\"sample_id\": \"a\", \"counts\": {\"x\": 3, \"y\": 1}}\n"
        "{\"sample_id\": \"b\", \"counts\": {\"y\": 2}}\n");
    const ClassFrequencies freq = dataset_frequencies(load_index(in));
    CHECK(freq.p_dataset[0] == 0.5);
    CHECK(freq.p_dataset[1] == 0.5);
  }
}

TEST_CASE("build_inverted_index on F1") {
  const DatasetIndex index = testfix::make_f1();
  const InvertedIndex inverted = build_inverted_index(index);
  REQUIRE(inverted.lists.size() == 2);
  CHECK(inverted.lists[0] == std::vector<std::uint32_t>{0, 1, 3});  // car
  CHECK(inverted.lists[1] == std::vector<std::uint32_t>{1, 2, 3});  // ped
}

TEST_CASE("inverted index ignores all-zero samples and stays consistent") {
  const DatasetIndex index = testfix::make_f1_with_empty_sample();
  const InvertedIndex inverted = build_inverted_index(index);
  const ClassFrequencies freq = dataset_frequencies(index);
  for (std::int64_t k = 0; k < index.num_classes(); ++k) {
    const auto& list = inverted.lists[static_cast<std::size_t>(k)];
    // Membership is exactly "count >= 1", each ordinal at most once.
    for (std::size_t i = 0; i < list.size(); ++i) {
      CHECK(index.count(list[i], k) >= 1);
      if (i > 0) {
        CHECK(list[i - 1] < list[i]);
      }
      CHECK(list[i] != 4);  // the empty sample
    }
    for (std::int64_t o = 0; o < index.num_samples(); ++o) {
      const bool listed =
          std::find(list.begin(), list.end(), static_cast<std::uint32_t>(o)) !=
          list.end();
      CHECK(listed == (index.count(o, k) >= 1));
    }
    CHECK(static_cast<std::int64_t>(list.size()) <= index.num_samples());
    CHECK(freq.per_class[static_cast<std::size_t>(k)] >=
          static_cast<std::int64_t>(list.size()));
  }
}

TEST_CASE("save/load round-trip preserves the index") {
  const DatasetIndex original = testfix::make_f1();
  std::ostringstream out;
  save_index(original, out);
  std::istringstream in(out.str());
  const DatasetIndex reloaded = load_index(in);
  CHECK(reloaded == original);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticConfig config;
  config.num_classes = 6;
  config.num_samples = 500;
  config.seed = 42;
  const DatasetIndex a = generate_synthetic(config);
  const DatasetIndex b = generate_synthetic(config);
  CHECK(a == b);

  std::ostringstream text_a;
  std::ostringstream text_b;
  save_index(a, text_a);
  save_index(b, text_b);
  CHECK(text_a.str() == text_b.str());

  config.seed = 43;
  CHECK_FALSE(generate_synthetic(config) == a);
}

TEST_CASE("synthetic index round-trips through the external format") {
  SyntheticConfig config;
  config.num_classes = 4;
  config.num_samples = 200;
  config.seed = 9;
  const DatasetIndex original = generate_synthetic(config);
  std::ostringstream out;
  save_index(original, out);
  std::istringstream in(out.str());
  CHECK(load_index(in) == original);
}

TEST_CASE("synthetic single-class index puts everything in class 1") {
  SyntheticConfig config;
  config.num_classes = 1;
  config.num_samples = 5;
  config.seed = 7;
  const DatasetIndex index = generate_synthetic(config);
  const ClassFrequencies freq = dataset_frequencies(index);
  CHECK(freq.p_dataset == std::vector<double>{1.0});
}

TEST_CASE("synthetic class popularity follows the configured power law") {
  SyntheticConfig config;  // C=10, D=28310, tail 1.5, mean 35, seed 1
  const DatasetIndex index = generate_synthetic(config);
  CHECK(index.num_samples() == 28310);
  CHECK(index.num_classes() == 10);
  CHECK(index.sample_id(0) == "synth-000001");

  const ClassFrequencies freq = dataset_frequencies(index);
  // Sorted descending by construction: class 1 is the heaviest.
  for (std::size_t k = 1; k < freq.p_dataset.size(); ++k) {
    CHECK(freq.p_dataset[k - 1] > freq.p_dataset[k]);
  }
  const double ratio = freq.p_dataset.front() / freq.p_dataset.back();
  const double expected = std::pow(10.0, 1.5);
  CHECK(ratio > expected / 2.0);
  CHECK(ratio < expected * 2.0);

  // Every class occurs in at least one sample.
  const InvertedIndex inverted = build_inverted_index(index);
  for (const auto& list : inverted.lists) {
    CHECK_FALSE(list.empty());
  }
}

TEST_CASE("synthetic generator rejects non-positive parameters") {
  SyntheticConfig config;
  config.num_classes = 0;
  CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
  config.num_classes = 3;
  config.tail_exponent = -1.0;
  CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
  config.tail_exponent = 1.5;
  config.mean_objects_per_sample = 0.0;
  CHECK_THROWS_AS(generate_synthetic(config), ValidationError);
}
