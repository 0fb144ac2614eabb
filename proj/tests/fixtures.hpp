// Shared test fixtures. F1 is the four-sample, two-class index used across
// the suites:
//   s1 {car:2}  s2 {car:1, ped:1}  s3 {ped:3}  s4 {car:5, ped:1}
// so classes = [car, ped], D = 4, d_k = (8, 5), d = 13.
#pragma once

#include <sstream>
#include <string>

#include "subsetforge/dataset_index.hpp"

namespace testfix {

inline const char* kF1Text =
    "{\"sample_id\": \"s1\", \"counts\": {\"car\": 2}}\n"
    "{\"sample_id\": \"s2\", \"counts\": {\"car\": 1, \"ped\": 1}}\n"
    "{\"sample_id\": \"s3\", \"counts\": {\"ped\": 3}}\n"
    "{\"sample_id\": \"s4\", \"counts\": {\"car\": 5, \"ped\": 1}}\n";

inline subsetforge::DatasetIndex make_f1() {
  std::istringstream in(kF1Text);
  return subsetforge::load_index(in);
}

// F1 plus a fifth sample with no objects at all; the zero sample sits at
// ordinal 4 and belongs to no inverted-index list.
inline subsetforge::DatasetIndex make_f1_with_empty_sample() {
  std::istringstream in(std::string(kF1Text) +
                        "{\"sample_id\": \"s5\", \"counts\": {}}\n");
  return subsetforge::load_index(in);
}

}  // namespace testfix
