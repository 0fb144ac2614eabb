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
#include <utility>
#include <vector>

#include "subsetforge/rng.hpp"

namespace subsetforge::detail {

// Uniform draw of `take` elements without replacement via a partial
// Fisher-Yates shuffle of pool's prefix, visiting each drawn element in
// draw order. When `undo` is given, the swaps are reversed afterwards so
// the pool returns to its prior state; the Monte-Carlo engine relies on
// this to reuse one pool across trials in O(take) per trial. Both callers
// consume the RNG identically, so a trial drawn here matches the public
// sampler bit for bit.
template <typename Visit>
void draw_without_replacement(std::vector<std::uint32_t>& pool,
                              std::int64_t take, SplitMix64& rng,
                              std::vector<std::uint32_t>* undo,
                              Visit&& visit) {
  const auto pool_size = static_cast<std::uint64_t>(pool.size());
  if (undo != nullptr) {
    undo->clear();
  }
  for (std::int64_t i = 0; i < take; ++i) {
    const std::uint64_t j =
        static_cast<std::uint64_t>(i) +
        rng.bounded(pool_size - static_cast<std::uint64_t>(i));
    if (undo != nullptr) {
      undo->push_back(static_cast<std::uint32_t>(j));
    }
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
    visit(pool[static_cast<std::size_t>(i)]);
  }
  if (undo != nullptr) {
    for (std::int64_t i = take - 1; i >= 0; --i) {
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[(*undo)[static_cast<std::size_t>(i)]]);
    }
  }
}

}  // namespace subsetforge::detail
