#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace polybreak {

using Engine = std::mt19937_64;

/// Independent generator for one task, derived deterministically from a
/// master seed and a list of integer tags (sample size, replication index,
/// half, ...). Streams for distinct tag lists are statistically unrelated and
/// do not depend on the order in which tasks run.
inline Engine derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * tags.size());
  const auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (auto t : tags) push(t);
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

}  // namespace polybreak
