#pragma once

#include <cstdint>
#include <random>

namespace hdapprox {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 0x5eed2021;

// Independent sub-streams of one master seed. The numeric tags are part of
// the model-reproducibility contract; never renumber them.
enum class Stream : std::uint32_t {
  levels = 1,
  ids = 2,
  tie_stage1 = 3,
  tie_stage2 = 4,
  split = 5,
  shuffle = 6,
  synthetic = 7,
};

// Seeds a generator from (master_seed, stream, salt) through std::seed_seq.
Rng make_stream(std::uint64_t master_seed, Stream stream, std::uint32_t salt = 0);

}  // namespace hdapprox
