// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/bonds.hpp"

#include <stdexcept>

namespace rangeperc {

namespace {
constexpr std::uint64_t kSeedSalt = 0xa4093822299f31d0ULL;  // K0
}  // namespace

BondOracle::BondOracle(std::uint64_t master_seed, std::uint64_t trial_index, double p)
    : master_seed_(master_seed),
      trial_index_(trial_index),
      p_(p),
      trial_key_(mix64(mix64(master_seed ^ kSeedSalt) ^ trial_index)) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bond probability must be in [0, 1]");
}

}  // namespace rangeperc
