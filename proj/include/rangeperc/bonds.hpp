// SPDX-License-Identifier: Apache-2.0
//
// Lazily evaluated bond variables. A bond is never stored: its uniform is a
// hash of (master_seed, trial_index, edge), and it is open iff that uniform
// is below p. Sharing an oracle across values of p therefore couples the
// percolation configurations monotonically.
//
// Edge packing (64-bit words, coordinates two's complement):
//   w0  = u32(base[0]) | u32(base[1]) << 32
//   w1  = u32(base[2]) | (delta[0]+512) << 32 | (delta[1]+512) << 42
//                      | (delta[2]+512) << 52
//   key = mix(mix(seed ^ K0) ^ trial)
//   h   = mix(mix(key ^ w0) ^ w1)
//   uniform01 = (h >> 11) * 2^-53
// with mix the splitmix64 finalizer and K0 the constant in bonds.cpp. Delta
// components fit the 10-bit fields because R <= 511.

#pragma once

#include <cstdint>
#include <span>

#include "rangeperc/lattice.hpp"
#include "rangeperc/rng.hpp"

namespace rangeperc {

inline std::uint64_t pack_base(const Site& base) {
  return std::uint64_t{static_cast<std::uint32_t>(base.c[0])} |
         (std::uint64_t{static_cast<std::uint32_t>(base.c[1])} << 32);
}

inline std::uint64_t pack_delta(const Offset& delta) {
  return (std::uint64_t(delta.c[0] + 512) << 32) | (std::uint64_t(delta.c[1] + 512) << 42) |
         (std::uint64_t(delta.c[2] + 512) << 52);
}

inline std::uint64_t edge_hash(std::uint64_t trial_key, const EdgeKey& e) {
  const std::uint64_t w1 = std::uint64_t{static_cast<std::uint32_t>(e.base.c[2])} | pack_delta(e.delta);
  return mix64(mix64(trial_key ^ pack_base(e.base)) ^ w1);
}

class BondOracle {
 public:
  BondOracle(std::uint64_t master_seed, std::uint64_t trial_index, double p);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t trial_index() const { return trial_index_; }
  double p() const { return p_; }

  /// Same randomness, different threshold.
  BondOracle with_p(double p) const { return BondOracle(master_seed_, trial_index_, p); }

  double uniform01(const EdgeKey& e) const { return to_unit(edge_hash(trial_key_, e)); }
  bool bond(const EdgeKey& e) const { return uniform01(e) < p_; }

  /// Endpoint form; x and y must be adjacent (unchecked).
  bool bond(const Site& x, const Site& y) const { return bond(canonical_edge(x, y)); }

  std::uint64_t trial_key() const { return trial_key_; }

  /// Calls fn(y) for every neighbour y = x + delta whose bond with x is
  /// open. Equivalent to testing bond(x, y) for each delta in order, with the
  /// base-endpoint half of the hash shared across the positive deltas.
  template <typename Fn>
  void for_each_open(const Site& x, std::span<const Offset> deltas, Fn&& fn) const {
    const std::uint64_t from_x = mix64(trial_key_ ^ pack_base(x));
    const std::uint64_t x2 = static_cast<std::uint32_t>(x.c[2]);
    for (const auto& delta : deltas) {
      Site y;
      for (int i = 0; i < kMaxDim; ++i) y.c[i] = x.c[i] + delta.c[i];
      std::uint64_t h;
      if (x < y) {
        h = mix64(from_x ^ (x2 | pack_delta(delta)));
      } else {
        const Offset back{{-delta.c[0], -delta.c[1], -delta.c[2]}};
        h = mix64(mix64(trial_key_ ^ pack_base(y)) ^
                  (std::uint64_t{static_cast<std::uint32_t>(y.c[2])} | pack_delta(back)));
      }
      if (to_unit(h) < p_) fn(y);
    }
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t trial_index_;
  double p_;
  std::uint64_t trial_key_;
};

}  // namespace rangeperc
