// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <limits>
#include <set>

#include "rangeperc/lattice.hpp"

using namespace rangeperc;

namespace {
Site site(int a, int b = 0, int c = 0) { return Site{{a, b, c}}; }
}  // namespace

TEST_CASE("neighbourhood size is (2R+1)^d - 1") {
  CHECK(LatticeParams(1, 1).volume() == 2);
  CHECK(LatticeParams(2, 1).volume() == 8);
  CHECK(LatticeParams(2, 4).volume() == 80);
  CHECK(LatticeParams(3, 2).volume() == 124);
  CHECK(LatticeParams(3, 4).scale() == 16);
  CHECK(LatticeParams(1, 7).scale() == 1);
  for (int d = 1; d <= 3; ++d) {
    for (int R : {1, 2, 3}) {
      const LatticeParams p(d, R);
      CHECK(static_cast<std::int64_t>(p.displacements().size()) == p.volume());
    }
  }
}

TEST_CASE("invalid lattice parameters") {
  CHECK_THROWS_AS(LatticeParams(0, 1), LatticeError);
  CHECK_THROWS_AS(LatticeParams(4, 1), LatticeError);
  CHECK_THROWS_AS(LatticeParams(2, 0), LatticeError);
  CHECK_THROWS_AS(LatticeParams(2, kMaxRange + 1), LatticeError);
  CHECK_NOTHROW(LatticeParams(1, kMaxRange));
}

TEST_CASE("displacements are distinct, sorted, nonzero and within range") {
  const LatticeParams p(3, 2);
  const auto deltas = p.displacements();
  CHECK(std::is_sorted(deltas.begin(), deltas.end()));
  CHECK(std::adjacent_find(deltas.begin(), deltas.end()) == deltas.end());
  for (const auto& d : deltas) {
    CHECK(linf_norm(d) >= 1);
    CHECK(linf_norm(d) <= 2);
  }
}

TEST_CASE("adjacency is symmetric sup-norm adjacency") {
  const LatticeParams p(2, 3);
  CHECK(adjacent(site(0, 0), site(3, -3), p));
  CHECK(adjacent(site(3, -3), site(0, 0), p));
  CHECK_FALSE(adjacent(site(0, 0), site(4, 0), p));
  CHECK_FALSE(adjacent(site(1, 1), site(1, 1), p));
  const auto nb = neighbors(site(5, 5), p);
  CHECK(nb.size() == 48);
  for (const auto& y : nb) CHECK(adjacent(site(5, 5), y, p));
}

TEST_CASE("edge keys are canonical and injective on a patch") {
  const LatticeParams p(2, 2);
  CHECK(edge_key(site(0, 0), site(1, 2), p) == edge_key(site(1, 2), site(0, 0), p));
  CHECK_THROWS_AS(edge_key(site(0, 0), site(0, 0), p), LatticeError);
  CHECK_THROWS_AS(edge_key(site(0, 0), site(3, 0), p), LatticeError);

  // Every unordered adjacent pair inside a 5x5 patch maps to its own key.
  std::vector<Site> patch;
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) patch.push_back(site(a, b));
  }
  std::set<EdgeKey> keys;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    for (std::size_t j = i + 1; j < patch.size(); ++j) {
      if (!adjacent(patch[i], patch[j], p)) continue;
      ++pairs;
      const EdgeKey e = edge_key(patch[i], patch[j], p);
      CHECK(e == canonical_edge(patch[j], patch[i]));
      keys.insert(e);
    }
  }
  CHECK(pairs > 0);
  CHECK(static_cast<std::int64_t>(keys.size()) == pairs);
}

TEST_CASE("translate detects overflow") {
  Site far = site(std::numeric_limits<std::int32_t>::max());
  CHECK_THROWS_AS(translate(far, Offset{{1, 0, 0}}), LatticeError);
  CHECK(translate(site(1, 2), Offset{{-1, 1, 0}}) == site(0, 3));
}

TEST_CASE("box is closed and exits are strict") {
  const Box box(2.0);
  CHECK(box.contains(site(2, -2)));
  CHECK_FALSE(box.contains(site(3, 0)));
  std::vector<std::vector<Site>> trace{{site(0, 0)}, {site(2, 2)}};
  CHECK_FALSE(box_exits(trace, box));
  trace.push_back({site(-3, 0)});
  CHECK(box_exits(trace, box));
  CHECK_THROWS_AS(Box(-1.0), LatticeError);
}
