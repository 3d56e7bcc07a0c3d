// SPDX-License-Identifier: Apache-2.0
//
// Geometry of the range-R lattice. Sites are stored in R-scaled integer
// coordinates: the point x of Z^d/R is held as R*x in Z^d, and two sites are
// adjacent iff 0 < ||x - y||_inf <= R.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rangeperc {

inline constexpr int kMaxDim = 3;
inline constexpr int kMaxRange = 511;

class LatticeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Displacement between two sites. Unused trailing axes are zero.
struct Offset {
  std::array<std::int32_t, kMaxDim> c{};

  friend bool operator==(const Offset&, const Offset&) = default;
  friend auto operator<=>(const Offset&, const Offset&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const Offset& o) {
    return H::combine(std::move(h), o.c[0], o.c[1], o.c[2]);
  }
};

/// Lattice site in R-scaled coordinates. Unused trailing axes are zero.
struct Site {
  std::array<std::int32_t, kMaxDim> c{};

  static Site origin() { return Site{}; }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site&, const Site&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const Site& s) {
    return H::combine(std::move(h), s.c[0], s.c[1], s.c[2]);
  }
};

/// Adds a displacement, failing if a coordinate would leave int32 range.
Site translate(const Site& x, const Offset& delta);

/// to - from; callers guarantee the result fits (adjacent or nearby sites).
inline Offset difference(const Site& to, const Site& from) {
  Offset o;
  for (int i = 0; i < kMaxDim; ++i) o.c[i] = to.c[i] - from.c[i];
  return o;
}

std::int64_t linf_norm(const Site& x);
std::int64_t linf_norm(const Offset& delta);

std::string to_string(const Site& x, int d);

/// Dimension, range and the derived neighbourhood size V = (2R+1)^d - 1.
///
/// The displacement table is built once and shared between copies; it lists
/// every offset with 0 < ||delta||_inf <= R in lexicographic order.
class LatticeParams {
 public:
  LatticeParams(int d, int range);

  int dim() const { return d_; }
  int range() const { return range_; }
  std::int64_t volume() const { return volume_; }
  /// R^(d-1), the time and mass scale of the near-critical regime.
  std::int64_t scale() const { return scale_; }
  std::span<const Offset> displacements() const { return *displacements_; }

  friend bool operator==(const LatticeParams& a, const LatticeParams& b) {
    return a.d_ == b.d_ && a.range_ == b.range_;
  }

 private:
  int d_;
  int range_;
  std::int64_t volume_;
  std::int64_t scale_;
  std::shared_ptr<const std::vector<Offset>> displacements_;
};

bool adjacent(const Site& x, const Site& y, const LatticeParams& params);

/// All V neighbours of x, in lexicographic order of displacement.
std::vector<Site> neighbors(const Site& x, const LatticeParams& params);

/// Canonical identifier of an undirected edge: the lexicographically smaller
/// endpoint plus the displacement to the other one.
struct EdgeKey {
  Site base;
  Offset delta;

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
  template <typename H>
  friend H AbslHashValue(H h, const EdgeKey& e) {
    return H::combine(std::move(h), e.base, e.delta);
  }
};

/// Canonical key for adjacent x, y. Throws LatticeError if x == y or the
/// sites are not adjacent.
EdgeKey edge_key(const Site& x, const Site& y, const LatticeParams& params);

/// Unchecked canonicalization for hot loops; x and y must be adjacent.
inline EdgeKey canonical_edge(const Site& x, const Site& y) {
  if (x < y) return EdgeKey{x, difference(y, x)};
  return EdgeKey{y, difference(x, y)};
}

/// Closed box [-w, w]^d centred at the origin, in R-scaled units.
class Box {
 public:
  explicit Box(double half_width);

  double half_width() const { return half_width_; }
  bool contains(const Site& x) const;

 private:
  double half_width_;
};

/// True iff some site of some set in the trace lies strictly outside the box.
bool box_exits(std::span<const std::vector<Site>> trace, const Box& box);

}  // namespace rangeperc
