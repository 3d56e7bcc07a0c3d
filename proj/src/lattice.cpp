// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/lattice.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace rangeperc {

namespace {

constexpr std::int64_t kCoordMax = std::numeric_limits<std::int32_t>::max();

std::vector<Offset> build_displacements(int d, int range) {
  std::vector<Offset> out;
  const int side = 2 * range + 1;
  std::int64_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= side;
  out.reserve(static_cast<std::size_t>(cells - 1));
  // Odometer over [-R, R]^d; axis 0 is most significant, so the order is
  // lexicographic.
  for (std::int64_t idx = 0; idx < cells; ++idx) {
    Offset o;
    std::int64_t rem = idx;
    for (int i = d - 1; i >= 0; --i) {
      o.c[i] = static_cast<std::int32_t>(rem % side) - range;
      rem /= side;
    }
    if (o == Offset{}) continue;
    out.push_back(o);
  }
  return out;
}

}  // namespace

Site translate(const Site& x, const Offset& delta) {
  Site y;
  for (int i = 0; i < kMaxDim; ++i) {
    const std::int64_t v = std::int64_t{x.c[i]} + delta.c[i];
    if (v > kCoordMax || v < -kCoordMax) {
      throw LatticeError("site coordinate overflow");
    }
    y.c[i] = static_cast<std::int32_t>(v);
  }
  return y;
}

std::int64_t linf_norm(const Site& x) {
  std::int64_t m = 0;
  for (auto v : x.c) m = std::max<std::int64_t>(m, std::abs(std::int64_t{v}));
  return m;
}

std::int64_t linf_norm(const Offset& delta) {
  std::int64_t m = 0;
  for (auto v : delta.c) m = std::max<std::int64_t>(m, std::abs(std::int64_t{v}));
  return m;
}

std::string to_string(const Site& x, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) {
    if (i) os << ',';
    os << x.c[i];
  }
  os << ')';
  return os.str();
}

LatticeParams::LatticeParams(int d, int range) : d_(d), range_(range) {
  if (d < 1 || d > kMaxDim) {
    throw LatticeError("dimension must be 1, 2 or 3 (got " + std::to_string(d) + ")");
  }
  if (range < 1 || range > kMaxRange) {
    throw LatticeError("range must be in [1, " + std::to_string(kMaxRange) + "] (got " +
                       std::to_string(range) + ")");
  }
  std::int64_t side_pow = 1;
  scale_ = 1;
  for (int i = 0; i < d; ++i) side_pow *= 2 * range + 1;
  for (int i = 0; i + 1 < d; ++i) scale_ *= range;
  volume_ = side_pow - 1;
  displacements_ = std::make_shared<const std::vector<Offset>>(build_displacements(d, range));
}

bool adjacent(const Site& x, const Site& y, const LatticeParams& params) {
  std::int64_t m = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    if (i >= params.dim() && (x.c[i] != 0 || y.c[i] != 0)) return false;
    m = std::max<std::int64_t>(m, std::abs(std::int64_t{x.c[i]} - y.c[i]));
  }
  return m > 0 && m <= params.range();
}

std::vector<Site> neighbors(const Site& x, const LatticeParams& params) {
  std::vector<Site> out;
  out.reserve(params.displacements().size());
  for (const auto& delta : params.displacements()) out.push_back(translate(x, delta));
  return out;
}

EdgeKey edge_key(const Site& x, const Site& y, const LatticeParams& params) {
  if (x == y) throw LatticeError("edge_key: endpoints coincide");
  if (!adjacent(x, y, params)) throw LatticeError("edge_key: endpoints are not adjacent");
  return canonical_edge(x, y);
}

Box::Box(double half_width) : half_width_(half_width) {
  if (!(half_width >= 0.0)) throw LatticeError("box half-width must be nonnegative");
}

bool Box::contains(const Site& x) const {
  for (auto v : x.c) {
    if (std::abs(static_cast<double>(v)) > half_width_) return false;
  }
  return true;
}

bool box_exits(std::span<const std::vector<Site>> trace, const Box& box) {
  for (const auto& sites : trace) {
    for (const auto& s : sites) {
      if (!box.contains(s)) return true;
    }
  }
  return false;
}

}  // namespace rangeperc
