#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "curvkit/common.hpp"

namespace curvkit {

/// Inclusive lattice interval [lo, hi].
struct LatticeExtent {
  long lo = 0;
  long hi = 0;
  bool operator==(const LatticeExtent&) const = default;
};

/// Continuous interval [lo, hi] carrying the sampling step used by grid
/// fields and by norm sweeps over analytic fields.
struct ContinuousRange {
  double lo = 0.0;
  double hi = 0.0;
  double spacing = 0.0;
  bool operator==(const ContinuousRange&) const = default;
};

/// A point of L^p x R^q: integer lattice coordinates followed by real ones.
struct Point {
  std::vector<long> n;
  std::vector<double> x;
};

/// Product domain L^p x R^q with bounded extents. Lattice spacing is fixed
/// at 1; continuous directions carry their own sampling step. Copies are
/// cheap value copies.
class Domain {
 public:
  Domain() = default;

  int p() const { return static_cast<int>(lat_.size()); }
  int q() const { return static_cast<int>(cont_.size()); }

  const LatticeExtent& extent(int mu) const {
    check_lat(mu);
    return lat_[static_cast<size_t>(mu)];
  }
  const ContinuousRange& range(int i) const {
    check_cont(i);
    return cont_[static_cast<size_t>(i)];
  }

  /// Number of samples along continuous direction i: lo, lo+h, ... while
  /// <= hi (with a relative tolerance on the last step).
  long sample_count(int i) const {
    const ContinuousRange& r = range(i);
    return static_cast<long>(std::floor((r.hi - r.lo) / r.spacing + 1e-9)) + 1;
  }

  double sample_x(int i, long k) const {
    const ContinuousRange& r = range(i);
    return r.lo + static_cast<double>(k) * r.spacing;
  }

  /// Absolute lattice coordinates + continuous sample indices -> Point.
  Point point_at(const std::vector<long>& lat_coord,
                 const std::vector<long>& cont_index) const {
    Point pt;
    pt.n = lat_coord;
    pt.x.resize(cont_.size());
    for (int i = 0; i < q(); ++i) pt.x[static_cast<size_t>(i)] = sample_x(i, cont_index[static_cast<size_t>(i)]);
    return pt;
  }

  bool operator==(const Domain&) const = default;

  friend Domain make_domain(const std::vector<LatticeExtent>&,
                            const std::vector<ContinuousRange>&);

 private:
  void check_lat(int mu) const {
    if (mu < 0 || mu >= p())
      throw ConfigError("lattice direction " + std::to_string(mu) +
                        " out of range (p=" + std::to_string(p()) + ")");
  }
  void check_cont(int i) const {
    if (i < 0 || i >= q())
      throw ConfigError("continuous direction " + std::to_string(i) +
                        " out of range (q=" + std::to_string(q()) + ")");
  }

  std::vector<LatticeExtent> lat_;
  std::vector<ContinuousRange> cont_;
};

inline Domain make_domain(const std::vector<LatticeExtent>& lat,
                          const std::vector<ContinuousRange>& cont) {
  if (lat.empty() && cont.empty())
    throw ConfigError("domain needs at least one direction");
  for (size_t mu = 0; mu < lat.size(); ++mu) {
    if (lat[mu].lo > lat[mu].hi)
      throw ConfigError("lattice extent " + std::to_string(mu) + " is empty");
  }
  for (size_t i = 0; i < cont.size(); ++i) {
    const auto& r = cont[i];
    if (!(r.spacing > 0.0) || !std::isfinite(r.spacing))
      throw ConfigError("continuous direction " + std::to_string(i) +
                        " needs a positive spacing");
    if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
      throw ConfigError("continuous range " + std::to_string(i) +
                        " is empty or not finite");
    if (r.hi - r.lo < r.spacing)
      throw ConfigError("continuous direction " + std::to_string(i) +
                        " has fewer than two samples");
  }
  Domain d;
  d.lat_ = lat;
  d.cont_ = cont;
  return d;
}

/// Convenience overload mirroring the (p, q, extents, ranges, spacings)
/// call shape used by the CLI.
inline Domain make_domain(int p, int q,
                          const std::vector<std::array<long, 2>>& extents,
                          const std::vector<std::array<double, 2>>& ranges,
                          const std::vector<double>& spacings) {
  if (p < 0 || q < 0) throw ConfigError("p and q must be non-negative");
  if (extents.size() != static_cast<size_t>(p))
    throw ConfigError("expected " + std::to_string(p) + " lattice extents, got " +
                      std::to_string(extents.size()));
  if (ranges.size() != static_cast<size_t>(q) ||
      spacings.size() != static_cast<size_t>(q))
    throw ConfigError("expected " + std::to_string(q) +
                      " continuous ranges and spacings");
  std::vector<LatticeExtent> lat;
  lat.reserve(extents.size());
  for (const auto& e : extents) lat.push_back({e[0], e[1]});
  std::vector<ContinuousRange> cont;
  cont.reserve(ranges.size());
  for (size_t i = 0; i < ranges.size(); ++i)
    cont.push_back({ranges[i][0], ranges[i][1], spacings[i]});
  return make_domain(lat, cont);
}

/// Inclusive index interval.
struct IndexRange {
  long lo = 0;
  long hi = 0;
  long size() const { return hi - lo + 1; }
  bool operator==(const IndexRange&) const = default;
};

/// Box of validity for a field: absolute lattice coordinates for the p
/// directions, sample indices for the q directions. Differences shrink it
/// from the top, backward references from the bottom; combining fields
/// intersects it.
struct Region {
  std::vector<IndexRange> lat;
  std::vector<IndexRange> cont;

  static Region full(const Domain& dom) {
    Region r;
    r.lat.reserve(static_cast<size_t>(dom.p()));
    for (int mu = 0; mu < dom.p(); ++mu)
      r.lat.push_back({dom.extent(mu).lo, dom.extent(mu).hi});
    r.cont.reserve(static_cast<size_t>(dom.q()));
    for (int i = 0; i < dom.q(); ++i) r.cont.push_back({0, dom.sample_count(i) - 1});
    return r;
  }

  bool empty() const {
    for (const auto& r : lat)
      if (r.lo > r.hi) return true;
    for (const auto& r : cont)
      if (r.lo > r.hi) return true;
    return false;
  }

  long points() const {
    if (empty()) return 0;
    long n = 1;
    for (const auto& r : lat) n *= r.size();
    for (const auto& r : cont) n *= r.size();
    return n;
  }

  Region intersect(const Region& other) const {
    if (lat.size() != other.lat.size() || cont.size() != other.cont.size())
      throw ConfigError("regions live on different domains");
    Region out;
    out.lat.resize(lat.size());
    out.cont.resize(cont.size());
    for (size_t k = 0; k < lat.size(); ++k)
      out.lat[k] = {std::max(lat[k].lo, other.lat[k].lo),
                    std::min(lat[k].hi, other.lat[k].hi)};
    for (size_t k = 0; k < cont.size(); ++k)
      out.cont[k] = {std::max(cont[k].lo, other.cont[k].lo),
                     std::min(cont[k].hi, other.cont[k].hi)};
    return out;
  }

  bool contains(const Region& other) const {
    return intersect(other) == other;
  }

  std::string describe() const {
    std::string s = "lat";
    for (const auto& r : lat)
      s += " [" + std::to_string(r.lo) + "," + std::to_string(r.hi) + "]";
    s += " cont";
    for (const auto& r : cont)
      s += " [" + std::to_string(r.lo) + "," + std::to_string(r.hi) + "]";
    return s;
  }

  bool operator==(const Region&) const = default;
};

/// Row-major odometer over a region box. Visits lattice directions as the
/// slow axes and continuous directions as the fast ones; flat() is the
/// linear offset matching that order.
class RegionIter {
 public:
  explicit RegionIter(const Region& reg) : reg_(reg) {
    lat_.reserve(reg.lat.size());
    for (const auto& r : reg.lat) lat_.push_back(r.lo);
    cont_.reserve(reg.cont.size());
    for (const auto& r : reg.cont) cont_.push_back(r.lo);
    done_ = reg.empty();
  }

  bool done() const { return done_; }
  const std::vector<long>& lat() const { return lat_; }
  const std::vector<long>& cont() const { return cont_; }
  long flat() const { return flat_; }

  void next() {
    ++flat_;
    for (size_t k = cont_.size(); k-- > 0;) {
      if (++cont_[k] <= reg_.cont[k].hi) return;
      cont_[k] = reg_.cont[k].lo;
    }
    for (size_t k = lat_.size(); k-- > 0;) {
      if (++lat_[k] <= reg_.lat[k].hi) return;
      lat_[k] = reg_.lat[k].lo;
    }
    done_ = true;
  }

  /// Coordinates for the idx-th point in flat order, without iterating.
  void at(long idx, std::vector<long>& lat_out, std::vector<long>& cont_out) const {
    lat_out.resize(lat_.size());
    cont_out.resize(cont_.size());
    for (size_t k = cont_.size(); k-- > 0;) {
      const long sz = reg_.cont[k].size();
      cont_out[k] = reg_.cont[k].lo + idx % sz;
      idx /= sz;
    }
    for (size_t k = lat_.size(); k-- > 0;) {
      const long sz = reg_.lat[k].size();
      lat_out[k] = reg_.lat[k].lo + idx % sz;
      idx /= sz;
    }
  }

 private:
  Region reg_;
  std::vector<long> lat_, cont_;
  long flat_ = 0;
  bool done_ = false;
};

}  // namespace curvkit
