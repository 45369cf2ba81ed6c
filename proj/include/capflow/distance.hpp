#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "capflow/grid.hpp"

namespace capflow {

/// Interface faces of a mask, in doubled lattice coordinates: cell centers sit
/// at odd coordinates 2c+1, face centers have exactly one even coordinate.
/// Only faces with strictly positive height are kept (never the plane).
struct InterfaceFaceSet {
  HalfSpaceGrid grid;
  std::vector<Cell> faces;      // doubled coordinates of face centers
  std::vector<std::size_t> in;  // the adjacent in-cell of each face

  std::size_t size() const { return faces.size(); }

  Point center(std::size_t k) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) p[a] = 0.5 * faces[k][a] * grid.spacing();
    return p;
  }
};

inline InterfaceFaceSet interface_faces(const SetMask& mask) {
  const HalfSpaceGrid& g = mask.grid();
  InterfaceFaceSet out{g, {}, {}};
  const int v = g.vertical_axis();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask[i]) continue;
    const Cell c = g.cell(i);
    for (int a = 0; a < g.dim(); ++a) {
      for (int s : {-1, 1}) {
        if (a == v && s == -1 && c[a] == 0) continue;  // bottom face lies on the plane
        Cell n = c;
        n[a] += s;
        if (mask.test(n)) continue;
        Cell f{0, 0, 0};
        for (int b = 0; b < g.dim(); ++b) f[b] = 2 * c[b] + 1;
        f[a] += s;
        out.faces.push_back(f);
        out.in.push_back(i);
      }
    }
  }
  return out;
}

namespace detail {

constexpr std::int64_t kInfSq = std::numeric_limits<std::int64_t>::max() / 4;

// One pass of the exact 1D squared distance transform (lower envelope of
// parabolas) over a strided line of length n.
inline void edt_line(std::int64_t* f, std::size_t stride, int n, std::vector<std::int64_t>& buf,
                     std::vector<int>& vtx, std::vector<double>& z) {
  buf.resize(n);
  vtx.resize(n);
  z.resize(n + 1);
  for (int q = 0; q < n; ++q) buf[q] = f[q * stride];
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (buf[q] >= kInfSq) continue;
    if (k < 0) {
      k = 0;
      vtx[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    auto meet = [&](int p) {
      return (static_cast<double>(buf[q] + std::int64_t{q} * q) - static_cast<double>(buf[p] + std::int64_t{p} * p)) /
             (2.0 * (q - p));
    };
    double s = meet(vtx[k]);
    while (s <= z[k]) {  // z[0] = -inf stops the loop
      --k;
      s = meet(vtx[k]);
    }
    ++k;
    vtx[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) return;  // no finite samples on this line
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const std::int64_t d = q - vtx[j];
    f[q * stride] = d * d + buf[vtx[j]];
  }
}

}  // namespace detail

/// Squared distances (in units of (h/2)^2) from every point of the doubled
/// lattice to the interface face centers of `mask`. Entries are
/// detail::kInfSq when the mask is empty.
class RefinedDistance {
 public:
  explicit RefinedDistance(const SetMask& mask) : grid_(mask.grid()) {
    for (int a = 0; a < 3; ++a) n_[a] = a < grid_.dim() ? 2 * grid_.extent(a) + 1 : 1;
    sq_.assign(static_cast<std::size_t>(n_[0]) * n_[1] * n_[2], detail::kInfSq);
    const InterfaceFaceSet faces = interface_faces(mask);
    empty_ = faces.size() == 0;
    for (const Cell& f : faces.faces) sq_[at(f)] = 0;
    if (empty_) return;
    std::vector<std::int64_t> buf;
    std::vector<int> vtx;
    std::vector<double> z;
    const std::size_t stride[3] = {1, static_cast<std::size_t>(n_[0]), static_cast<std::size_t>(n_[0]) * n_[1]};
    for (int a = 0; a < grid_.dim(); ++a) {
      // Iterate over all lines parallel to axis a.
      const int b = (a + 1) % 3, c = (a + 2) % 3;
      for (int ib = 0; ib < n_[b]; ++ib) {
        for (int ic = 0; ic < n_[c]; ++ic) {
          const std::size_t base = ib * stride[b] + ic * stride[c];
          detail::edt_line(sq_.data() + base, stride[a], n_[a], buf, vtx, z);
        }
      }
    }
  }

  bool empty_set() const { return empty_; }

  std::int64_t squared(const Cell& doubled) const { return sq_[at(doubled)]; }

  /// Unsigned distance at a doubled-lattice point, in length units.
  double distance(const Cell& doubled) const {
    const std::int64_t s = squared(doubled);
    if (s >= detail::kInfSq) return std::numeric_limits<double>::infinity();
    return 0.5 * grid_.spacing() * std::sqrt(static_cast<double>(s));
  }

  double cell_distance(std::size_t idx) const {
    const Cell c = grid_.cell(idx);
    Cell d{0, 0, 0};
    for (int a = 0; a < grid_.dim(); ++a) d[a] = 2 * c[a] + 1;
    return distance(d);
  }

 private:
  std::size_t at(const Cell& d) const {
    return static_cast<std::size_t>(d[0]) +
           static_cast<std::size_t>(n_[0]) * (static_cast<std::size_t>(d[1]) + static_cast<std::size_t>(n_[1]) * d[2]);
  }

  HalfSpaceGrid grid_;
  std::array<int, 3> n_{1, 1, 1};
  std::vector<std::int64_t> sq_;
  bool empty_ = true;
};

/// Signed Euclidean distance from cell centers to the interface face centers,
/// negative inside the set; +inf everywhere for the empty set.
inline ScalarField signed_distance(const SetMask& mask) {
  const RefinedDistance rd(mask);
  ScalarField out(mask.grid());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double d = rd.cell_distance(i);
    out[i] = rd.empty_set() ? std::numeric_limits<double>::infinity() : (mask[i] ? -d : d);
  }
  return out;
}

}  // namespace capflow
