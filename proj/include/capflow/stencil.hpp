#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "capflow/grid.hpp"

namespace capflow {

enum class StencilKind { axis, diagonal, extended };

inline const char* to_string(StencilKind k) {
  switch (k) {
    case StencilKind::axis: return "axis";
    case StencilKind::diagonal: return "diagonal";
    case StencilKind::extended: return "extended";
  }
  return "?";
}

inline StencilKind parse_stencil_kind(const std::string& s) {
  if (s == "axis") return StencilKind::axis;
  if (s == "diagonal") return StencilKind::diagonal;
  if (s == "extended") return StencilKind::extended;
  throw std::invalid_argument("unknown stencil kind '" + s + "'");
}

/// Pairwise neighborhood used to discretize the perimeter. `offsets` holds one
/// representative of each +/- direction pair; `weights[k]` is the cost of an
/// in/out pair along offsets[k] (units length^{d-1}).
struct Stencil {
  StencilKind kind = StencilKind::axis;
  int dim = 2;
  std::vector<Cell> offsets;
  std::vector<double> weights;

  std::size_t directions() const { return offsets.size(); }
};

namespace detail {

inline double offset_length(const Cell& e) {
  return std::sqrt(static_cast<double>(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]));
}

// Angular measure of the Voronoi cell of each undirected direction on the unit
// circle (2D, total pi) or unit hemisphere (3D, total 2 pi).
inline std::vector<double> angular_partition(int dim, const std::vector<Cell>& offsets) {
  const std::size_t m = offsets.size();
  std::vector<std::array<double, 3>> dirs;
  for (const Cell& e : offsets) {
    const double len = offset_length(e);
    dirs.push_back({e[0] / len, e[1] / len, e[2] / len});
  }
  std::vector<double> measure(m, 0.0);
  if (dim == 2) {
    // Sort all 2m signed directions by angle; each owns half of both gaps.
    std::vector<std::pair<double, std::size_t>> ang;
    for (std::size_t k = 0; k < m; ++k) {
      const double a = std::atan2(dirs[k][1], dirs[k][0]);
      ang.push_back({a, k});
      ang.push_back({a > 0 ? a - std::numbers::pi : a + std::numbers::pi, k});
    }
    std::sort(ang.begin(), ang.end());
    const std::size_t n = ang.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double prev = ang[(i + n - 1) % n].first - (i == 0 ? 2 * std::numbers::pi : 0.0);
      const double next = ang[(i + 1) % n].first + (i + 1 == n ? 2 * std::numbers::pi : 0.0);
      measure[ang[i].second] += 0.5 * (next - prev) / 2.0;
    }
    return measure;
  }
  // 3D: midpoint quadrature on an equal-area (z, phi) grid over the sphere,
  // each sample assigned to the nearest signed direction; halved to the
  // hemisphere. Classes of equal offset length are then averaged, which is
  // exact for the symmetric stencils built here.
  constexpr int nz = 600;
  constexpr int nphi = 1200;
  const double cell = (2.0 / nz) * (2.0 * std::numbers::pi / nphi);
  for (int iz = 0; iz < nz; ++iz) {
    const double z = -1.0 + (iz + 0.5) * 2.0 / nz;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    for (int ip = 0; ip < nphi; ++ip) {
      const double phi = (ip + 0.5) * 2.0 * std::numbers::pi / nphi;
      const double x = rho * std::cos(phi);
      const double y = rho * std::sin(phi);
      std::size_t best = 0;
      double best_dot = -1.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = std::abs(x * dirs[k][0] + y * dirs[k][1] + z * dirs[k][2]);
        if (d > best_dot) {
          best_dot = d;
          best = k;
        }
      }
      measure[best] += 0.5 * cell;
    }
  }
  std::vector<double> sym(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t l = 0; l < m; ++l) {
      if (std::abs(offset_length(offsets[l]) - offset_length(offsets[k])) < 1e-12) {
        sum += measure[l];
        ++count;
      }
    }
    sym[k] = sum / count;
  }
  return sym;
}

inline std::vector<Cell> stencil_offsets(StencilKind kind, int dim) {
  if (dim == 2) {
    std::vector<Cell> o{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, -1, 0}};
    if (kind == StencilKind::extended) o.insert(o.end(), {{2, 1, 0}, {1, 2, 0}, {2, -1, 0}, {1, -2, 0}});
    return o;
  }
  std::vector<Cell> o{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, -1, 0},
                      {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1}};
  if (kind == StencilKind::extended) o.insert(o.end(), {{1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1}});
  return o;
}

// Partitions depend only on (kind, dim); the 3D quadrature is slow enough to cache.
inline const std::vector<double>& cached_partition(StencilKind kind, int dim) {
  static const std::vector<double> d2 = angular_partition(2, stencil_offsets(StencilKind::diagonal, 2));
  static const std::vector<double> x2 = angular_partition(2, stencil_offsets(StencilKind::extended, 2));
  if (dim == 2) return kind == StencilKind::extended ? x2 : d2;
  if (kind == StencilKind::extended) {
    static const std::vector<double> x3 = angular_partition(3, stencil_offsets(StencilKind::extended, 3));
    return x3;
  }
  static const std::vector<double> d3 = angular_partition(3, stencil_offsets(StencilKind::diagonal, 3));
  return d3;
}

}  // namespace detail

/// Axis stencil: 4 / 6 neighbors, weight h^{d-1} per face.
/// Diagonal stencil: 8 / 18 neighbors with Cauchy-Crofton weights
///   2D: w = h^2 dphi / (2 |e|),   3D: w = h^3 dPhi / (pi |e|),
/// where dphi / dPhi is the angular measure owned by the direction.
/// Extended stencil: same weights over 16 / 26 neighbors (adds the knight
/// moves in 2D, the body diagonals in 3D).
inline Stencil make_stencil(StencilKind kind, const HalfSpaceGrid& grid) {
  Stencil s;
  s.kind = kind;
  s.dim = grid.dim();
  const double h = grid.spacing();
  if (kind == StencilKind::axis) {
    for (int a = 0; a < grid.dim(); ++a) {
      Cell e{0, 0, 0};
      e[a] = 1;
      s.offsets.push_back(e);
      s.weights.push_back(grid.face_area());
    }
    return s;
  }
  s.offsets = detail::stencil_offsets(kind, grid.dim());
  const std::vector<double>& part = detail::cached_partition(kind, grid.dim());
  for (std::size_t k = 0; k < s.offsets.size(); ++k) {
    const double len = detail::offset_length(s.offsets[k]) * h;
    const double w = grid.dim() == 2 ? h * h * part[k] / (2.0 * len)
                                     : h * h * h * part[k] / (std::numbers::pi * len);
    s.weights.push_back(w);
  }
  return s;
}

}  // namespace capflow
