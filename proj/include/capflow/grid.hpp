#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace capflow {

/// Integer cell coordinate. Unused trailing axes are 0; the vertical axis is
/// always axis `dim - 1`.
using Cell = std::array<int, 3>;
using Point = std::array<double, 3>;

/// Cell-centered lattice over a box resting on the plane x_d = 0.
///
/// Cell (.., j) occupies heights [j*h, (j+1)*h). The bottom faces of the row
/// j = 0 lie on the supporting plane and are never part of the interior
/// interface. Everything outside the box is treated as "not in the set".
class HalfSpaceGrid {
 public:
  HalfSpaceGrid() = default;

  HalfSpaceGrid(int dim, std::span<const int> extents, double h) : dim_(dim), h_(h) {
    if (dim != 2 && dim != 3) {
      throw std::invalid_argument("grid: dimension must be 2 or 3, got " + std::to_string(dim));
    }
    if (static_cast<int>(extents.size()) != dim) {
      throw std::invalid_argument("grid: expected " + std::to_string(dim) + " extents");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw std::invalid_argument("grid: spacing must be positive");
    }
    for (int a = 0; a < dim; ++a) {
      if (extents[a] < 1) {
        throw std::invalid_argument("grid: extents must be positive");
      }
      ext_[a] = extents[a];
    }
    size_ = static_cast<std::size_t>(ext_[0]) * ext_[1] * ext_[2];
    columns_ = size_ / static_cast<std::size_t>(ext_[dim - 1]);
  }

  int dim() const { return dim_; }
  int vertical_axis() const { return dim_ - 1; }
  double spacing() const { return h_; }
  int extent(int axis) const { return ext_[axis]; }
  const std::array<int, 3>& extents() const { return ext_; }
  std::size_t size() const { return size_; }

  /// Number of cells in the bottom row (one per vertical column).
  std::size_t columns() const { return columns_; }

  double cell_volume() const { return std::pow(h_, dim_); }
  double face_area() const { return std::pow(h_, dim_ - 1); }

  // Linear index: axis 0 fastest, vertical axis slowest.
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c[0]) +
           static_cast<std::size_t>(ext_[0]) *
               (static_cast<std::size_t>(c[1]) + static_cast<std::size_t>(ext_[1]) * c[2]);
  }

  Cell cell(std::size_t idx) const {
    Cell c{0, 0, 0};
    c[0] = static_cast<int>(idx % ext_[0]);
    idx /= ext_[0];
    c[1] = static_cast<int>(idx % ext_[1]);
    c[2] = static_cast<int>(idx / ext_[1]);
    return c;
  }

  bool contains(const Cell& c) const {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < 0 || c[a] >= ext_[a]) return false;
    }
    return true;
  }

  int height_index(std::size_t idx) const { return static_cast<int>(idx / columns_); }
  std::size_t column_of(std::size_t idx) const { return idx % columns_; }
  bool on_bottom_row(std::size_t idx) const { return idx < columns_; }

  Point center(const Cell& c) const {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = (c[a] + 0.5) * h_;
    return p;
  }
  Point center(std::size_t idx) const { return center(cell(idx)); }

  friend bool operator==(const HalfSpaceGrid& a, const HalfSpaceGrid& b) {
    return a.dim_ == b.dim_ && a.ext_ == b.ext_ && a.h_ == b.h_;
  }

 private:
  int dim_ = 2;
  std::array<int, 3> ext_{1, 1, 1};
  double h_ = 1.0;
  std::size_t size_ = 1;
  std::size_t columns_ = 1;
};

inline HalfSpaceGrid make_grid(int dim, std::vector<int> extents, double h) {
  return HalfSpaceGrid(dim, extents, h);
}

inline void require_same_grid(const HalfSpaceGrid& a, const HalfSpaceGrid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

/// Binary cell field; true marks membership in the set.
class SetMask {
 public:
  SetMask() = default;
  explicit SetMask(HalfSpaceGrid grid, bool value = false)
      : grid_(grid), bits_(grid.size(), value ? 1 : 0) {}

  const HalfSpaceGrid& grid() const { return grid_; }
  std::size_t size() const { return bits_.size(); }

  bool operator[](std::size_t idx) const { return bits_[idx] != 0; }
  bool test(const Cell& c) const { return grid_.contains(c) && bits_[grid_.index(c)] != 0; }
  void set(std::size_t idx, bool v = true) { bits_[idx] = v ? 1 : 0; }
  void set(const Cell& c, bool v = true) { bits_[grid_.index(c)] = v ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  bool empty() const { return count() == 0; }
  double volume() const { return static_cast<double>(count()) * grid_.cell_volume(); }

  /// Cells of the bottom row that belong to the set (the wetted footprint).
  std::size_t wetted_cells() const {
    return static_cast<std::size_t>(
        std::count(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(grid_.columns()),
                   std::uint8_t{1}));
  }

  bool subset_of(const SetMask& other) const {
    require_same_grid(grid_, other.grid_, "subset_of");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
  }

  SetMask operator&(const SetMask& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }
  SetMask operator|(const SetMask& o) const { return combine(o, [](bool a, bool b) { return a || b; }); }
  SetMask operator^(const SetMask& o) const { return combine(o, [](bool a, bool b) { return a != b; }); }
  SetMask minus(const SetMask& o) const { return combine(o, [](bool a, bool b) { return a && !b; }); }

  /// Complement inside the computational box.
  SetMask operator~() const {
    SetMask r(grid_);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] ? 0 : 1;
    return r;
  }

  friend bool operator==(const SetMask& a, const SetMask& b) {
    return a.grid_ == b.grid_ && a.bits_ == b.bits_;
  }

  const std::vector<std::uint8_t>& raw() const { return bits_; }

 private:
  template <class Op>
  SetMask combine(const SetMask& o, Op op) const {
    require_same_grid(grid_, o.grid_, "mask algebra");
    SetMask r(grid_);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = op(bits_[i] != 0, o.bits_[i] != 0) ? 1 : 0;
    return r;
  }

  HalfSpaceGrid grid_;
  std::vector<std::uint8_t> bits_;
};

/// Per-cell real values. +inf is reserved for distances to the empty set.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(HalfSpaceGrid grid, double value = 0.0) : grid_(grid), values_(grid.size(), value) {
    if (std::isnan(value)) throw std::invalid_argument("ScalarField: NaN value");
  }
  ScalarField(HalfSpaceGrid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("ScalarField: size mismatch");
    for (double v : values_) {
      if (std::isnan(v)) throw std::invalid_argument("ScalarField: NaN value");
    }
  }

  const HalfSpaceGrid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t idx) const { return values_[idx]; }
  double& operator[](std::size_t idx) { return values_[idx]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  static ScalarField indicator(const SetMask& m, double scale = 1.0) {
    ScalarField f(m.grid());
    for (std::size_t i = 0; i < m.size(); ++i) f.values_[i] = m[i] ? scale : 0.0;
    return f;
  }

 private:
  HalfSpaceGrid grid_;
  std::vector<double> values_;
};

/// Contact-angle cosine sampled once per bottom column, with coercivity margin
/// kappa: every sample must satisfy -1 <= beta <= 1 - 2 kappa.
class BetaField {
 public:
  BetaField() = default;
  BetaField(HalfSpaceGrid grid, std::vector<double> samples, double kappa)
      : grid_(grid), samples_(std::move(samples)), kappa_(kappa) {
    if (samples_.size() != grid_.columns()) {
      throw std::invalid_argument("beta: expected one sample per bottom column");
    }
    if (!(kappa > 0.0 && kappa <= 0.5)) throw std::invalid_argument("beta: kappa must lie in (0, 1/2]");
    for (double b : samples_) {
      if (!(b >= -1.0 && b <= 1.0 - 2.0 * kappa)) {
        throw std::invalid_argument("beta: sample " + std::to_string(b) +
                                    " outside [-1, 1 - 2 kappa] with kappa = " + std::to_string(kappa));
      }
    }
  }

  static BetaField constant(const HalfSpaceGrid& grid, double value, double kappa) {
    return BetaField(grid, std::vector<double>(grid.columns(), value), kappa);
  }

  const HalfSpaceGrid& grid() const { return grid_; }
  double kappa() const { return kappa_; }
  double operator[](std::size_t column) const { return samples_[column]; }
  std::span<const double> samples() const { return samples_; }

  double sup_norm() const {
    double m = 0.0;
    for (double b : samples_) m = std::max(m, std::abs(b));
    return m;
  }

  /// Pointwise order used by the comparison principles.
  bool leq(const BetaField& o) const {
    require_same_grid(grid_, o.grid_, "beta order");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (samples_[i] > o.samples_[i]) return false;
    }
    return true;
  }

 private:
  HalfSpaceGrid grid_;
  std::vector<double> samples_;
  double kappa_ = 0.5;
};

/// Spherical cap: cells whose centers lie in the ball of the given radius,
/// whose center sits at height -radius * contact_cos below the foot point on
/// the plane. contact_cos = 0 gives the half-ball centered on the plane.
inline SetMask cap_mask(const HalfSpaceGrid& grid, const Point& foot, double radius, double contact_cos = 0.0) {
  if (!(radius > 0.0)) throw std::invalid_argument("cap_mask: radius must be positive");
  if (!(contact_cos >= -1.0 && contact_cos <= 1.0)) throw std::invalid_argument("cap_mask: |contact_cos| > 1");
  SetMask m(grid);
  const int v = grid.vertical_axis();
  Point c = foot;
  c[v] = -radius * contact_cos;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point x = grid.center(i);
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += (x[a] - c[a]) * (x[a] - c[a]);
    if (s < r2) m.set(i);
  }
  return m;
}

/// Axis-aligned block of cells [lo, hi) (cell indices, per axis).
inline SetMask box_mask(const HalfSpaceGrid& grid, const Cell& lo, const Cell& hi) {
  SetMask m(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Cell c = grid.cell(i);
    bool in = true;
    for (int a = 0; a < grid.dim(); ++a) in = in && c[a] >= lo[a] && c[a] < hi[a];
    if (in) m.set(i);
  }
  return m;
}

inline double sym_diff_volume(const SetMask& a, const SetMask& b) {
  require_same_grid(a.grid(), b.grid(), "sym_diff_volume");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]) ? 1 : 0;
  return static_cast<double>(n) * a.grid().cell_volume();
}

/// Box extents for a set with the given bounding box (absolute lengths):
/// pad each horizontal side and the top by `margin` of the extent (at least
/// `min_cells` cells). The bottom sits on the plane and is never padded.
inline std::vector<int> padded_extents(int dim, const Point& bbox_lo, const Point& bbox_hi, double h,
                                       double margin = 0.25, int min_cells = 8) {
  std::vector<int> ext(dim);
  for (int a = 0; a < dim; ++a) {
    const double len = std::max(bbox_hi[a] - (a == dim - 1 ? 0.0 : bbox_lo[a]), h);
    const int cells = static_cast<int>(std::ceil(len / h - 1e-9));
    const int pad = std::max(min_cells, static_cast<int>(std::ceil(margin * cells)));
    ext[a] = cells + (a == dim - 1 ? pad : 2 * pad);
  }
  return ext;
}

}  // namespace capflow
