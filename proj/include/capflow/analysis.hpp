#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "capflow/distance.hpp"
#include "capflow/flow.hpp"
#include "capflow/grid.hpp"

namespace capflow {

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

/// Conservative default for the Besicovitch covering constant.
inline double default_besicovitch(int n) {
  if (n == 1) return 5.0;
  if (n == 2) return 16.0;
  throw std::invalid_argument("default_besicovitch: n must be 1 or 2");
}

/// Relative isoperimetric constant of the unit ball in R^{n+1}, attained by
/// the equatorial cut: area of the flat disk over (half-ball volume)^{n/(n+1)}.
inline double default_isoperimetric(int n) {
  const double half = 0.5 * unit_ball_volume(n + 1);
  return unit_ball_volume(n) / std::pow(half, static_cast<double>(n) / (n + 1));
}

struct TheoryConstants {
  int n = 1;
  double kappa = 0.5;
  double b_n = 0.0;
  double c_iso = 0.0;
  double omega_n = 0.0;
  double omega_n1 = 0.0;
  double R = 0.0;
  double gamma = 0.0;
  double C = 0.0;
  double c = 0.0;
  double C_nk = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double mu = 0.0;
};

inline TheoryConstants constants(int n, double kappa, double b_n, double c_iso) {
  if (n != 1 && n != 2) throw std::invalid_argument("constants: n must be 1 or 2");
  if (!(kappa > 0.0 && kappa <= 0.5)) throw std::invalid_argument("constants: kappa must lie in (0, 1/2]");
  if (!(b_n > 0.0) || !(c_iso > 0.0)) throw std::invalid_argument("constants: b_n and c_iso must be positive");
  TheoryConstants k;
  k.n = n;
  k.kappa = kappa;
  k.b_n = b_n;
  k.c_iso = c_iso;
  const double wn = unit_ball_volume(n), wn1 = unit_ball_volume(n + 1);
  const double n1 = n + 1.0;
  k.omega_n = wn;
  k.omega_n1 = wn1;
  k.R = std::sqrt(std::pow(2.0, n + 3) * (wn + n1 * wn1) / (wn1 * std::pow(kappa, n1)));
  k.gamma = kappa * n1 / (std::sqrt(k.R * k.R + 4.0 * kappa * n1) + k.R);
  k.C = n1 * wn1 + 2.0 * wn + kappa * n1 * wn1 / 2.0;
  k.c = c_iso * std::pow(kappa / 4.0, n);
  k.C_nk = std::pow(8.0 / kappa, n1) * std::pow(wn1, 1.0 / n1) * b_n * c_iso;
  k.theta = k.C_nk / kappa + 1.0;
  k.alpha = 75.0 * (n1 * wn1 + wn) * b_n / (std::pow(kappa / 2.0, n1) * wn1);
  k.mu = std::pow(1.0 / kappa + 2.0, n1 / n);
  return k;
}

inline TheoryConstants default_constants(int n, double kappa) {
  return constants(n, kappa, default_besicovitch(n), default_isoperimetric(n));
}

inline nlohmann::json to_json(const TheoryConstants& k) {
  return {{"n", k.n},         {"kappa", k.kappa}, {"b_n", k.b_n},     {"c_iso", k.c_iso}, {"omega_n", k.omega_n},
          {"omega_n1", k.omega_n1}, {"R", k.R},   {"gamma", k.gamma}, {"C", k.C},         {"c", k.c},
          {"C_nk", k.C_nk},   {"theta", k.theta}, {"alpha", k.alpha}, {"mu", k.mu}};
}

/// max over frame pairs with 0 < |t - t'| < 1 of |E(t) sym E(t')| / (P(E_0) |t - t'|^{1/2}),
/// with P the full perimeter of the initial set.
inline double holder_modulus(const Trajectory& tr) {
  if (tr.frames.size() < 2) throw std::invalid_argument("holder_modulus: need at least two frames");
  if (!(tr.full_perimeter0 > 0.0)) return 0.0;
  double best = 0.0;
  for (std::size_t i = 0; i < tr.frames.size(); ++i) {
    for (std::size_t j = i + 1; j < tr.frames.size(); ++j) {
      const double dt = std::abs(tr.frames[j].t - tr.frames[i].t);
      if (!(dt > 0.0 && dt < 1.0)) continue;
      const double sd = sym_diff_volume(tr.frames[i].mask, tr.frames[j].mask);
      best = std::max(best, sd / (tr.full_perimeter0 * std::sqrt(dt)));
    }
  }
  return best;
}

/// Per-step max |d_prev| over the symmetric difference (0 when nothing moved).
inline std::vector<double> linfty_per_step(const Trajectory& tr) {
  std::vector<double> out;
  for (std::size_t k = 1; k < tr.frames.size(); ++k) out.push_back(tr.frames[k].metrics.max_dist_on_symdiff);
  return out;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (log x, log y).
inline SlopeFit fit_loglog(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  if (xs.size() < 3) throw std::invalid_argument("fit_loglog: need at least 3 points");
  const std::size_t n = xs.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("fit_loglog: values must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog: all x values coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  f.points = n;
  return f;
}

struct DensityRow {
  double r = 0.0;
  double min_fraction = 1.0;
  double max_fraction = 0.0;
  std::size_t centers = 0;
};

/// Extremal volume fractions |B_r(x) ∩ E| / |B_r(x) ∩ box| over interface face
/// centers x, both measures counted by cell centers.
inline std::vector<DensityRow> density_report(const SetMask& mask, const std::vector<double>& radii) {
  const HalfSpaceGrid& g = mask.grid();
  const double h = g.spacing();
  for (double r : radii) {
    if (!(r >= 2.0 * h)) throw std::invalid_argument("density_report: radii must be at least 2h");
  }
  const InterfaceFaceSet faces = interface_faces(mask);
  std::vector<DensityRow> rows;
  for (double r : radii) {
    DensityRow row;
    row.r = r;
    const int reach = static_cast<int>(std::ceil(r / h)) + 1;
    const double r2 = r * r;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const Point x = faces.center(f);
      Cell lo{0, 0, 0}, hi{0, 0, 0};
      for (int a = 0; a < g.dim(); ++a) {
        const int mid = faces.faces[f][a] / 2;
        lo[a] = std::max(0, mid - reach);
        hi[a] = std::min(g.extent(a) - 1, mid + reach);
      }
      std::size_t in = 0, all = 0;
      for (int z = lo[2]; z <= hi[2]; ++z) {
        for (int y = lo[1]; y <= hi[1]; ++y) {
          for (int xx = lo[0]; xx <= hi[0]; ++xx) {
            const Cell c{xx, y, z};
            const Point p = g.center(c);
            double s = 0.0;
            for (int a = 0; a < g.dim(); ++a) s += (p[a] - x[a]) * (p[a] - x[a]);
            if (s >= r2) continue;
            ++all;
            if (mask.test(c)) ++in;
          }
        }
      }
      if (all == 0) continue;
      const double frac = static_cast<double>(in) / static_cast<double>(all);
      row.min_fraction = std::min(row.min_fraction, frac);
      row.max_fraction = std::max(row.max_fraction, frac);
      ++row.centers;
    }
    if (row.centers == 0) row.min_fraction = row.max_fraction = 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

struct LocalFrame {
  Point origin{};
  Point normal{};                  // unit, oriented outward
  std::array<Point, 2> tangent{};  // d-1 of them are meaningful
};

inline double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Point outward_direction(const InterfaceFaceSet& faces, std::size_t k) {
  const Point fc = faces.center(k);
  const Point cc = faces.grid.center(faces.in[k]);
  return {fc[0] - cc[0], fc[1] - cc[1], fc[2] - cc[2]};
}

// Total least squares hyperplane through the points; the normal is oriented
// along `outward`. Returns false when the points do not span a hyperplane.
inline bool fit_plane(const std::vector<Point>& pts, int dim, const Point& outward, LocalFrame& fr) {
  if (pts.size() < static_cast<std::size_t>(dim + 1)) return false;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Point& p : pts) mean += Eigen::Vector3d(p[0], p[1], p[2]);
  mean /= static_cast<double>(pts.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const Point& p : pts) {
    Eigen::VectorXd q(dim);
    for (int a = 0; a < dim; ++a) q[a] = p[a] - mean[a];
    cov += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues();  // ascending
  if (ev[1] <= 1e-12 * std::max(1.0, ev[dim - 1])) return false;
  fr.origin = {mean[0], mean[1], mean[2]};
  for (int a = 0; a < dim; ++a) fr.normal[a] = es.eigenvectors()(a, 0);
  for (int a = dim; a < 3; ++a) fr.normal[a] = 0.0;
  if (dot(fr.normal, outward) < 0.0) {
    for (double& x : fr.normal) x = -x;
  }
  for (int t = 0; t + 1 < dim; ++t) {
    for (int a = 0; a < dim; ++a) fr.tangent[t][a] = es.eigenvectors()(a, t + 1);
  }
  return true;
}

}  // namespace detail

struct ContactSample {
  Point location{};
  double cosine = 0.0;
  double beta = 0.0;
  std::size_t points = 0;
  bool ok = false;
};

struct ContactProfile {
  std::vector<ContactSample> samples;
  double mean_cosine = 0.0;
  double mean_beta = 0.0;
  std::size_t ok = 0;
  std::size_t flagged = 0;
};

/// Contact-line locations are the bottom edges shared by a wetted and a dry
/// bottom cell (walls of the box excluded). At each one the interface face
/// centers within `window` are fitted by a line (plane in 3D); the cosine is
/// the vertical component of the outward normal.
inline ContactProfile contact_angle_profile(const SetMask& mask, const BetaField& beta, double window) {
  const HalfSpaceGrid& g = mask.grid();
  require_same_grid(g, beta.grid(), "contact_angle_profile");
  if (!(window >= 3.0 * g.spacing())) throw std::invalid_argument("contact_angle_profile: window must be >= 3h");
  const double h = g.spacing();
  const int v = g.vertical_axis();
  const InterfaceFaceSet faces = interface_faces(mask);
  ContactProfile prof;

  auto sample_at = [&](const Point& loc, std::size_t col) {
    ContactSample s;
    s.location = loc;
    s.beta = beta[col];
    std::vector<Point> pts;
    Point outward{0, 0, 0};
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const Point p = faces.center(k);
      double d2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) d2 += (p[a] - loc[a]) * (p[a] - loc[a]);
      if (d2 > window * window) continue;
      pts.push_back(p);
      const Point o = detail::outward_direction(faces, k);
      for (int a = 0; a < 3; ++a) outward[a] += o[a];
    }
    s.points = pts.size();
    detail::LocalFrame fr;
    if (detail::fit_plane(pts, g.dim(), outward, fr)) {
      s.ok = true;
      s.cosine = fr.normal[v];
    }
    prof.samples.push_back(s);
  };

  for (std::size_t col = 0; col < g.columns(); ++col) {
    const Cell c = g.cell(col);
    for (int a = 0; a < v; ++a) {
      Cell n = c;
      n[a] += 1;
      if (!g.contains(n)) continue;
      const std::size_t ni = g.index(n);
      if (mask[col] == mask[ni]) continue;
      Point loc = g.center(c);
      loc[a] = n[a] * h;
      loc[v] = 0.0;
      sample_at(loc, mask[col] ? col : g.column_of(ni));
    }
  }
  double sc = 0.0, sb = 0.0;
  for (const auto& s : prof.samples) {
    if (!s.ok) {
      ++prof.flagged;
      continue;
    }
    ++prof.ok;
    sc += s.cosine;
    sb += s.beta;
  }
  if (prof.ok > 0) {
    prof.mean_cosine = sc / prof.ok;
    prof.mean_beta = sb / prof.ok;
  }
  return prof;
}

struct VelocitySample {
  Point x{};
  double v = 0.0;
  double curvature = 0.0;
  std::size_t points = 0;
  bool fit_ok = false;
};

struct VelocityReport {
  std::vector<VelocitySample> samples;
  double median_relative_deviation = 0.0;
  double median_abs_velocity = 0.0;
  double median_abs_curvature = 0.0;
  double dissipation = 0.0;  // sum of v^2 h^{d-1} over the samples
  std::size_t flagged = 0;
};

namespace detail {

inline double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const std::size_t m = x.size() / 2;
  std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), x.end());
  double hi = x[m];
  if (x.size() % 2 == 1) return hi;
  const double lo = *std::max_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

// Mean curvature (sum of principal curvatures, positive for convex sets) of
// the points around `x`, fitted as a quadratic graph over the tangent frame.
inline bool fit_curvature(const std::vector<Point>& pts, int dim, const Point& x, const Point& outward,
                          double& H) {
  LocalFrame fr;
  if (!fit_plane(pts, dim, outward, fr)) return false;
  const int unknowns = dim == 2 ? 3 : 6;
  if (pts.size() < static_cast<std::size_t>(unknowns + 1)) return false;
  Eigen::MatrixXd A(pts.size(), unknowns);
  Eigen::VectorXd b(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point q{pts[i][0] - x[0], pts[i][1] - x[1], pts[i][2] - x[2]};
    const double s = dot(q, fr.tangent[0]);
    b[i] = dot(q, fr.normal);
    if (dim == 2) {
      A.row(i) << 1.0, s, s * s;
    } else {
      const double r = dot(q, fr.tangent[1]);
      A.row(i) << 1.0, s, r, s * s, s * r, r * r;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < unknowns) return false;
  const Eigen::VectorXd c = qr.solve(b);
  if (dim == 2) {
    const double fs = c[1], fss = 2.0 * c[2];
    H = -fss / std::pow(1.0 + fs * fs, 1.5);
  } else {
    const double fs = c[1], fr_ = c[2], fss = 2.0 * c[3], fsr = c[4], frr = 2.0 * c[5];
    H = -((1.0 + fr_ * fr_) * fss - 2.0 * fs * fr_ * fsr + (1.0 + fs * fs) * frr) /
        std::pow(1.0 + fs * fs + fr_ * fr_, 1.5);
  }
  return std::isfinite(H);
}

}  // namespace detail

/// Discrete normal velocity v = -lambda * d_prev at the interface face centers of
/// `next`, against an osculating fit of next's interface within `window`.
/// Relative deviation per sample is |v - H| / max(|v|, |H|) (0 when both vanish).
inline VelocityReport velocity_curvature_report(const SetMask& prev, const SetMask& next, double lambda,
                                                double window) {
  const HalfSpaceGrid& g = next.grid();
  require_same_grid(g, prev.grid(), "velocity_curvature_report");
  if (next.empty()) throw std::invalid_argument("velocity_curvature_report: next must be nonempty");
  if (!(window > 0.0)) throw std::invalid_argument("velocity_curvature_report: window must be positive");
  const RefinedDistance rd(prev);
  const InterfaceFaceSet faces = interface_faces(next);
  const double area = g.face_area();
  VelocityReport rep;
  std::vector<double> dev, av, ak;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    VelocitySample s;
    s.x = faces.center(k);
    // The cell across the face from the in-cell decides the sign.
    const Cell in = g.cell(faces.in[k]);
    Cell out = in;
    for (int a = 0; a < g.dim(); ++a) {
      const int diff = faces.faces[k][a] - (2 * in[a] + 1);
      out[a] = in[a] + diff;
    }
    const bool a_in = prev.test(in), b_in = prev.test(out);
    const double d = rd.distance(faces.faces[k]);
    double signed_d = 0.0;
    if (a_in && b_in) {
      signed_d = -d;
    } else if (!a_in && !b_in) {
      signed_d = d;
    }
    s.v = std::isinf(signed_d) ? std::numeric_limits<double>::infinity() : -lambda * signed_d;
    std::vector<Point> pts;
    for (std::size_t j = 0; j < faces.size(); ++j) {
      const Point p = faces.center(j);
      double d2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) d2 += (p[a] - s.x[a]) * (p[a] - s.x[a]);
      if (d2 <= window * window) pts.push_back(p);
    }
    s.points = pts.size();
    s.fit_ok = std::isfinite(s.v) &&
               detail::fit_curvature(pts, g.dim(), s.x, detail::outward_direction(faces, k), s.curvature);
    if (std::isfinite(s.v)) rep.dissipation += s.v * s.v * area;
    if (s.fit_ok) {
      const double scale = std::max(std::abs(s.v), std::abs(s.curvature));
      dev.push_back(scale > 0.0 ? std::abs(s.v - s.curvature) / scale : 0.0);
      av.push_back(std::abs(s.v));
      ak.push_back(std::abs(s.curvature));
    } else {
      ++rep.flagged;
    }
    rep.samples.push_back(s);
  }
  rep.median_relative_deviation = detail::median(dev);
  rep.median_abs_velocity = detail::median(av);
  rep.median_abs_curvature = detail::median(ak);
  return rep;
}

/// Boundary measure of the wetted footprint inside the plane: the number of
/// contact points in 2D, the footprint perimeter (axis count times h) in 3D.
inline double trace_perimeter(const SetMask& mask) {
  const HalfSpaceGrid& g = mask.grid();
  const int v = g.vertical_axis();
  std::size_t cuts = 0;
  for (std::size_t col = 0; col < g.columns(); ++col) {
    if (!mask[col]) continue;
    const Cell c = g.cell(col);
    for (int a = 0; a < v; ++a) {
      for (int s : {-1, 1}) {
        Cell n = c;
        n[a] += s;
        if (!mask.test(n)) ++cuts;
      }
    }
  }
  return static_cast<double>(cuts) * std::pow(g.spacing(), g.dim() - 2);
}

struct DissipationLedger {
  double cumulative = 0.0;   // sum over steps of lambda * fidelity
  double capillary0 = 0.0;   // capillary energy of E_0
  bool energy_nonincreasing = true;
  bool bounded = true;
  std::size_t first_violation = 0;  // step index, 0 when none
};

/// Per-step inequality capillary(k) + fidelity(k) <= capillary(k-1) and its
/// telescoped consequence. Comparisons allow one part in 1e12 for summation order.
inline DissipationLedger dissipation_ledger(const Trajectory& tr) {
  DissipationLedger l;
  if (tr.frames.empty()) return l;
  l.capillary0 = tr.frames[0].metrics.capillary_total;
  const double slack = 1e-12 * (1.0 + std::abs(l.capillary0));
  for (std::size_t k = 1; k < tr.frames.size(); ++k) {
    const StepMetrics& m = tr.frames[k].metrics;
    const StepMetrics& p = tr.frames[k - 1].metrics;
    if (m.capillary_total > p.capillary_total + slack || m.capillary_total + m.fidelity > p.capillary_total + slack) {
      if (l.energy_nonincreasing) l.first_violation = k;
      l.energy_nonincreasing = false;
    }
    l.cumulative = m.dissipation_cum;
  }
  l.bounded = l.cumulative <= l.capillary0 + slack;
  return l;
}

inline nlohmann::json to_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"points", f.points}};
}

inline nlohmann::json to_json(const DensityRow& r) {
  return {{"r", r.r}, {"min_fraction", r.min_fraction}, {"max_fraction", r.max_fraction}, {"centers", r.centers}};
}

inline nlohmann::json to_json(const ContactProfile& p) {
  return {{"samples", p.samples.size()},
          {"ok", p.ok},
          {"flagged", p.flagged},
          {"mean_cosine", p.mean_cosine},
          {"mean_beta", p.mean_beta}};
}

inline nlohmann::json to_json(const DissipationLedger& l) {
  return {{"cumulative", l.cumulative},
          {"capillary0", l.capillary0},
          {"energy_nonincreasing", l.energy_nonincreasing},
          {"bounded", l.bounded},
          {"first_violation", l.first_violation}};
}

inline void write_contact_csv(std::ostream& os, const ContactProfile& p) {
  os << "x,y,z,cosine,beta,points,ok\n";
  os.precision(17);
  for (const auto& s : p.samples) {
    os << s.location[0] << ',' << s.location[1] << ',' << s.location[2] << ',' << s.cosine << ',' << s.beta << ','
       << s.points << ',' << (s.ok ? 1 : 0) << '\n';
  }
}

inline void write_velocity_csv(std::ostream& os, const VelocityReport& r) {
  os << "x,y,z,v,curvature,points,fit_ok\n";
  os.precision(17);
  for (const auto& s : r.samples) {
    os << s.x[0] << ',' << s.x[1] << ',' << s.x[2] << ',' << s.v << ',' << s.curvature << ',' << s.points << ','
       << (s.fit_ok ? 1 : 0) << '\n';
  }
}

}  // namespace capflow
