#pragma once

// Hemispheroidal harmonic basis, least-squares decomposition, truncated
// reconstruction, and quasi-uniform hemispheroid sampling.
//
// The basis is the fully normalized associated Legendre function evaluated at
// the shifted argument xi_hat(eta), times real azimuthal modes:
//   column (n, 0)   =        Pbar(n, 0, xi)
//   column (n, m>0) = sqrt2 * Pbar(n, m, xi) * cos(m phi)
//   column (n, m<0) = sqrt2 * Pbar(n,|m|, xi) * sin(|m| phi)
// orthonormal under the measure d(xi_hat) d(phi). The normalization is
// carried inside the recurrences so no factorial ever materializes; values
// stay finite for degrees well past 100.

#include "hemiparam/parallel.hpp"
#include "hemiparam/projection.hpp"

#include <random>

namespace hemiparam {

// Fully normalized associated Legendre value
//   Pbar(n,m,x) = sqrt((2n+1)(n-m)! / (4 pi (n+m)!)) * P_n^m(x)
// (no Condon-Shortley phase), by ascending recurrence in normalized form.
inline double alp_normalized(int n, int m, double xhat) {
  if (m < 0 || m > n) throw std::invalid_argument("alp_normalized requires 0 <= m <= n");
  if (std::abs(xhat) > 1.0) throw std::invalid_argument("alp_normalized requires |xhat| <= 1");
  const double s = std::sqrt((1.0 - xhat) * (1.0 + xhat));
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int k = 1; k <= m; ++k)
    pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * s;
  if (n == m) return pmm;
  double pm1 = pmm;                                  // Pbar(m, m)
  double p = std::sqrt(2.0 * m + 3.0) * xhat * pmm;  // Pbar(m+1, m)
  for (int k = m + 2; k <= n; ++k) {
    double a = std::sqrt((4.0 * k * k - 1.0) / (static_cast<double>(k) * k - static_cast<double>(m) * m));
    double b = std::sqrt(((2.0 * k + 1.0) * ((k - 1.0) * (k - 1.0) - static_cast<double>(m) * m)) /
                         ((2.0 * k - 3.0) * (static_cast<double>(k) * k - static_cast<double>(m) * m)));
    double next = a * xhat * p - b * pm1;
    pm1 = p;
    p = next;
  }
  return p;
}

namespace detail {

// All Pbar(n, m) for 0 <= m <= n <= n_max at one argument; out is indexed by
// n(n+1)/2 + m. One pass of the same recurrences as alp_normalized.
inline void alp_normalized_all(int n_max, double xhat, std::vector<double>& out) {
  const int sz = (n_max + 1) * (n_max + 2) / 2;
  out.resize(sz);
  auto at = [&](int n, int m) -> double& { return out[n * (n + 1) / 2 + m]; };
  const double s = std::sqrt((1.0 - xhat) * (1.0 + xhat));
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  for (int m = 0; m <= n_max; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    at(m, m) = pmm;
    if (m + 1 <= n_max) at(m + 1, m) = std::sqrt(2.0 * m + 3.0) * xhat * pmm;
    for (int n = m + 2; n <= n_max; ++n) {
      double nn = static_cast<double>(n) * n, mm = static_cast<double>(m) * m;
      double a = std::sqrt((4.0 * nn - 1.0) / (nn - mm));
      double b = std::sqrt(((2.0 * n + 1.0) * ((n - 1.0) * (n - 1.0) - mm)) /
                           ((2.0 * n - 3.0) * (nn - mm)));
      at(n, m) = a * xhat * at(n - 1, m) - b * at(n - 2, m);
    }
  }
}

}  // namespace detail

// Flat column index of the (n, m) basis function, m in [-n, n].
inline int basis_index(int n, int m) { return n * n + n + m; }

inline int basis_size(int n_max) { return (n_max + 1) * (n_max + 1); }

// Dense evaluation of all basis functions at the given surface coordinates;
// rows follow the input points, columns are ordered by basis_index.
inline Eigen::MatrixXd basis_matrix(const std::vector<SpheroidalCoords>& points,
                                    int n_max, SpheroidKind kind) {
  if (n_max < 0) throw std::invalid_argument("basis_matrix requires n_max >= 0");
  const int np = static_cast<int>(points.size());
  const int nc = basis_size(n_max);
  Eigen::MatrixXd B(np, nc);
  const double sqrt2 = std::sqrt(2.0);
  detail::parallel_chunks(np, [&](int /*chunk*/, int begin, int end) {
    std::vector<double> alp;
    std::vector<double> cosm(n_max + 1), sinm(n_max + 1);
    for (int i = begin; i < end; ++i) {
      double xi = xi_hat(points[i].eta, kind);
      detail::alp_normalized_all(n_max, xi, alp);
      for (int m = 0; m <= n_max; ++m) {
        cosm[m] = std::cos(m * points[i].phi);
        sinm[m] = std::sin(m * points[i].phi);
      }
      for (int n = 0; n <= n_max; ++n) {
        for (int m = 0; m <= n; ++m) {
          double p = alp[n * (n + 1) / 2 + m];
          if (m == 0) {
            B(i, basis_index(n, 0)) = p;
          } else {
            B(i, basis_index(n, m)) = sqrt2 * p * cosm[m];
            B(i, basis_index(n, -m)) = sqrt2 * p * sinm[m];
          }
        }
      }
    }
  });
  return B;
}

struct HarmonicCoeffs {
  int n_max = 0;
  Eigen::MatrixXd coeffs;  // basis_size(n_max) x 3, channels (x, y, z)
  Spheroid spheroid;
  double eps_eta = kDefaultEpsEta;
  RigidTransform registration;  // original pose -> registered pose
  double fit_rms_residual = 0;
};

// Least-squares expansion of per-vertex values over the mapped hemispheroid
// positions. Normal equations up to 1600 columns, QR beyond that.
inline HarmonicCoeffs decompose(const SurfaceMap& hemi, const Points3& values,
                                const Spheroid& s, int n_max,
                                double eps_eta = kDefaultEpsEta,
                                const RigidTransform& registration = {},
                                const Eigen::VectorXd* point_weights = nullptr) {
  const int np = static_cast<int>(hemi.rows());
  const int nc = basis_size(n_max);
  if (values.rows() != np) throw std::invalid_argument("decompose: value/position count mismatch");
  if (np < nc)
    throw MeshError("decompose: " + std::to_string(np) + " points cannot determine " +
                    std::to_string(nc) + " coefficients; lower n_max");
  auto coords = to_eta_phi(hemi, s, eps_eta);
  Eigen::MatrixXd B = basis_matrix(coords, n_max, s.kind);
  Eigen::MatrixXd rhs = values;
  if (point_weights) {
    if (point_weights->size() != np)
      throw std::invalid_argument("decompose: weight count mismatch");
    Eigen::VectorXd sq = point_weights->cwiseMax(0.0).cwiseSqrt();
    B = sq.asDiagonal() * B;
    rhs = sq.asDiagonal() * rhs;
  }

  HarmonicCoeffs out;
  out.n_max = n_max;
  out.spheroid = s;
  out.eps_eta = eps_eta;
  out.registration = registration;
  if (nc <= 1600) {
    Eigen::MatrixXd G = B.transpose() * B;
    Eigen::MatrixXd r = B.transpose() * rhs;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    out.coeffs = ldlt.solve(r);
    double rel = (G * out.coeffs - r).norm() / std::max(r.norm(), 1e-300);
    if (!out.coeffs.allFinite() || rel > 1e-6)
      throw MeshError("decompose: rank-deficient system; lower n_max or use more points");
  } else {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
    out.coeffs = qr.solve(rhs);
    if (!out.coeffs.allFinite())
      throw MeshError("decompose: rank-deficient system; lower n_max or use more points");
  }
  out.fit_rms_residual = std::sqrt((B * out.coeffs - rhs).squaredNorm() / np);
  return out;
}

// Truncated expansion (degrees up to n_upto) evaluated at the given points,
// in the registered pose.
inline Points3 reconstruct(const HarmonicCoeffs& coeffs,
                           const std::vector<SpheroidalCoords>& points, int n_upto) {
  if (n_upto < 0 || n_upto > coeffs.n_max)
    throw std::invalid_argument("reconstruct: n_upto out of range");
  Eigen::MatrixXd B = basis_matrix(points, n_upto, coeffs.spheroid.kind);
  return B * coeffs.coeffs.topRows(basis_size(n_upto));
}

inline Points3 reconstruct_original_pose(const HarmonicCoeffs& coeffs,
                                         const std::vector<SpheroidalCoords>& points,
                                         int n_upto) {
  return coeffs.registration.inverse().apply(reconstruct(coeffs, points, n_upto));
}

// ---------------------------------------------------------------------------
// Quasi-uniform sampling of the hemispheroid surface
// ---------------------------------------------------------------------------

namespace detail {

// Bowyer-Watson Delaunay triangulation. Points are expected in general
// position up to ties on a common circle, which are broken conservatively.
class DelaunayBW {
 public:
  explicit DelaunayBW(const Points2& pts) : pts_(pts.rows() + 3, 2) {
    const int n = static_cast<int>(pts.rows());
    Vec2 lo = pts.colwise().minCoeff(), hi = pts.colwise().maxCoeff();
    Vec2 mid = 0.5 * (lo + hi);
    double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-12});
    double R = 64.0 * span;
    pts_.topRows(n) = pts;
    pts_.row(n + 0) = mid + Vec2(0, 2.0 * R);
    pts_.row(n + 1) = mid + Vec2(-1.8 * R, -R);
    pts_.row(n + 2) = mid + Vec2(1.8 * R, -R);
    tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    int last = 0;
    for (int i = 0; i < n; ++i) last = insert(i, last);
  }

  std::vector<std::array<int, 3>> triangles() const {
    const int n = static_cast<int>(pts_.rows()) - 3;
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
      out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
  }

 private:
  struct Tri {
    int v[3];
    int nbr[3];  // nbr[k] is across the edge opposite v[k]
    bool alive;
  };

  static long double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (static_cast<long double>(b.x()) - a.x()) * (static_cast<long double>(c.y()) - a.y()) -
           (static_cast<long double>(b.y()) - a.y()) * (static_cast<long double>(c.x()) - a.x());
  }

  bool in_circumcircle(const Tri& t, const Vec2& p) const {
    Vec2 a = pts_.row(t.v[0]), b = pts_.row(t.v[1]), c = pts_.row(t.v[2]);
    long double ax = a.x() - p.x(), ay = a.y() - p.y();
    long double bx = b.x() - p.x(), by = b.y() - p.y();
    long double cx = c.x() - p.x(), cy = c.y() - p.y();
    long double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                      (bx * bx + by * by) * (ax * cy - cx * ay) +
                      (cx * cx + cy * cy) * (ax * by - bx * ay);
    // strict test: cocircular ties stay out of the cavity
    long double scale = (ax * ax + ay * ay) + (bx * bx + by * by) + (cx * cx + cy * cy);
    return det > 1e-24L * std::max(scale * scale, 1e-30L);
  }

  int locate(const Vec2& p, int hint) const {
    int cur = hint;
    if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !tris_[cur].alive) {
      cur = -1;
      for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
        if (tris_[i].alive) { cur = i; break; }
    }
    for (int guard = 0; guard < 4 * static_cast<int>(tris_.size()) + 16; ++guard) {
      const Tri& t = tris_[cur];
      int step = -1;
      for (int k = 0; k < 3; ++k) {
        Vec2 e0 = pts_.row(t.v[(k + 1) % 3]), e1 = pts_.row(t.v[(k + 2) % 3]);
        if (orient(e0, e1, p) < 0) {
          if (t.nbr[k] >= 0) { step = t.nbr[k]; break; }
        }
      }
      if (step < 0) return cur;
      cur = step;
    }
    return cur;  // walk guard tripped; cavity search below still corrects this
  }

  int insert(int vi, int hint) {
    Vec2 p = pts_.row(vi);
    int seed = locate(p, hint);
    // grow the cavity of circumcircle-violating triangles
    std::vector<int> cavity;
    std::vector<char> mark(tris_.size(), 0);
    std::vector<int> stack{seed};
    mark[seed] = 1;
    while (!stack.empty()) {
      int ti = stack.back();
      stack.pop_back();
      if (!tris_[ti].alive) continue;
      if (ti != seed && !in_circumcircle(tris_[ti], p)) continue;
      cavity.push_back(ti);
      for (int k = 0; k < 3; ++k) {
        int nb = tris_[ti].nbr[k];
        if (nb >= 0 && !mark[nb]) {
          mark[nb] = 1;
          stack.push_back(nb);
        }
      }
    }
    // boundary edges of the cavity, directed so the cavity is on the left
    struct BEdge { int a, b, outer; };
    std::vector<BEdge> border;
    std::vector<char> in_cavity(tris_.size(), 0);
    for (int ti : cavity) in_cavity[ti] = 1;
    for (int ti : cavity) {
      const Tri& t = tris_[ti];
      for (int k = 0; k < 3; ++k) {
        int nb = t.nbr[k];
        if (nb < 0 || !in_cavity[nb])
          border.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], nb});
      }
    }
    for (int ti : cavity) tris_[ti].alive = false;
    // fan from the new vertex; link neighbors by shared edges
    std::map<std::pair<int, int>, int> edge_owner;
    int first_new = static_cast<int>(tris_.size());
    for (const auto& e : border) {
      Tri nt{{vi, e.a, e.b}, {e.outer, -1, -1}, true};
      int nti = static_cast<int>(tris_.size());
      tris_.push_back(nt);
      if (e.outer >= 0) {
        Tri& o = tris_[e.outer];
        for (int k = 0; k < 3; ++k)
          if ((o.v[(k + 1) % 3] == e.b && o.v[(k + 2) % 3] == e.a)) o.nbr[k] = nti;
      }
      edge_owner[{vi, e.a}] = nti;      // edge opposite v[2]=e.b is (vi, e.a)
      edge_owner[{e.b, vi}] = nti;      // edge opposite v[1]=e.a is (e.b, vi)
    }
    for (int ti = first_new; ti < static_cast<int>(tris_.size()); ++ti) {
      Tri& t = tris_[ti];
      // nbr[1] across (v2, v0) = (e.b, vi); nbr[2] across (v0, v1) = (vi, e.a)
      auto it1 = edge_owner.find({t.v[0], t.v[2]});  // reversed (v2, v0)
      if (it1 != edge_owner.end() && it1->second != ti) t.nbr[1] = it1->second;
      auto it2 = edge_owner.find({t.v[1], t.v[0]});  // reversed (v0, v1)
      if (it2 != edge_owner.end() && it2->second != ti) t.nbr[2] = it2->second;
    }
    return first_new;
  }

  Points2 pts_;
  std::vector<Tri> tris_;
};

}  // namespace detail

// Quasi-uniform points on the Northern hemispheroid: a golden-angle spiral in
// the surface-area measure plus an explicit equator ring, triangulated by a
// Delaunay pass on the projected disk. Deterministic.
inline std::pair<std::vector<SpheroidalCoords>, TriMesh> sample_uniform_hemispheroid(
    const Spheroid& s, int count) {
  if (count < 4) throw std::invalid_argument("sample_uniform_hemispheroid needs count >= 4");

  // cumulative surface area A(eta) on a fine grid
  const int ngrid = 4096;
  std::vector<double> eta_grid(ngrid + 1), cum(ngrid + 1);
  double acc = 0;
  cum[0] = 0;
  eta_grid[0] = 0;
  auto darea = [&](double eta) {
    double ce = std::cos(eta), se = std::sin(eta);
    return s.a * ce * std::sqrt(s.c * s.c * ce * ce + s.a * s.a * se * se);
  };
  for (int i = 1; i <= ngrid; ++i) {
    double e0 = kPi / 2.0 * (i - 1) / ngrid, e1 = kPi / 2.0 * i / ngrid;
    acc += 0.5 * (darea(e0) + darea(e1)) * (e1 - e0) * 2.0 * kPi;
    eta_grid[i] = e1;
    cum[i] = acc;
  }
  const double total_area = cum[ngrid];
  const double h = std::sqrt(total_area / count);

  int n_ring = std::clamp(static_cast<int>(std::llround(2.0 * kPi * s.a / h)), 3, count - 1);
  int n_int = count - n_ring;

  auto eta_at_area = [&](double a_target) {
    auto it = std::lower_bound(cum.begin(), cum.end(), a_target);
    if (it == cum.begin()) return 0.0;
    if (it == cum.end()) return kPi / 2.0;
    size_t i = static_cast<size_t>(it - cum.begin());
    double t = (a_target - cum[i - 1]) / std::max(cum[i] - cum[i - 1], 1e-300);
    return eta_grid[i - 1] + t * (eta_grid[i] - eta_grid[i - 1]);
  };

  std::vector<SpheroidalCoords> coords;
  coords.reserve(count);
  for (int j = 0; j < n_ring; ++j)
    coords.push_back({0.0, 2.0 * kPi * j / n_ring});
  const double golden = 0.6180339887498949;  // 1/phi
  const double a0 = std::min(kPi * s.a * h, 0.5 * total_area);  // half-spacing band at the rim
  for (int i = 0; i < n_int; ++i) {
    double frac = (i + 0.5) / n_int;
    double target = a0 + frac * (total_area - a0);
    double phi = 2.0 * kPi * std::fmod(i * golden, 1.0);
    coords.push_back({eta_at_area(target), phi});
  }

  Points3 V(count, 3);
  Points2 disk(count, 2);
  for (int i = 0; i < count; ++i) {
    V.row(i) = eta_phi_to_point(coords[i], s);
    disk.row(i) = spheroidal_projection(Vec3(V.row(i)), s);
  }

  detail::DelaunayBW dt(disk);
  auto tris = dt.triangles();
  FaceList F(static_cast<int>(tris.size()), 3);
  for (size_t f = 0; f < tris.size(); ++f)
    F.row(static_cast<int>(f)) << tris[f][0], tris[f][1], tris[f][2];
  TriMesh mesh = make_mesh(std::move(V), std::move(F));
  return {std::move(coords), std::move(mesh)};
}

}  // namespace hemiparam
