#pragma once

// Quasi-conformal machinery shared by the parameterization pipelines:
// per-face Beltrami coefficients, the Linear Beltrami Solver, piecewise
// linear map inversion, and fold repair.

#include "hemiparam/mesh.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <complex>

namespace hemiparam {

using Complex = std::complex<double>;

// Per-face complex distortion coefficients mu = f_zbar / f_z. |mu| < 1 for an
// orientation-preserving map; faces with |mu| >= 1 (or non-finite mu) are
// folded.
struct BeltramiField {
  Eigen::VectorXcd values;

  int size() const { return static_cast<int>(values.size()); }

  bool folded(int f) const {
    Complex m = values[f];
    return !std::isfinite(m.real()) || !std::isfinite(m.imag()) || std::abs(m) >= 1.0;
  }

  int folded_count() const {
    int n = 0;
    for (int f = 0; f < size(); ++f)
      if (folded(f)) ++n;
    return n;
  }

  double max_abs() const {
    double m = 0;
    for (int f = 0; f < size(); ++f) m = std::max(m, std::abs(values[f]));
    return m;
  }

  double mean_abs() const {
    if (size() == 0) return 0;
    double s = 0;
    for (int f = 0; f < size(); ++f) s += std::abs(values[f]);
    return s / size();
  }
};

inline double signed_area_2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

inline int flipped_face_count(const Points2& pts, const FaceList& F) {
  int flips = 0;
  for (int f = 0; f < F.rows(); ++f)
    if (signed_area_2d(pts.row(F(f, 0)), pts.row(F(f, 1)), pts.row(F(f, 2))) <= 0)
      ++flips;
  return flips;
}

// Isometric flattening of a 3D triangle: first edge along +x, interior in the
// upper half plane of the face frame.
inline std::array<Vec2, 3> flatten_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 e1 = b - a;
  double l1 = e1.norm();
  if (!(l1 > 0)) throw MeshError("degenerate 3D face (zero edge)");
  e1 /= l1;
  Vec3 n = (b - a).cross(c - a);
  double nn = n.norm();
  if (!(nn > 0)) throw MeshError("degenerate 3D face (zero area)");
  Vec3 e2 = (n / nn).cross(e1);
  Vec3 ac = c - a;
  return {Vec2(0, 0), Vec2(l1, 0), Vec2(ac.dot(e1), ac.dot(e2))};
}

namespace detail {

// Beltrami coefficient of the affine map taking triangle (s0,s1,s2) to
// (t0,t1,t2).
inline Complex beltrami_of_affine(const Vec2& s0, const Vec2& s1, const Vec2& s2,
                                  const Vec2& t0, const Vec2& t1, const Vec2& t2,
                                  int face_for_error) {
  Eigen::Matrix2d S, T;
  S.col(0) = s1 - s0;
  S.col(1) = s2 - s0;
  T.col(0) = t1 - t0;
  T.col(1) = t2 - t0;
  double det = S.determinant();
  if (det == 0)
    throw MeshError("degenerate source face " + std::to_string(face_for_error));
  Eigen::Matrix2d J = T * S.inverse();  // [[u_x, u_y],[v_x, v_y]]
  Complex fz(0.5 * (J(0, 0) + J(1, 1)), 0.5 * (J(1, 0) - J(0, 1)));
  Complex fzbar(0.5 * (J(0, 0) - J(1, 1)), 0.5 * (J(1, 0) + J(0, 1)));
  if (fz == Complex(0, 0))
    return Complex(std::numeric_limits<double>::infinity(), 0);
  return fzbar / fz;
}

}  // namespace detail

inline BeltramiField beltrami_from_planar_map(const Points2& source,
                                              const Points2& target,
                                              const FaceList& F) {
  BeltramiField mu;
  mu.values.resize(F.rows());
  for (int f = 0; f < F.rows(); ++f) {
    int i = F(f, 0), j = F(f, 1), k = F(f, 2);
    mu.values[f] = detail::beltrami_of_affine(source.row(i), source.row(j),
                                              source.row(k), target.row(i),
                                              target.row(j), target.row(k), f);
  }
  return mu;
}

// Beltrami of a map from a curved surface to the plane; each source face is
// flattened in its own isometric frame first.
inline BeltramiField beltrami_from_surface_map(const TriMesh& mesh,
                                               const Points2& target) {
  BeltramiField mu;
  mu.values.resize(mesh.F.rows());
  for (int f = 0; f < mesh.F.rows(); ++f) {
    int i = mesh.F(f, 0), j = mesh.F(f, 1), k = mesh.F(f, 2);
    auto s = flatten_triangle(mesh.V.row(i), mesh.V.row(j), mesh.V.row(k));
    mu.values[f] = detail::beltrami_of_affine(s[0], s[1], s[2], target.row(i),
                                              target.row(j), target.row(k), f);
  }
  return mu;
}

// Beltrami of a map from the plane onto a surface (target faces flattened).
inline BeltramiField beltrami_disk_to_surface(const Points2& source,
                                              const Points3& target,
                                              const FaceList& F) {
  BeltramiField mu;
  mu.values.resize(F.rows());
  for (int f = 0; f < F.rows(); ++f) {
    int i = F(f, 0), j = F(f, 1), k = F(f, 2);
    auto t = flatten_triangle(target.row(i), target.row(j), target.row(k));
    mu.values[f] = detail::beltrami_of_affine(source.row(i), source.row(j),
                                              source.row(k), t[0], t[1], t[2], f);
  }
  return mu;
}

// Beltrami of a surface-to-surface map via per-face isometric frames on both
// sides.
inline BeltramiField beltrami_surface_to_surface(const Points3& source,
                                                 const Points3& target,
                                                 const FaceList& F) {
  BeltramiField mu;
  mu.values.resize(F.rows());
  for (int f = 0; f < F.rows(); ++f) {
    int i = F(f, 0), j = F(f, 1), k = F(f, 2);
    auto s = flatten_triangle(source.row(i), source.row(j), source.row(k));
    auto t = flatten_triangle(target.row(i), target.row(j), target.row(k));
    mu.values[f] = detail::beltrami_of_affine(s[0], s[1], s[2], t[0], t[1], t[2], f);
  }
  return mu;
}

// Replaces folded coefficients by the average over face-adjacent non-folded
// ones (zero if none), then radially caps every coefficient at mu_cap.
inline BeltramiField repair_folds(const BeltramiField& mu, const FaceList& F,
                                  double mu_cap = 0.95) {
  BeltramiField out = mu;
  // face adjacency through shared edges
  std::map<std::pair<int, int>, std::array<int, 2>> edge_face;
  std::vector<std::array<int, 3>> nbr(F.rows(), {-1, -1, -1});
  for (int f = 0; f < F.rows(); ++f)
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(F(f, k), F(f, (k + 1) % 3));
      auto it = edge_face.find(key);
      if (it == edge_face.end()) {
        edge_face[key] = {f, -1};
      } else {
        it->second[1] = f;
      }
    }
  for (const auto& [key, fp] : edge_face) {
    if (fp[1] < 0) continue;
    for (int s = 0; s < 3; ++s) {
      if (nbr[fp[0]][s] < 0) { nbr[fp[0]][s] = fp[1]; break; }
    }
    for (int s = 0; s < 3; ++s) {
      if (nbr[fp[1]][s] < 0) { nbr[fp[1]][s] = fp[0]; break; }
    }
  }
  int repaired = 0;
  for (int f = 0; f < mu.size(); ++f) {
    if (mu.folded(f)) {
      Complex acc(0, 0);
      int cnt = 0;
      for (int s = 0; s < 3; ++s) {
        int g = nbr[f][s];
        if (g >= 0 && !mu.folded(g)) {
          acc += mu.values[g];
          ++cnt;
        }
      }
      out.values[f] = cnt > 0 ? acc / static_cast<double>(cnt) : Complex(0, 0);
      ++repaired;
    }
  }
  for (int f = 0; f < out.size(); ++f) {
    double m = std::abs(out.values[f]);
    if (m > mu_cap) out.values[f] *= mu_cap / m;
  }
  if (repaired > 0)
    detail::warn("repair_folds: repaired " + std::to_string(repaired) + " face(s)");
  return out;
}

namespace detail {

// Solves A x = b column-wise with Dirichlet values at fixed indices.
// A must be symmetric positive definite on the free set.
inline Eigen::MatrixXd solve_dirichlet(const Eigen::SparseMatrix<double>& A,
                                       const std::vector<int>& fixed,
                                       const Eigen::MatrixXd& fixed_values,
                                       int n, int cols) {
  std::vector<int> where(n, -1);  // position in free list, or -1 if fixed
  std::vector<char> is_fixed(n, 0);
  for (int i : fixed) is_fixed[i] = 1;
  std::vector<int> free_idx;
  free_idx.reserve(n);
  for (int i = 0; i < n; ++i)
    if (!is_fixed[i]) {
      where[i] = static_cast<int>(free_idx.size());
      free_idx.push_back(i);
    }
  const int nf = static_cast<int>(free_idx.size());

  Eigen::MatrixXd x(n, cols);
  for (size_t k = 0; k < fixed.size(); ++k) x.row(fixed[k]) = fixed_values.row(static_cast<int>(k));
  if (nf == 0) return x;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(A.nonZeros());
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nf, cols);
  // map from original fixed index to its row in fixed_values
  std::vector<int> fixed_row(n, -1);
  for (size_t k = 0; k < fixed.size(); ++k) fixed_row[fixed[k]] = static_cast<int>(k);

  for (int col = 0; col < A.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, col); it; ++it) {
      int r = static_cast<int>(it.row()), cc = static_cast<int>(it.col());
      if (is_fixed[r]) continue;
      if (is_fixed[cc]) {
        rhs.row(where[r]) -= it.value() * fixed_values.row(fixed_row[cc]);
      } else {
        trips.emplace_back(where[r], where[cc], it.value());
      }
    }
  }
  Eigen::SparseMatrix<double> Aff(nf, nf);
  Aff.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(Aff);
  Eigen::MatrixXd xf;
  bool ok = solver.info() == Eigen::Success;
  if (ok) {
    xf = solver.solve(rhs);
    ok = solver.info() == Eigen::Success;
  }
  if (ok) {
    double rn = (Aff * xf - rhs).cwiseAbs().maxCoeff();
    double bn = rhs.cwiseAbs().maxCoeff();
    ok = rn < 1e-10 * std::max(bn, 1.0);
  }
  if (!ok) {
    // iterative fallback
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(10LL * n);
    cg.compute(Aff);
    xf = cg.solve(rhs);
    if (cg.info() != Eigen::Success)
      throw MeshError("sparse solve failed (singular system or insufficient constraints)");
  }
  for (int i = 0; i < nf; ++i) x.row(free_idx[i]) = xf.row(i);
  return x;
}

}  // namespace detail

// Generalized Laplacian of the Linear Beltrami Solver: for mu = rho + i tau
// the coefficient matrix per face is
//   1/(1-|mu|^2) * [ (rho-1)^2+tau^2   -2 tau            ]
//                  [ -2 tau            (1+rho)^2+tau^2   ]
// assembled with linear elements over the source layout.
inline Eigen::SparseMatrix<double> lbs_stiffness(const BeltramiField& mu,
                                                 const FaceList& F,
                                                 const Points2& source) {
  const int nv = static_cast<int>(source.rows());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * F.rows());
  for (int f = 0; f < F.rows(); ++f) {
    int idx[3] = {F(f, 0), F(f, 1), F(f, 2)};
    Vec2 p[3] = {source.row(idx[0]), source.row(idx[1]), source.row(idx[2])};
    double area = signed_area_2d(p[0], p[1], p[2]);
    if (!(std::abs(area) > 0))
      throw MeshError("degenerate source face " + std::to_string(f) + " in LBS assembly");
    double rho = mu.values[f].real(), tau = mu.values[f].imag();
    double denom = 1.0 - rho * rho - tau * tau;
    if (!(denom > 0))
      throw MeshError("LBS requires |mu| < 1 (face " + std::to_string(f) + ")");
    Eigen::Matrix2d A;
    A << ((rho - 1) * (rho - 1) + tau * tau) / denom, -2 * tau / denom,
        -2 * tau / denom, ((1 + rho) * (1 + rho) + tau * tau) / denom;
    // hat gradients: grad(lambda_k) = perp(p_{k+2} - p_{k+1}) / (2 area)
    Vec2 grad[3];
    for (int k = 0; k < 3; ++k) {
      Vec2 e = p[(k + 2) % 3] - p[(k + 1) % 3];
      grad[k] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    for (int r = 0; r < 3; ++r)
      for (int cidx = 0; cidx < 3; ++cidx)
        trips.emplace_back(idx[r], idx[cidx],
                           std::abs(area) * grad[r].dot(A * grad[cidx]));
  }
  Eigen::SparseMatrix<double> K(nv, nv);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

// Reconstructs the quasi-conformal map with prescribed Beltrami coefficient
// over the source layout, interpolating the given boundary values exactly.
inline Points2 lbs_solve(const BeltramiField& mu, const FaceList& F,
                         const Points2& source,
                         const std::vector<int>& constrained,
                         const Points2& constrained_values) {
  if (constrained.empty()) throw MeshError("LBS needs boundary constraints");
  Eigen::SparseMatrix<double> K = lbs_stiffness(mu, F, source);
  Eigen::MatrixXd x = detail::solve_dirichlet(K, constrained, constrained_values,
                                              static_cast<int>(source.rows()), 2);
  return x;
}

// Point location in a piecewise linear planar map, used to evaluate inverse
// maps. Queries outside the image are projected to the nearest image point
// (with a warning).
class PLMapInverter {
 public:
  PLMapInverter(const Points2& source, const Points2& image, const FaceList& F)
      : source_(source), image_(image), F_(F) {
    lo_ = image.colwise().minCoeff();
    Vec2 hi = image.colwise().maxCoeff();
    Vec2 span = hi - lo_;
    span_ = std::max({span.x(), span.y(), 1e-12});
    dim_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(F.rows()))));
    cell_ = span_ / dim_;
    buckets_.resize(static_cast<size_t>(dim_) * dim_);
    for (int f = 0; f < F.rows(); ++f) {
      Vec2 a = image.row(F(f, 0)), b = image.row(F(f, 1)), c = image.row(F(f, 2));
      Vec2 flo = a.cwiseMin(b).cwiseMin(c), fhi = a.cwiseMax(b).cwiseMax(c);
      auto [i0, j0] = cell_of(flo);
      auto [i1, j1] = cell_of(fhi);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[static_cast<size_t>(i) * dim_ + j].push_back(f);
    }
  }

  // Preimage of q under the PL map source -> image.
  Vec2 invert(const Vec2& q) const {
    constexpr double tol = 1e-12;
    auto [ci, cj] = cell_of(q);
    // expanding ring search over grid cells
    double best_d2 = std::numeric_limits<double>::infinity();
    Vec2 best_bary;
    int best_face = -1;
    for (int radius = 0; radius < 2 * dim_; ++radius) {
      bool any_cell = false;
      for (int i = std::max(0, ci - radius); i <= std::min(dim_ - 1, ci + radius); ++i) {
        for (int j = std::max(0, cj - radius); j <= std::min(dim_ - 1, cj + radius); ++j) {
          if (std::max(std::abs(i - ci), std::abs(j - cj)) != radius) continue;
          any_cell = true;
          for (int f : buckets_[static_cast<size_t>(i) * dim_ + j]) {
            Vec2 bary;
            double d2 = barycentric_distance2(f, q, bary);
            if (d2 < best_d2) {
              best_d2 = d2;
              best_bary = bary;
              best_face = f;
            }
          }
        }
      }
      if (best_face >= 0 && best_d2 <= tol * span_ * span_) break;
      // once something was found, one extra ring guarantees the true nearest
      if (best_face >= 0 && radius > 0 && best_d2 < square((radius - 1) * cell_)) break;
      if (!any_cell && radius >= dim_) break;
    }
    if (best_face < 0) throw MeshError("PL map inversion found no triangles");
    if (best_d2 > 1e-16 * span_ * span_)
      detail::warn("invert_pl_map: query outside image domain, projected (d=" +
                   std::to_string(std::sqrt(best_d2)) + ")");
    int i = F_(best_face, 0), j = F_(best_face, 1), k = F_(best_face, 2);
    return best_bary.x() * Vec2(source_.row(i)) + best_bary.y() * Vec2(source_.row(j)) +
           (1.0 - best_bary.x() - best_bary.y()) * Vec2(source_.row(k));
  }

 private:
  static double square(double v) { return v * v; }

  std::pair<int, int> cell_of(const Vec2& p) const {
    int i = static_cast<int>((p.x() - lo_.x()) / cell_);
    int j = static_cast<int>((p.y() - lo_.y()) / cell_);
    return {std::clamp(i, 0, dim_ - 1), std::clamp(j, 0, dim_ - 1)};
  }

  // Squared distance from q to face f; bary receives the (clamped)
  // barycentric coordinates (w_i, w_j) of the closest point.
  double barycentric_distance2(int f, const Vec2& q, Vec2& bary) const {
    Vec2 a = image_.row(F_(f, 0)), b = image_.row(F_(f, 1)), c = image_.row(F_(f, 2));
    double area = signed_area_2d(a, b, c);
    if (area == 0) return std::numeric_limits<double>::infinity();
    double wa = signed_area_2d(q, b, c) / area;
    double wb = signed_area_2d(a, q, c) / area;
    double wc = 1.0 - wa - wb;
    if (wa >= -1e-12 && wb >= -1e-12 && wc >= -1e-12) {
      bary = Vec2(wa, wb);
      return 0.0;
    }
    // closest point on the triangle boundary
    double best = std::numeric_limits<double>::infinity();
    Vec2 vs[3] = {a, b, c};
    for (int e = 0; e < 3; ++e) {
      Vec2 p0 = vs[e], p1 = vs[(e + 1) % 3];
      Vec2 d = p1 - p0;
      double t = d.squaredNorm() > 0 ? std::clamp((q - p0).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
      Vec2 proj = p0 + t * d;
      double d2 = (q - proj).squaredNorm();
      if (d2 < best) {
        best = d2;
        double w[3] = {0, 0, 0};
        w[e] = 1.0 - t;
        w[(e + 1) % 3] = t;
        bary = Vec2(w[0], w[1]);
      }
    }
    return best;
  }

  const Points2 source_;
  const Points2 image_;
  const FaceList F_;
  Vec2 lo_;
  double span_ = 1, cell_ = 1;
  int dim_ = 1;
  std::vector<std::vector<int>> buckets_;
};

inline Points2 invert_pl_map(const Points2& source, const Points2& image,
                             const FaceList& F, const Points2& queries) {
  PLMapInverter inv(source, image, F);
  Points2 out(queries.rows(), 2);
  for (int i = 0; i < queries.rows(); ++i) out.row(i) = inv.invert(queries.row(i));
  return out;
}

}  // namespace hemiparam
