#pragma once

// Hemispheroidal conformal parameterization: cotangent-harmonic disk map with
// iterative quasi-conformal correction, an area-optimizing Mobius
// transformation, and a quasi-conformal composition that cancels the
// distortion of the inverse spheroidal projection.

#include "hemiparam/optimize.hpp"
#include "hemiparam/projection.hpp"
#include "hemiparam/qc.hpp"
#include "hemiparam/tutte.hpp"

namespace hemiparam {

// Intrinsic cotangent stiffness (positive semidefinite FEM Laplacian).
inline Eigen::SparseMatrix<double> cotangent_stiffness(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.F.rows());
  for (int f = 0; f < mesh.F.rows(); ++f) {
    int idx[3] = {mesh.F(f, 0), mesh.F(f, 1), mesh.F(f, 2)};
    auto p = flatten_triangle(mesh.V.row(idx[0]), mesh.V.row(idx[1]), mesh.V.row(idx[2]));
    double area = signed_area_2d(p[0], p[1], p[2]);
    Vec2 grad[3];
    for (int k = 0; k < 3; ++k) {
      Vec2 e = p[(k + 2) % 3] - p[(k + 1) % 3];
      grad[k] = Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        trips.emplace_back(idx[r], idx[c], area * grad[r].dot(grad[c]));
  }
  Eigen::SparseMatrix<double> K(nv, nv);
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

struct DiskConformalOptions {
  int max_iterations = 10;
  double mu_change_tol = 1e-4;
};

// Disk conformal map: cotangent-harmonic start with arc-length boundary, then
// repeated composition with LBS maps carrying the Beltrami coefficient of the
// current inverse map. Falls back to the Tutte start if the harmonic map
// folds. Returns the best iterate if the tolerance is not reached.
inline PlanarMap disk_conformal(const TriMesh& mesh, DiskConformalOptions opts = {}) {
  BoundaryLoop loop = boundary_loop(mesh);
  Points2 w = boundary_arc_positions(loop);
  Eigen::SparseMatrix<double> K = cotangent_stiffness(mesh);
  Points2 disk = detail::solve_dirichlet(K, loop.indices, w, mesh.num_vertices(), 2);
  if (flipped_face_count(disk, mesh.F) > 0) {
    detail::warn("disk_conformal: harmonic start folded, falling back to Tutte");
    disk = solve_tutte_disk(mesh);
  }

  Points2 w_cur(loop.size(), 2);
  Points2 best = disk;
  double best_mu = std::numeric_limits<double>::infinity();
  double prev_mu = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_iterations; ++it) {
    BeltramiField mu = beltrami_disk_to_surface(disk, mesh.V, mesh.F);
    double mean = mu.mean_abs();
    if (flipped_face_count(disk, mesh.F) == 0 && mean < best_mu) {
      best_mu = mean;
      best = disk;
    }
    if (std::abs(prev_mu - mean) < opts.mu_change_tol) break;
    prev_mu = mean;
    if (mu.folded_count() > 0) mu = repair_folds(mu, mesh.F);
    for (int i = 0; i < loop.size(); ++i) w_cur.row(i) = disk.row(loop.indices[i]);
    Points2 next = lbs_solve(mu, mesh.F, disk, loop.indices, w_cur);
    if (!next.allFinite()) break;
    disk = next;
  }
  {
    BeltramiField mu = beltrami_disk_to_surface(disk, mesh.V, mesh.F);
    if (flipped_face_count(disk, mesh.F) == 0 && mu.mean_abs() < best_mu) {
      best_mu = mu.mean_abs();
      best = disk;
    }
  }
  if (!std::isfinite(best_mu)) {
    detail::warn("disk_conformal: no fold-free iterate, returning Tutte embedding");
    return solve_tutte_disk(mesh);
  }
  return best;
}

struct MobiusParams {
  double r = 0;      // [0, 1)
  double theta = 0;  // [-pi, pi)
};

// Disk automorphism z -> (z - r e^{i theta}) / (1 - r e^{-i theta} z).
inline Vec2 mobius(const Vec2& z, const MobiusParams& p) {
  Complex zc(z.x(), z.y());
  Complex tau = std::polar(p.r, p.theta);
  Complex w = (zc - tau) / (1.0 - std::conj(tau) * zc);
  return Vec2(w.real(), w.imag());
}

inline Points2 mobius(const Points2& pts, const MobiusParams& p) {
  Points2 out(pts.rows(), 2);
  for (int i = 0; i < pts.rows(); ++i) out.row(i) = mobius(Vec2(pts.row(i)), p);
  return out;
}

// Mean squared difference of normalized log areas between the hemispheroidal
// image of the Mobius-adjusted disk map and the input surface. Zero exactly
// for an area-proportional composition; faces with a vanishing image are
// skipped.
inline double area_energy(const Points2& disk, const TriMesh& mesh,
                          const MobiusParams& p, const Spheroid& s) {
  const int nf = mesh.num_faces();
  Points3 img = inverse_spheroidal_projection(mobius(disk, p), s);
  Eigen::VectorXd src(nf), dst(nf);
  for (int f = 0; f < nf; ++f) {
    src[f] = triangle_area(mesh.V.row(mesh.F(f, 0)), mesh.V.row(mesh.F(f, 1)),
                           mesh.V.row(mesh.F(f, 2)));
    dst[f] = triangle_area(img.row(mesh.F(f, 0)), img.row(mesh.F(f, 1)),
                           img.row(mesh.F(f, 2)));
  }
  double st = src.sum(), dt = dst.sum();
  if (!(st > 0) || !(dt > 0)) return std::numeric_limits<double>::infinity();
  double acc = 0;
  int used = 0, skipped = 0;
  for (int f = 0; f < nf; ++f) {
    if (!(src[f] > 0) || !(dst[f] > 0)) {
      ++skipped;
      continue;
    }
    double d = std::log(dst[f] / dt) - std::log(src[f] / st);
    acc += d * d;
    ++used;
  }
  if (skipped > 0)
    detail::warn("area_energy: skipped " + std::to_string(skipped) + " zero-area face(s)");
  return used > 0 ? acc / used : 0.0;
}

// Searches the (r, theta) box for the energy-minimizing disk automorphism.
// The identity is always among the seeds, so the result never loses to it.
inline MobiusParams optimize_mobius(const Points2& disk, const TriMesh& mesh,
                                    const Spheroid& s, int max_evaluations = 200) {
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(0.0, -kPi);
  spec.upper = Eigen::Vector2d(0.99, kPi);
  spec.max_evaluations = max_evaluations;
  spec.tolerance = 1e-4;
  spec.seeds.push_back(Eigen::Vector2d(0, 0));
  for (double r : {0.25, 0.5})
    for (double th : {0.0, 0.5 * kPi, -0.5 * kPi, kPi})
      spec.seeds.push_back(Eigen::Vector2d(r, th));
  auto result = minimize_bounded(
      [&](const Eigen::VectorXd& x) {
        return area_energy(disk, mesh, MobiusParams{x[0], x[1]}, s);
      },
      spec);
  return MobiusParams{result.x[0], result.x[1]};
}

// Beltrami coefficient of the inverse spheroidal projection from its exact
// differential, evaluated per face at the centroid. The image tangent frame
// takes the first coordinate direction to +x, matching flatten_triangle.
// Exactly zero in the sphere limit.
inline BeltramiField beltrami_of_inverse_projection(const Points2& disk,
                                                    const FaceList& F,
                                                    const Spheroid& s) {
  BeltramiField mu;
  mu.values.resize(F.rows());
  for (int f = 0; f < F.rows(); ++f) {
    Vec2 p = (disk.row(F(f, 0)) + disk.row(F(f, 1)) + disk.row(F(f, 2))) / 3.0;
    double x = p.x(), y = p.y();
    double sden = 1.0 + x * x + y * y;
    double s2 = sden * sden;
    Eigen::Matrix<double, 3, 2> J;
    J << 2 * s.a * (sden - 2 * x * x) / s2, -4 * s.a * x * y / s2,
        -4 * s.a * x * y / s2, 2 * s.a * (sden - 2 * y * y) / s2,
        -4 * s.c * x / s2, -4 * s.c * y / s2;
    // thin QR: M is the differential expressed in an orthonormal image frame
    Vec3 c1 = J.col(0);
    double r11 = c1.norm();
    Vec3 e1 = c1 / r11;
    double r12 = e1.dot(J.col(1));
    Vec3 c2 = J.col(1) - r12 * e1;
    double r22 = c2.norm();
    Eigen::Matrix2d M;
    M << r11, r12, 0, r22;
    Complex fz(0.5 * (M(0, 0) + M(1, 1)), 0.5 * (M(1, 0) - M(0, 1)));
    Complex fzbar(0.5 * (M(0, 0) - M(1, 1)), 0.5 * (M(1, 0) + M(0, 1)));
    mu.values[f] = fz == Complex(0, 0)
                       ? Complex(std::numeric_limits<double>::infinity(), 0)
                       : fzbar / fz;
  }
  return mu;
}

// Cancels the conformal distortion of the inverse spheroidal projection:
// builds psi = LBS(mu of P^-1 on the current layout) with the unit circle
// held fixed, and composes the disk map with psi^-1.
inline PlanarMap qc_correction(const Points2& disk, const TriMesh& mesh,
                               const Spheroid& s) {
  BoundaryLoop loop = boundary_loop(mesh);
  Points2 w_cur(loop.size(), 2);
  for (int i = 0; i < loop.size(); ++i) w_cur.row(i) = disk.row(loop.indices[i]);

  BeltramiField mu = beltrami_of_inverse_projection(disk, mesh.F, s);
  if (mu.folded_count() > 0) mu = repair_folds(mu, mesh.F);
  Points2 psi = lbs_solve(mu, mesh.F, disk, loop.indices, w_cur);
  if (flipped_face_count(psi, mesh.F) > 0) {
    mu = repair_folds(mu, mesh.F);
    psi = lbs_solve(mu, mesh.F, disk, loop.indices, w_cur);
  }
  Points2 corrected = invert_pl_map(disk, psi, mesh.F, disk);
  if (flipped_face_count(corrected, mesh.F) > 0) {
    BeltramiField mu_fix = repair_folds(beltrami_from_planar_map(disk, corrected, mesh.F), mesh.F);
    corrected = lbs_solve(mu_fix, mesh.F, disk, loop.indices, w_cur);
  }
  return corrected;
}

struct ConformalResult {
  PlanarMap disk_initial;    // g_C
  MobiusParams mobius_params;
  PlanarMap disk_corrected;  // psi^-1 . mobius . g_C
  SurfaceMap hemi;           // f_C
  Eigen::VectorXd residual_mu;  // per-face |mu| of the full surface-to-surface map
};

inline ConformalResult hemispheroidal_conformal(const TriMesh& mesh, const Spheroid& s,
                                                DiskConformalOptions opts = {}) {
  ConformalResult out;
  try {
    out.disk_initial = disk_conformal(mesh, opts);
  } catch (const std::exception& e) {
    throw MeshError(std::string("conformal/disk: ") + e.what());
  }
  try {
    out.mobius_params = optimize_mobius(out.disk_initial, mesh, s);
  } catch (const std::exception& e) {
    throw MeshError(std::string("conformal/mobius: ") + e.what());
  }
  try {
    Points2 moved = mobius(out.disk_initial, out.mobius_params);
    out.disk_corrected = qc_correction(moved, mesh, s);
  } catch (const std::exception& e) {
    throw MeshError(std::string("conformal/qc-correction: ") + e.what());
  }
  out.hemi = inverse_spheroidal_projection(out.disk_corrected, s);
  BeltramiField mu = beltrami_surface_to_surface(mesh.V, out.hemi, mesh.F);
  out.residual_mu = mu.values.cwiseAbs();
  return out;
}

}  // namespace hemiparam
