#pragma once

// Hemispheroidal area-preserving parameterization. A Tutte disk map is
// deformed by density-equalizing iterations where the density couples the
// input face areas to the areas of their images under the inverse spheroidal
// projection, so equalizing on the disk equalizes on the hemispheroid. The
// density is re-derived from the deformed geometry after every step.

#include "hemiparam/conformal.hpp"

namespace hemiparam {

// rho_H(T) = Area(T on the surface) / Area(P^-1 of the current disk T).
inline Eigen::VectorXd density_rho_H(const TriMesh& mesh, const Points2& disk,
                                     const Spheroid& s) {
  Points3 img = inverse_spheroidal_projection(disk, s);
  Eigen::VectorXd rho(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    double src = triangle_area(mesh.V.row(mesh.F(f, 0)), mesh.V.row(mesh.F(f, 1)),
                               mesh.V.row(mesh.F(f, 2)));
    double dst = triangle_area(img.row(mesh.F(f, 0)), img.row(mesh.F(f, 1)),
                               img.row(mesh.F(f, 2)));
    if (!(dst > 0))
      throw MeshError("density_rho_H: zero image area at face " + std::to_string(f));
    rho[f] = src / dst;
  }
  return rho;
}

inline double coefficient_of_variation(const Eigen::VectorXd& v) {
  double mean = v.mean();
  if (!(std::abs(mean) > 0)) return 0;
  double var = (v.array() - mean).square().sum() / v.size();
  return std::sqrt(var) / std::abs(mean);
}

struct DemState {
  PlanarMap disk;
  Eigen::VectorXd density;  // per-face rho_H
  int iteration = 0;
  double step = 0.1;
};

struct DemOptions {
  int max_iterations = 200;
  double cv_tol = 0.02;        // stop target for CV(rho_H)
  double cv_converged = 0.05;  // CV below this counts as converged
  double rel_decrease_tol = 1e-4;  // over a 5-step window
  double dt = 0.1;
  int max_halvings = 5;
};

// One density-equalizing iteration: lumped vertex density, implicit
// diffusion, gradient descent of the vertex positions (boundary slides along
// the circle), then density recomputed from the moved geometry.
inline DemState dem_step(const DemState& state, const TriMesh& mesh, const Spheroid& s,
                         const BoundaryLoop* loop_hint = nullptr) {
  const int nv = mesh.num_vertices();
  const int nf = mesh.num_faces();
  BoundaryLoop loop_local;
  const BoundaryLoop* loop = loop_hint;
  if (!loop) {
    loop_local = boundary_loop(mesh);
    loop = &loop_local;
  }

  const Points2& disk = state.disk;
  Eigen::VectorXd face_area(nf);
  for (int f = 0; f < nf; ++f)
    face_area[f] = signed_area_2d(disk.row(mesh.F(f, 0)), disk.row(mesh.F(f, 1)),
                                  disk.row(mesh.F(f, 2)));

  // lumped vertex density and mass
  Eigen::VectorXd vmass = Eigen::VectorXd::Zero(nv);
  Eigen::VectorXd vrho = Eigen::VectorXd::Zero(nv);
  for (int f = 0; f < nf; ++f) {
    double a = std::abs(face_area[f]);
    for (int k = 0; k < 3; ++k) {
      vmass[mesh.F(f, k)] += a;
      vrho[mesh.F(f, k)] += a * state.density[f];
    }
  }
  for (int v = 0; v < nv; ++v) vrho[v] /= std::max(vmass[v], 1e-300);
  vmass /= 3.0;

  // implicit diffusion (M + dt K) rho = M rho0 on the current layout
  BeltramiField zero;
  zero.values = Eigen::VectorXcd::Zero(nf);
  Eigen::SparseMatrix<double> K = lbs_stiffness(zero, mesh.F, disk);
  Eigen::SparseMatrix<double> M(nv, nv);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nv);
    for (int v = 0; v < nv; ++v) trips.emplace_back(v, v, vmass[v]);
    M.setFromTriplets(trips.begin(), trips.end());
  }
  Eigen::SparseMatrix<double> A = M + state.step * K;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw MeshError("dem_step: diffusion solve failed");
  Eigen::VectorXd rho = solver.solve(M * vrho);
  if (!rho.allFinite()) throw MeshError("dem_step: diffusion produced non-finite density");
  rho = rho.cwiseMax(1e-12 * rho.cwiseAbs().maxCoeff());

  // vertex velocity -grad(rho)/rho from per-face linear gradients
  Points2 vgrad = Points2::Zero(nv, 2);
  double mean_edge = 0;
  for (int f = 0; f < nf; ++f) {
    int i = mesh.F(f, 0), j = mesh.F(f, 1), k = mesh.F(f, 2);
    Vec2 p[3] = {disk.row(i), disk.row(j), disk.row(k)};
    double area = face_area[f];
    if (area == 0) continue;
    Vec2 g = Vec2::Zero();
    int idx[3] = {i, j, k};
    for (int kk = 0; kk < 3; ++kk) {
      Vec2 e = p[(kk + 2) % 3] - p[(kk + 1) % 3];
      g += rho[idx[kk]] * Vec2(-e.y(), e.x()) / (2.0 * area);
    }
    double a = std::abs(area);
    for (int kk = 0; kk < 3; ++kk) vgrad.row(idx[kk]) += a * g.transpose();
    mean_edge += (p[1] - p[0]).norm() + (p[2] - p[1]).norm() + (p[0] - p[2]).norm();
  }
  mean_edge /= 3.0 * nf;
  Points2 vel(nv, 2);
  for (int v = 0; v < nv; ++v)
    vel.row(v) = -vgrad.row(v) / (3.0 * std::max(vmass[v], 1e-300)) / rho[v];

  // boundary velocities slide along the circle
  std::vector<char> on_boundary(nv, 0);
  for (int b : loop->indices) on_boundary[b] = 1;
  for (int b : loop->indices) {
    Vec2 x = disk.row(b);
    double r = x.norm();
    if (r > 0) {
      Vec2 nrm = x / r;
      Vec2 v = vel.row(b);
      vel.row(b) = (v - v.dot(nrm) * nrm).transpose();
    }
  }

  double vmax = 0;
  for (int v = 0; v < nv; ++v) vmax = std::max(vmax, vel.row(v).norm());
  double dt_pos = state.step;
  if (vmax > 0) dt_pos = std::min(dt_pos, 0.45 * mean_edge / vmax);

  DemState next;
  next.iteration = state.iteration + 1;
  next.step = state.step;
  next.disk = disk + dt_pos * vel;
  for (int b : loop->indices) {
    Vec2 x = next.disk.row(b);
    double r = x.norm();
    Vec2 proj = r > 0 ? Vec2(x / r) : Vec2(1, 0);
    next.disk.row(b) = proj.transpose();
  }
  if (!next.disk.allFinite()) throw MeshError("dem_step: non-finite vertex update");
  next.density = density_rho_H(mesh, next.disk, s);
  return next;
}

struct AreaResult {
  PlanarMap disk;  // tau_H . mobius . g
  SurfaceMap hemi;
  MobiusParams mobius_params;
  int iterations = 0;
  double final_cv = 0;
  bool converged = false;
  // per-iteration log: (iteration, cv, flipped count)
  std::vector<std::array<double, 3>> log;
};

inline AreaResult hemispheroidal_area_preserving_full(const TriMesh& mesh,
                                                      const Spheroid& s,
                                                      DemOptions opts = {}) {
  AreaResult out;
  Points2 g = solve_tutte_disk(mesh);
  out.mobius_params = optimize_mobius(g, mesh, s);
  Points2 disk0 = mobius(g, out.mobius_params);
  BoundaryLoop loop = boundary_loop(mesh);

  DemState state;
  state.disk = disk0;
  state.density = density_rho_H(mesh, disk0, s);
  state.step = opts.dt;

  std::vector<double> cv_trace{coefficient_of_variation(state.density)};
  out.log.push_back({0.0, cv_trace[0], 0.0});
  DemState best = state;
  double best_cv = cv_trace[0];

  while (state.iteration < opts.max_iterations) {
    if (cv_trace.back() < opts.cv_tol) break;
    if (cv_trace.size() > 5) {
      double prev = cv_trace[cv_trace.size() - 6];
      if ((prev - cv_trace.back()) < opts.rel_decrease_tol * std::max(prev, 1e-300)) break;
    }
    DemState next;
    bool ok = false;
    int halvings = 0;
    DemState attempt = state;
    while (halvings <= opts.max_halvings) {
      try {
        next = dem_step(attempt, mesh, s, &loop);
        if (flipped_face_count(next.disk, mesh.F) == 0) {
          ok = true;
          break;
        }
      } catch (const MeshError&) {
        // fall through to halving
      }
      attempt.step *= 0.5;
      ++halvings;
    }
    if (!ok) {
      detail::warn("area_preserving: step rejected after halvings, stopping early");
      break;
    }
    state = next;
    double cv = coefficient_of_variation(state.density);
    cv_trace.push_back(cv);
    out.log.push_back({static_cast<double>(state.iteration), cv,
                       static_cast<double>(flipped_face_count(state.disk, mesh.F))});
    if (cv < best_cv) {
      best_cv = cv;
      best = state;
    }
  }
  out.converged = best_cv < opts.cv_converged;
  if (!out.converged)
    detail::warn("area_preserving: stopped at CV=" + std::to_string(best_cv) +
                 " after " + std::to_string(best.iteration) + " iteration(s)");

  Points2 disk = best.disk;
  if (flipped_face_count(disk, mesh.F) > 0) {
    Points2 w_cur(loop.size(), 2);
    for (int i = 0; i < loop.size(); ++i) w_cur.row(i) = disk.row(loop.indices[i]);
    BeltramiField mu = repair_folds(beltrami_from_planar_map(disk0, disk, mesh.F), mesh.F);
    disk = lbs_solve(mu, mesh.F, disk0, loop.indices, w_cur);
  }
  out.disk = disk;
  out.hemi = inverse_spheroidal_projection(disk, s);
  out.iterations = best.iteration;
  out.final_cv = best_cv;
  return out;
}

inline SurfaceMap hemispheroidal_area_preserving(const TriMesh& mesh, const Spheroid& s,
                                                 DemOptions opts = {}) {
  return hemispheroidal_area_preserving_full(mesh, s, opts).hemi;
}

}  // namespace hemiparam
