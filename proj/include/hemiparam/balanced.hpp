#pragma once

// Balanced hemispheroidal parameterization: convex mixing of the Beltrami
// coefficients of the Tutte, conformal and area-preserving maps (all measured
// from the shared Tutte disk right before the inverse projection), followed
// by one LBS reconstruction.

#include "hemiparam/area_preserving.hpp"

namespace hemiparam {

struct BalanceWeights {
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double gamma = 1.0 / 3.0;

  void validate() const {
    if (alpha < 0 || beta < 0 || gamma < 0)
      throw std::invalid_argument("balance weights must be nonnegative");
    if (std::abs(alpha + beta + gamma - 1.0) > 1e-12)
      throw std::invalid_argument("balance weights must sum to 1");
  }
};

// Beltrami coefficient of the map from the Tutte disk to the planar image of
// f_X under the spheroidal projection (the map right before P^-1).
inline BeltramiField component_beltrami(const TriMesh& mesh, const Points2& g,
                                        const Points3& f_X, const Spheroid& s) {
  Points2 planar = spheroidal_projection(f_X, s);
  return beltrami_from_planar_map(g, planar, mesh.F);
}

inline BeltramiField mix_beltrami(const BeltramiField& mu_T, const BeltramiField& mu_C,
                                  const BeltramiField& mu_A, const BalanceWeights& w,
                                  const FaceList& F) {
  w.validate();
  if (mu_T.size() != mu_C.size() || mu_C.size() != mu_A.size())
    throw std::invalid_argument("mix_beltrami: face count mismatch");
  BeltramiField out;
  out.values = w.alpha * mu_T.values + w.beta * mu_C.values + w.gamma * mu_A.values;
  if (out.folded_count() > 0) out = repair_folds(out, F);
  return out;
}

// The three component maps share the Tutte disk g and its boundary, so the
// mix is resolved against g with the same arc-length circle constraints.
struct ComponentCache {
  PlanarMap g;              // Tutte disk
  Points2 boundary_values;  // arc-length circle positions
  std::vector<int> boundary_indices;
  BeltramiField mu_T, mu_C, mu_A;
  SurfaceMap f_T, f_C, f_A;
};

inline ComponentCache build_components(const TriMesh& mesh, const Spheroid& s,
                                       DemOptions area_opts = {},
                                       DiskConformalOptions conf_opts = {}) {
  ComponentCache cache;
  BoundaryLoop loop = boundary_loop(mesh);
  cache.boundary_indices = loop.indices;
  cache.boundary_values = boundary_arc_positions(loop);
  TutteResult tutte = hemispheroidal_tutte(mesh, s);
  cache.g = tutte.disk;
  cache.f_T = tutte.hemi;
  cache.f_C = hemispheroidal_conformal(mesh, s, conf_opts).hemi;
  cache.f_A = hemispheroidal_area_preserving_full(mesh, s, area_opts).hemi;
  cache.mu_T = component_beltrami(mesh, cache.g, cache.f_T, s);
  cache.mu_C = component_beltrami(mesh, cache.g, cache.f_C, s);
  cache.mu_A = component_beltrami(mesh, cache.g, cache.f_A, s);
  return cache;
}

struct BalancedResult {
  PlanarMap disk;  // psi_B . g
  SurfaceMap hemi;
};

inline BalancedResult balanced_from_components(const ComponentCache& cache,
                                               const TriMesh& mesh, const Spheroid& s,
                                               const BalanceWeights& w) {
  BeltramiField mu_B = mix_beltrami(cache.mu_T, cache.mu_C, cache.mu_A, w, mesh.F);
  BalancedResult out;
  out.disk = lbs_solve(mu_B, mesh.F, cache.g, cache.boundary_indices, cache.boundary_values);
  if (flipped_face_count(out.disk, mesh.F) > 0) {
    BeltramiField fixed = repair_folds(beltrami_from_planar_map(cache.g, out.disk, mesh.F), mesh.F);
    out.disk = lbs_solve(fixed, mesh.F, cache.g, cache.boundary_indices, cache.boundary_values);
  }
  out.hemi = inverse_spheroidal_projection(out.disk, s);
  return out;
}

inline BalancedResult hemispheroidal_balanced(const TriMesh& mesh, const Spheroid& s,
                                              const BalanceWeights& w) {
  ComponentCache cache = build_components(mesh, s);
  return balanced_from_components(cache, mesh, s, w);
}

}  // namespace hemiparam
