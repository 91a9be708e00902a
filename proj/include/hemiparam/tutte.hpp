#pragma once

// Hemispheroidal Tutte parameterization: graph-Laplacian disk embedding with
// arc-length boundary, composed with the inverse spheroidal projection.

#include "hemiparam/projection.hpp"
#include "hemiparam/qc.hpp"

namespace hemiparam {

// Graph Laplacian: +1 on edges, minus vertex degree on the diagonal. Rows sum
// to zero exactly.
inline Eigen::SparseMatrix<double> graph_laplacian(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  auto edges = detail::build_edge_map(mesh.F);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(4 * edges.size());
  std::vector<double> degree(nv, 0);
  for (const auto& [key, e] : edges) {
    trips.emplace_back(key.first, key.second, 1.0);
    trips.emplace_back(key.second, key.first, 1.0);
    degree[key.first] += 1.0;
    degree[key.second] += 1.0;
  }
  for (int v = 0; v < nv; ++v) trips.emplace_back(v, v, -degree[v]);
  Eigen::SparseMatrix<double> L(nv, nv);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

// Unit-circle targets for the boundary vertices, spaced by cumulative edge
// length. The first loop vertex (lowest index) lands exactly at (1, 0); the
// cumulative sum starts at the edge leaving the next vertex, so vertex j gets
// the total length through the edge after it.
inline Points2 boundary_arc_positions(const BoundaryLoop& loop) {
  const int m = loop.size();
  double total = loop.total_length();
  if (!(total > 0)) throw MeshError("boundary loop has zero total length");
  Points2 w(m, 2);
  w.row(0) = Vec2(1.0, 0.0);
  double cum = 0;
  for (int j = 1; j < m; ++j) {
    cum += loop.edge_lengths[j];
    double theta = 2.0 * kPi * cum / total;
    w.row(j) = Vec2(std::cos(theta), std::sin(theta));
  }
  return w;
}

// Tutte disk embedding (Floater/Tutte): harmonic in the graph Laplacian with
// convex boundary, hence fold free.
inline Points2 solve_tutte_disk(const TriMesh& mesh) {
  BoundaryLoop loop = boundary_loop(mesh);
  Points2 w = boundary_arc_positions(loop);
  Eigen::SparseMatrix<double> L = -graph_laplacian(mesh);  // SPD on interior
  Points2 disk = detail::solve_dirichlet(L, loop.indices, w, mesh.num_vertices(), 2);
  return disk;
}

struct TutteResult {
  PlanarMap disk;
  SurfaceMap hemi;
};

inline TutteResult hemispheroidal_tutte(const TriMesh& mesh, const Spheroid& s) {
  TutteResult out;
  out.disk = solve_tutte_disk(mesh);
  out.hemi = inverse_spheroidal_projection(out.disk, s);
  return out;
}

}  // namespace hemiparam
