#pragma once

// Triangle mesh container, topology validation, and basic geometric
// quantities for simply connected open surfaces.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hemiparam {

inline constexpr double kPi = 3.14159265358979323846;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using FaceList = Eigen::Matrix<int, Eigen::Dynamic, 3>;

// Per-vertex planar image (unit disk) and hemispheroid image of a mesh.
using PlanarMap = Points2;
using SurfaceMap = Points3;

class MeshError : public std::runtime_error {
 public:
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

using WarnHandler = std::function<void(const std::string&)>;

inline WarnHandler& warn_handler() {
  static WarnHandler handler = [](const std::string&) {};
  return handler;
}

inline void warn(const std::string& msg) { warn_handler()(msg); }

}  // namespace detail

// Installs a sink for non-fatal diagnostics (zero-area faces, fold repairs,
// out-of-domain queries). Default sink discards them.
inline void set_warning_handler(detail::WarnHandler handler) {
  detail::warn_handler() = std::move(handler);
}

struct TriMesh {
  Points3 V;
  FaceList F;

  int num_vertices() const { return static_cast<int>(V.rows()); }
  int num_faces() const { return static_cast<int>(F.rows()); }
};

// Cyclically ordered boundary vertices. indices[0] is the lowest boundary
// vertex index; edge_lengths[t] is the length of indices[t] -> indices[t+1]
// (wrapping). The surface lies to the left when traversing in index order.
struct BoundaryLoop {
  std::vector<int> indices;
  std::vector<double> edge_lengths;

  int size() const { return static_cast<int>(indices.size()); }
  double total_length() const {
    double s = 0;
    for (double l : edge_lengths) s += l;
    return s;
  }
};

namespace detail {

struct EdgeInfo {
  int count = 0;        // incident faces
  int face[2] = {-1, -1};
  // +1 if the face traverses the edge as (lo,hi), -1 as (hi,lo)
  int dir[2] = {0, 0};
};

using EdgeMap = std::map<std::pair<int, int>, EdgeInfo>;

inline EdgeMap build_edge_map(const FaceList& F) {
  EdgeMap edges;
  for (int f = 0; f < F.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = F(f, k);
      int b = F(f, (k + 1) % 3);
      auto key = std::minmax(a, b);
      EdgeInfo& e = edges[key];
      if (e.count < 2) {
        e.face[e.count] = f;
        e.dir[e.count] = (a < b) ? +1 : -1;
      }
      ++e.count;
    }
  }
  return edges;
}

}  // namespace detail

inline int edge_count(const TriMesh& mesh) {
  return static_cast<int>(detail::build_edge_map(mesh.F).size());
}

// Flips faces (BFS over edge adjacency) until neighboring faces traverse
// every shared edge in opposite directions. Throws if the surface is
// non-orientable.
inline void repair_orientation(FaceList& F) {
  const int nf = static_cast<int>(F.rows());
  if (nf == 0) return;

  // adjacency through shared undirected edges
  std::map<std::pair<int, int>, std::vector<int>> edge_faces;
  for (int f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k)
      edge_faces[std::minmax(F(f, k), F(f, (k + 1) % 3))].push_back(f);

  auto traverses_forward = [&](int f, int lo, int hi) {
    for (int k = 0; k < 3; ++k) {
      int a = F(f, k), b = F(f, (k + 1) % 3);
      if (a == lo && b == hi) return true;
      if (a == hi && b == lo) return false;
    }
    throw MeshError("internal: face does not contain edge");
  };

  std::vector<int8_t> state(nf, 0);  // 0 unvisited, 1 kept, 2 flipped
  for (int seed = 0; seed < nf; ++seed) {
    if (state[seed] != 0) continue;
    state[seed] = 1;
    std::queue<int> q;
    q.push(seed);
    while (!q.empty()) {
      int f = q.front();
      q.pop();
      for (int k = 0; k < 3; ++k) {
        auto key = std::minmax(F(f, k), F(f, (k + 1) % 3));
        for (int g : edge_faces[key]) {
          if (g == f) continue;
          bool same_dir = traverses_forward(f, key.first, key.second) ==
                          traverses_forward(g, key.first, key.second);
          // consistent orientation means opposite traversal
          int8_t want = same_dir ? (state[f] == 1 ? 2 : 1) : state[f];
          if (state[g] == 0) {
            state[g] = want;
            if (want == 2) std::swap(F(g, 1), F(g, 2));
            // after the swap the stored state is "kept" relative to F
            state[g] = 1;
            q.push(g);
          }
        }
      }
    }
  }
  // A second pass verifies global consistency; inconsistency after repair
  // means the surface is non-orientable.
  auto edges = detail::build_edge_map(F);
  for (const auto& [key, e] : edges) {
    if (e.count == 2 && e.dir[0] == e.dir[1])
      throw MeshError("non-orientable surface: orientation repair failed");
  }
}

namespace detail {

inline void check_faces_in_range(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  for (int f = 0; f < mesh.F.rows(); ++f) {
    std::array<int, 3> idx = {mesh.F(f, 0), mesh.F(f, 1), mesh.F(f, 2)};
    for (int v : idx)
      if (v < 0 || v >= nv)
        throw MeshError("face " + std::to_string(f) +
                        " references out-of-range vertex " + std::to_string(v));
    if (idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2])
      throw MeshError("degenerate face " + std::to_string(f) +
                      " (repeated vertex index)");
  }
}

inline void check_vertex_manifold(const TriMesh& mesh, const EdgeMap& edges) {
  const int nv = mesh.num_vertices();
  // For a manifold vertex the incident faces form a single fan:
  // interior vertex: #faces == #edges; boundary vertex: #faces == #edges - 1.
  std::vector<int> face_deg(nv, 0), edge_deg(nv, 0), boundary_deg(nv, 0);
  for (int f = 0; f < mesh.F.rows(); ++f)
    for (int k = 0; k < 3; ++k) ++face_deg[mesh.F(f, k)];
  for (const auto& [key, e] : edges) {
    ++edge_deg[key.first];
    ++edge_deg[key.second];
    if (e.count == 1) {
      ++boundary_deg[key.first];
      ++boundary_deg[key.second];
    }
  }
  for (int v = 0; v < nv; ++v) {
    if (edge_deg[v] == 0) throw MeshError("isolated vertex " + std::to_string(v));
    bool on_boundary = boundary_deg[v] > 0;
    if (on_boundary && boundary_deg[v] != 2)
      throw MeshError("non-manifold vertex " + std::to_string(v) +
                      " (touches " + std::to_string(boundary_deg[v]) +
                      " boundary edges)");
    int expected = on_boundary ? edge_deg[v] - 1 : edge_deg[v];
    if (face_deg[v] != expected)
      throw MeshError("non-manifold vertex " + std::to_string(v) +
                      " (face fan is not a single disk)");
  }
}

inline int count_boundary_cycles(const TriMesh& mesh, const EdgeMap& edges) {
  std::map<int, std::vector<int>> next;  // boundary adjacency
  for (const auto& [key, e] : edges) {
    if (e.count == 1) {
      next[key.first].push_back(key.second);
      next[key.second].push_back(key.first);
    }
  }
  std::map<int, bool> seen;
  int cycles = 0;
  for (const auto& [v, nbrs] : next) {
    if (seen[v]) continue;
    ++cycles;
    int cur = v, prev = -1;
    while (true) {
      seen[cur] = true;
      const auto& nb = next[cur];
      int nxt = (nb[0] == prev) ? nb[1] : nb[0];
      prev = cur;
      cur = nxt;
      if (cur == v) break;
    }
  }
  return cycles;
}

}  // namespace detail

// Full invariant check: index ranges, edge/vertex manifoldness, consistent
// orientation, one boundary loop, Euler characteristic 1.
inline void validate_mesh(const TriMesh& mesh) {
  if (mesh.num_vertices() < 3 || mesh.num_faces() < 1)
    throw MeshError("mesh has too few vertices or faces");
  detail::check_faces_in_range(mesh);
  auto edges = detail::build_edge_map(mesh.F);
  for (const auto& [key, e] : edges) {
    if (e.count > 2)
      throw MeshError("non-manifold edge (" + std::to_string(key.first) + "," +
                      std::to_string(key.second) + ") with " +
                      std::to_string(e.count) + " incident faces");
    if (e.count == 2 && e.dir[0] == e.dir[1])
      throw MeshError("inconsistently oriented faces across edge (" +
                      std::to_string(key.first) + "," +
                      std::to_string(key.second) + ")");
  }
  detail::check_vertex_manifold(mesh, edges);

  int nb = 0;
  for (const auto& [key, e] : edges)
    if (e.count == 1) ++nb;
  if (nb == 0) throw MeshError("no boundary loop (closed surface)");

  int cycles = detail::count_boundary_cycles(mesh, edges);
  if (cycles != 1)
    throw MeshError("expected one boundary loop, found " +
                    std::to_string(cycles));

  long long euler = mesh.num_vertices() - static_cast<long long>(edges.size()) +
                    mesh.num_faces();
  if (euler != 1)
    throw MeshError("nonzero genus: V-E+F = " + std::to_string(euler) +
                    " (expected 1)");
}

// Constructs a mesh, repairing face orientation if needed, and validates all
// invariants.
inline TriMesh make_mesh(Points3 V, FaceList F) {
  TriMesh mesh{std::move(V), std::move(F)};
  detail::check_faces_in_range(mesh);
  repair_orientation(mesh.F);
  validate_mesh(mesh);
  return mesh;
}

// Ordered boundary cycle. Follows boundary halfedges in face direction so the
// surface stays on the left; rotated so the lowest vertex index comes first.
inline BoundaryLoop boundary_loop(const TriMesh& mesh) {
  auto edges = detail::build_edge_map(mesh.F);
  // boundary halfedge a->b appears in exactly one face as (a,b)
  std::map<int, int> next;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      int a = mesh.F(f, k), b = mesh.F(f, (k + 1) % 3);
      const auto& e = edges.at(std::minmax(a, b));
      if (e.count == 1) next[a] = b;
    }
  }
  if (next.empty()) throw MeshError("no boundary loop (closed surface)");

  int start = next.begin()->first;  // std::map: lowest boundary vertex
  BoundaryLoop loop;
  int cur = start;
  do {
    loop.indices.push_back(cur);
    auto it = next.find(cur);
    if (it == next.end()) throw MeshError("broken boundary chain");
    cur = it->second;
  } while (cur != start && static_cast<int>(loop.indices.size()) <= mesh.num_vertices());
  if (cur != start) throw MeshError("boundary does not close up");

  const int m = loop.size();
  loop.edge_lengths.resize(m);
  for (int t = 0; t < m; ++t) {
    int a = loop.indices[t], b = loop.indices[(t + 1) % m];
    double l = (mesh.V.row(a) - mesh.V.row(b)).norm();
    if (!(l > 0)) throw MeshError("zero-length boundary edge");
    loop.edge_lengths[t] = l;
  }
  return loop;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

inline Eigen::VectorXd face_areas(const TriMesh& mesh) {
  Eigen::VectorXd areas(mesh.num_faces());
  int zero_count = 0;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    areas[f] = triangle_area(mesh.V.row(mesh.F(f, 0)), mesh.V.row(mesh.F(f, 1)),
                             mesh.V.row(mesh.F(f, 2)));
    if (areas[f] == 0) ++zero_count;
  }
  if (zero_count > 0)
    detail::warn("face_areas: " + std::to_string(zero_count) +
                 " zero-area face(s)");
  return areas;
}

// Interior angles per face corner, in degrees. Corner k of face f is at
// vertex F(f,k).
inline Eigen::Matrix<double, Eigen::Dynamic, 3> corner_angles(
    const TriMesh& mesh) {
  Eigen::Matrix<double, Eigen::Dynamic, 3> angles(mesh.num_faces(), 3);
  constexpr double rad2deg = 180.0 / kPi;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      Vec3 p = mesh.V.row(mesh.F(f, k));
      Vec3 q = mesh.V.row(mesh.F(f, (k + 1) % 3));
      Vec3 r = mesh.V.row(mesh.F(f, (k + 2) % 3));
      Vec3 u = q - p, v = r - p;
      double lu = u.norm(), lv = v.norm();
      if (lu == 0 || lv == 0)
        throw MeshError("zero-length edge at face " + std::to_string(f));
      // atan2 form is well conditioned near 0 and 180 degrees
      angles(f, k) = std::atan2(u.cross(v).norm(), u.dot(v)) * rad2deg;
    }
  }
  return angles;
}

// Merges vertices closer than tol (absolute). Removes faces that become
// degenerate. Used behind the CLI --weld flag; not applied automatically.
inline TriMesh weld_duplicate_vertices(const TriMesh& mesh, double tol) {
  const int nv = mesh.num_vertices();
  std::vector<int> remap(nv);
  std::vector<int> kept;
  // grid hash on tol-sized cells; exact pairwise check within neighbors
  std::map<std::array<long long, 3>, std::vector<int>> cells;
  auto cell_of = [&](const Vec3& p) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / tol)),
                                    static_cast<long long>(std::floor(p.y() / tol)),
                                    static_cast<long long>(std::floor(p.z() / tol))};
  };
  for (int v = 0; v < nv; ++v) {
    Vec3 p = mesh.V.row(v);
    int found = -1;
    auto c = cell_of(p);
    for (long long dx = -1; dx <= 1 && found < 0; ++dx)
      for (long long dy = -1; dy <= 1 && found < 0; ++dy)
        for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
          auto it = cells.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells.end()) continue;
          for (int u : it->second)
            if ((mesh.V.row(kept[u]) - p.transpose()).norm() <= tol) {
              found = u;
              break;
            }
        }
    if (found >= 0) {
      remap[v] = found;
    } else {
      remap[v] = static_cast<int>(kept.size());
      cells[c].push_back(remap[v]);
      kept.push_back(v);
    }
  }
  TriMesh out;
  out.V.resize(static_cast<int>(kept.size()), 3);
  for (size_t i = 0; i < kept.size(); ++i) out.V.row(static_cast<int>(i)) = mesh.V.row(kept[i]);
  std::vector<std::array<int, 3>> faces;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    std::array<int, 3> t = {remap[mesh.F(f, 0)], remap[mesh.F(f, 1)],
                            remap[mesh.F(f, 2)]};
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) faces.push_back(t);
  }
  out.F.resize(static_cast<int>(faces.size()), 3);
  for (size_t f = 0; f < faces.size(); ++f)
    out.F.row(static_cast<int>(f)) << faces[f][0], faces[f][1], faces[f][2];
  return out;
}

}  // namespace hemiparam
