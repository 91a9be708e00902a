#pragma once

// Deterministic synthetic meshes and small helpers shared by the test
// suites. The bundled benchmark family covers oblate and prolate targets,
// bumpy and smooth geometry, so ordering checks are meaningful.

#include "hemiparam/hemiparam.hpp"

#include <random>

namespace testsupport {

using namespace hemiparam;

// Unit-disk planar mesh: golden-angle interior points plus a boundary ring,
// Delaunay triangulated. Vertices lie exactly on the unit circle at the rim.
inline TriMesh fibonacci_disk_mesh(int count) {
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  auto [coords, mesh] = sample_uniform_hemispheroid(s, count);
  Points2 disk = spheroidal_projection(mesh.V, s);
  Points3 V(disk.rows(), 3);
  V.leftCols<2>() = disk;
  V.col(2).setZero();
  return make_mesh(std::move(V), FaceList(mesh.F));
}

// Hemisphere-like meshes: quasi-uniform sample of the unit hemisphere warped
// by a per-point radial or vertical deformation.
inline TriMesh hemisphere_mesh(int count) {
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  auto [coords, mesh] = sample_uniform_hemispheroid(s, count);
  return mesh;
}

// Half ellipsoid with polar semiaxis c0 (unit equatorial radius).
inline TriMesh half_ellipsoid_mesh(int count, double c0) {
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  auto [coords, mesh] = sample_uniform_hemispheroid(s, count);
  Points3 V = mesh.V;
  V.col(2) *= c0;
  return make_mesh(std::move(V), FaceList(mesh.F));
}

// Hemisphere with azimuthal radial bumps that vanish at the equator, so the
// boundary stays the unit circle.
inline TriMesh bumpy_cap_mesh(int count, double amplitude = 0.15) {
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  auto [coords, mesh] = sample_uniform_hemispheroid(s, count);
  Points3 V = mesh.V;
  for (int i = 0; i < V.rows(); ++i) {
    double eta = coords[i].eta, phi = coords[i].phi;
    double warp = 1.0 + amplitude * std::sin(3.0 * phi) * std::sin(eta) * std::cos(eta) * 2.0;
    V.row(i) *= warp;
  }
  return make_mesh(std::move(V), FaceList(mesh.F));
}

// Graph surface z = f(x, y) over the unit disk.
template <typename F>
inline TriMesh graph_patch_mesh(int count, F&& f) {
  TriMesh disk = fibonacci_disk_mesh(count);
  Points3 V = disk.V;
  for (int i = 0; i < V.rows(); ++i) V(i, 2) = f(V(i, 0), V(i, 1));
  return make_mesh(std::move(V), FaceList(disk.F));
}

inline TriMesh gaussian_hill_mesh(int count, double height = 0.8, double sigma = 0.45) {
  return graph_patch_mesh(count, [=](double x, double y) {
    double r2 = x * x + y * y;
    double rim = std::exp(-1.0 / (sigma * sigma));
    return height * (std::exp(-r2 / (sigma * sigma)) - rim) / (1.0 - rim);
  });
}

inline TriMesh wavy_patch_mesh(int count) {
  return graph_patch_mesh(count, [](double x, double y) {
    double r2 = x * x + y * y;
    return 0.35 * (1.0 - r2) * (1.0 + 0.6 * std::sin(3.0 * x) * std::cos(2.0 * y));
  });
}

// Two offset gaussian bumps; the asymmetry gives every map genuine work.
inline TriMesh double_hill_mesh(int count) {
  return graph_patch_mesh(count, [](double x, double y) {
    double r2 = x * x + y * y;
    double b1 = std::exp(-((x - 0.35) * (x - 0.35) + y * y) / 0.08);
    double b2 = 0.7 * std::exp(-((x + 0.4) * (x + 0.4) + (y - 0.2) * (y - 0.2)) / 0.12);
    return (1.0 - r2) * (0.15 + 0.55 * b1 + 0.45 * b2);
  });
}

// Half ellipsoid with an elliptical footprint (semiaxes ax, ay, c0); its
// conformal map to the circular-footprint hemispheroid distorts areas.
inline TriMesh elliptical_dome_mesh(int count, double ax = 1.0, double ay = 0.65,
                                    double c0 = 0.8) {
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  auto [coords, mesh] = sample_uniform_hemispheroid(s, count);
  Points3 V = mesh.V;
  V.col(0) *= ax;
  V.col(1) *= ay;
  V.col(2) *= c0;
  return make_mesh(std::move(V), FaceList(mesh.F));
}

// The bundled benchmark family used by the ordering and bijectivity checks.
struct NamedMesh {
  std::string name;
  TriMesh mesh;
};

inline std::vector<NamedMesh> bundled_meshes(int count = 6000) {
  std::vector<NamedMesh> out;
  out.push_back({"bumpy_cap", bumpy_cap_mesh(count)});
  out.push_back({"gaussian_hill", gaussian_hill_mesh(count)});
  out.push_back({"wavy_patch", wavy_patch_mesh(count)});
  out.push_back({"double_hill", double_hill_mesh(count)});
  out.push_back({"elliptical_dome", elliptical_dome_mesh(count)});
  return out;
}

inline std::mt19937_64 rng(uint64_t seed = 20240611ull) { return std::mt19937_64(seed); }

// Gauss-Legendre nodes and weights on [-1, 1] (Newton on the recurrence).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1, p1 = t;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (t * p1 - p0) / (t * t - 1);
    x[i] = t;
    w[i] = 2.0 / ((1 - t * t) * dp * dp);
  }
}

// Tensor quadrature grid over the hemispheroid surface coordinates, exact for
// the basis inner products up to degree n_max: Gauss-Legendre in xi_hat and a
// uniform trapezoid in phi.
inline std::pair<std::vector<SpheroidalCoords>, Eigen::VectorXd> basis_quadrature(
    int n_max, SpheroidKind kind, int extra_phi = 8) {
  int nq = n_max + 2;
  int nphi = 2 * n_max + extra_phi;
  std::vector<double> gx, gw;
  gauss_legendre(nq, gx, gw);
  std::vector<SpheroidalCoords> pts;
  std::vector<double> ws;
  pts.reserve(static_cast<size_t>(nq) * nphi);
  for (int i = 0; i < nq; ++i) {
    // invert xi_hat: oblate xi = 2 sin(eta) - 1; prolate xi = 1 - 2 cos(eta)
    double eta = kind == SpheroidKind::oblate ? std::asin((gx[i] + 1) / 2)
                                              : std::acos((1 - gx[i]) / 2);
    for (int j = 0; j < nphi; ++j) {
      pts.push_back({eta, 2 * kPi * j / nphi});
      ws.push_back(gw[i] * 2 * kPi / nphi);
    }
  }
  Eigen::VectorXd wv = Eigen::Map<Eigen::VectorXd>(ws.data(), static_cast<int>(ws.size()));
  return {std::move(pts), std::move(wv)};
}

}  // namespace testsupport
