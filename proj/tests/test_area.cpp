#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hemiparam;
using namespace testsupport;

TEST_CASE("density is the constant total-area ratio at an area-proportional map") {
  // the canonical hemisphere sample itself: P^-1 of its stereographic image
  // is the identity, so rho is the constant 1
  TriMesh m = hemisphere_mesh(2000);
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  Points2 disk = spheroidal_projection(m.V, s);
  Eigen::VectorXd rho = density_rho_H(m, disk, s);
  double mean = rho.mean();
  CHECK((rho.array() - mean).abs().maxCoeff() < 1e-9 * mean);
  CHECK(mean == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("doubling the mesh scale quadruples the density") {
  TriMesh m = gaussian_hill_mesh(800);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  Points2 disk = solve_tutte_disk(reg);
  Eigen::VectorXd rho1 = density_rho_H(reg, disk, s);
  TriMesh big = reg;
  big.V *= 2.0;
  Eigen::VectorXd rho2 = density_rho_H(big, disk, s);
  CHECK(((rho2 - 4.0 * rho1).cwiseAbs().array() < 1e-12 * rho2.array().abs().maxCoeff()).all());
}

TEST_CASE("density errors on a zero-area image face") {
  Points3 V(3, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  FaceList F(1, 3);
  F << 0, 1, 2;
  TriMesh tri = make_mesh(V, F);
  Points2 disk(3, 2);
  disk << 0.3, 0.2, 0.3, 0.2, 0.5, 0.1;  // repeated image position
  Spheroid s = Spheroid::from_semiaxes(1.0, 0.5);
  REQUIRE_THROWS_WITH(density_rho_H(tri, disk, s),
                      Catch::Matchers::ContainsSubstring("face 0"));
}

TEST_CASE("a constant-density state is an equilibrium of dem_step") {
  TriMesh m = hemisphere_mesh(1500);
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  DemState st;
  st.disk = spheroidal_projection(m.V, s);
  st.density = density_rho_H(m, st.disk, s);
  DemState next = dem_step(st, m, s);
  CHECK((next.disk - st.disk).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("the dense face expands at the expense of the light one") {
  // inscribed square split along a diagonal; the source stretches one
  // triangle so its density doubles. One step must grow the dense face's
  // disk area (the shared edge moves into the low-density face).
  const double h = 1.0 / std::sqrt(2.0);
  Points3 V(4, 3);
  V << -h, -h, 0, h, -h, 0, -h, h, 0, h, h, 0;
  FaceList F(2, 3);
  F << 0, 1, 3, 0, 3, 2;  // shared diagonal 0-3
  Points3 Vsrc = V;
  Vsrc(2, 0) = -3 * h;  // stretch the source of face (0,3,2) only
  TriMesh src{Vsrc, F};
  Spheroid s = Spheroid::from_semiaxes(1.0, 0.05);  // nearly flat target
  DemState st;
  st.disk = V.leftCols<2>();
  st.density = density_rho_H(src, st.disk, s);
  REQUIRE(st.density[1] > 1.5 * st.density[0]);
  BoundaryLoop loop = boundary_loop(src);
  DemState next = dem_step(st, src, s, &loop);
  auto area2 = [&](const Points2& pts, int f) {
    return signed_area_2d(pts.row(F(f, 0)), pts.row(F(f, 1)), pts.row(F(f, 2)));
  };
  CHECK(area2(next.disk, 1) > area2(st.disk, 1));
  CHECK(area2(next.disk, 0) < area2(st.disk, 0));
}

TEST_CASE("density variance is non-increasing over the first iterations") {
  TriMesh m = double_hill_mesh(1500);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  Points2 g = solve_tutte_disk(reg);
  DemState st;
  st.disk = g;
  st.density = density_rho_H(reg, g, s);
  BoundaryLoop loop = boundary_loop(reg);
  double prev = coefficient_of_variation(st.density);
  for (int it = 0; it < 10; ++it) {
    st = dem_step(st, reg, s, &loop);
    double cv = coefficient_of_variation(st.density);
    CHECK(cv <= prev + 1e-12);
    prev = cv;
  }
}

TEST_CASE("boundary stays on the unit circle through the iteration") {
  TriMesh m = wavy_patch_mesh(1200);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  Points2 g = solve_tutte_disk(reg);
  BoundaryLoop loop = boundary_loop(reg);
  DemState st;
  st.disk = g;
  st.density = density_rho_H(reg, g, s);
  for (int it = 0; it < 8; ++it) {
    st = dem_step(st, reg, s, &loop);
    for (int b : loop.indices)
      CHECK(std::abs(st.disk.row(b).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("hemisphere at the sphere limit equalizes below 0.02 mean area distortion") {
  TriMesh m = hemisphere_mesh(10000);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  AreaResult r = hemispheroidal_area_preserving_full(reg, s);
  CHECK(flipped_face_count(r.disk, reg.F) == 0);
  CHECK(r.converged);
  CHECK(r.final_cv < 0.05);
  CHECK(area_distortion(reg, r.hemi).mean_abs < 0.02);
}

TEST_CASE("area-preserving map beats Tutte on area distortion everywhere") {
  for (auto& nm : bundled_meshes(1200)) {
    INFO(nm.name);
    TriMesh reg = register_mesh(nm.mesh).first;
    Spheroid s = size_hemispheroid(reg);
    double d_area = area_distortion(reg, hemispheroidal_area_preserving(reg, s)).mean_abs;
    double d_tutte = area_distortion(reg, hemispheroidal_tutte(reg, s).hemi).mean_abs;
    CHECK(d_area < d_tutte);
  }
}

TEST_CASE("density is invariant under face relabeling and scales with mesh area") {
  TriMesh m = bumpy_cap_mesh(600);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  Points2 g = solve_tutte_disk(reg);
  Eigen::VectorXd rho = density_rho_H(reg, g, s);
  // relabel faces by reversing their order
  TriMesh relabeled = reg;
  for (int f = 0; f < reg.num_faces(); ++f)
    relabeled.F.row(f) = reg.F.row(reg.num_faces() - 1 - f);
  Eigen::VectorXd rho2 = density_rho_H(relabeled, g, s);
  for (int f = 0; f < reg.num_faces(); ++f)
    CHECK(rho2[f] == rho[reg.num_faces() - 1 - f]);
}

TEST_CASE("iteration log matches the recorded iterations") {
  TriMesh m = gaussian_hill_mesh(900);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  AreaResult r = hemispheroidal_area_preserving_full(reg, s);
  REQUIRE_FALSE(r.log.empty());
  CHECK(r.log.front()[0] == 0.0);
  CHECK(r.log.size() >= static_cast<size_t>(r.iterations));
}
