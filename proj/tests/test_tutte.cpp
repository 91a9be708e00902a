#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hemiparam;
using namespace testsupport;

namespace {
TriMesh single_triangle() {
  Points3 V(3, 3);
  V << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  FaceList F(1, 3);
  F << 0, 1, 2;
  return make_mesh(V, F);
}
}  // namespace

TEST_CASE("graph Laplacian of a single triangle") {
  Eigen::MatrixXd L = Eigen::MatrixXd(graph_laplacian(single_triangle()));
  Eigen::MatrixXd expected(3, 3);
  expected << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  CHECK((L - expected).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("graph Laplacian of a two-triangle strip has degrees 2,3,3,2") {
  Points3 V(4, 3);
  V << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  FaceList F(2, 3);
  F << 0, 1, 2, 0, 2, 3;
  Eigen::MatrixXd L = Eigen::MatrixXd(graph_laplacian(make_mesh(V, F)));
  CHECK(L(0, 0) == -3);
  CHECK(L(1, 1) == -2);
  CHECK(L(2, 2) == -3);
  CHECK(L(3, 3) == -2);
}

TEST_CASE("graph Laplacian rows sum to zero and the matrix is symmetric") {
  TriMesh m = bumpy_cap_mesh(1500);
  Eigen::SparseMatrix<double> L = graph_laplacian(m);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.num_vertices());
  CHECK((L * ones).cwiseAbs().maxCoeff() == 0);
  Eigen::SparseMatrix<double> D = Eigen::SparseMatrix<double>(L.transpose()) - L;
  CHECK(Eigen::MatrixXd(D).cwiseAbs().maxCoeff() == 0);
}

TEST_CASE("arc positions for equal edges quarter the circle") {
  BoundaryLoop loop;
  loop.indices = {0, 1, 2, 3};
  loop.edge_lengths = {1, 1, 1, 1};
  Points2 w = boundary_arc_positions(loop);
  CHECK((Vec2(w.row(0)) - Vec2(1, 0)).norm() == 0);
  CHECK((Vec2(w.row(1)) - Vec2(std::cos(kPi / 2), std::sin(kPi / 2))).norm() < 1e-15);
  CHECK((Vec2(w.row(2)) - Vec2(-1, 0)).norm() < 1e-15);
  CHECK((Vec2(w.row(3)) - Vec2(0, -1)).norm() < 1e-15);
}

TEST_CASE("arc positions follow cumulative length through the edge after each vertex") {
  // loop order (b3=lowest, b1, b2) with lengths l(b3->b1)=2, l(b1->b2)=1,
  // l(b2->b3)=1: angles (b1, b2, b3) = (pi/2, pi, 2pi)
  BoundaryLoop loop;
  loop.indices = {0, 1, 2};
  loop.edge_lengths = {2, 1, 1};
  Points2 w = boundary_arc_positions(loop);
  CHECK((Vec2(w.row(0)) - Vec2(1, 0)).norm() == 0);          // theta = 2pi
  CHECK((Vec2(w.row(1)) - Vec2(0, 1)).norm() < 1e-15);       // theta = pi/2
  CHECK((Vec2(w.row(2)) - Vec2(-1, 0)).norm() < 1e-15);      // theta = pi
}

TEST_CASE("arc positions have unit modulus") {
  TriMesh m = wavy_patch_mesh(900);
  Points2 w = boundary_arc_positions(boundary_loop(m));
  for (int i = 0; i < w.rows(); ++i)
    CHECK(std::abs(w.row(i).norm() - 1.0) < 1e-15);
}

TEST_CASE("Tutte disk of a single triangle is its arc positions") {
  TriMesh m = single_triangle();
  Points2 disk = solve_tutte_disk(m);
  Points2 w = boundary_arc_positions(boundary_loop(m));
  CHECK((disk - w).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("symmetric hexagon fan centers at the origin") {
  Points3 V(7, 3);
  V.row(0) << 0, 0, 0;
  for (int k = 0; k < 6; ++k)
    V.row(1 + k) << std::cos(kPi * k / 3.0), std::sin(kPi * k / 3.0), 0;
  FaceList F(6, 3);
  for (int k = 0; k < 6; ++k) F.row(k) << 0, 1 + k, 1 + (k + 1) % 6;
  TriMesh m = make_mesh(V, F);
  Points2 disk = solve_tutte_disk(m);
  CHECK(Vec2(disk.row(0)).norm() < 1e-10);
}

TEST_CASE("interior residual of the Tutte system is tiny") {
  TriMesh m = gaussian_hill_mesh(2500);
  Points2 disk = solve_tutte_disk(m);
  Eigen::SparseMatrix<double> L = graph_laplacian(m);
  Eigen::MatrixXd r = L * Eigen::MatrixXd(disk);
  BoundaryLoop loop = boundary_loop(m);
  std::vector<char> bnd(m.num_vertices(), 0);
  for (int b : loop.indices) bnd[b] = 1;
  double maxres = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!bnd[v]) maxres = std::max(maxres, r.row(v).cwiseAbs().maxCoeff());
  CHECK(maxres < 1e-10);
}

TEST_CASE("Tutte disk is fold free on every bundled mesh") {
  for (auto& nm : bundled_meshes(2000)) {
    INFO(nm.name);
    TriMesh reg = register_mesh(nm.mesh).first;
    Points2 disk = solve_tutte_disk(reg);
    CHECK(flipped_face_count(disk, reg.F) == 0);
  }
}

TEST_CASE("boundary images preserve the cyclic order of the loop") {
  TriMesh m = double_hill_mesh(1200);
  Points2 disk = solve_tutte_disk(m);
  BoundaryLoop loop = boundary_loop(m);
  // angles must be strictly increasing along the loop after the first vertex
  double prev = 0;
  for (int i = 1; i < loop.size(); ++i) {
    Vec2 p = disk.row(loop.indices[i]);
    double th = std::atan2(p.y(), p.x());
    if (th <= 0) th += 2 * kPi;
    CHECK(th > prev);
    prev = th;
  }
}

TEST_CASE("hemispheroidal Tutte lands the boundary on the equator exactly") {
  TriMesh m = bumpy_cap_mesh(1500);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = size_hemispheroid(reg);
  TutteResult r = hemispheroidal_tutte(reg, s);
  BoundaryLoop loop = boundary_loop(reg);
  for (int b : loop.indices) CHECK(std::abs(r.hemi(b, 2)) < 1e-15);
  // surface map invariants
  for (int v = 0; v < reg.num_vertices(); ++v) {
    CHECK(std::abs(s.implicit_residual(r.hemi.row(v))) <= 1e-9);
    CHECK(r.hemi(v, 2) >= -1e-12);
  }
}

TEST_CASE("sphere-limit Tutte image matches inverse stereographic projection") {
  TriMesh m = hemisphere_mesh(3000);
  TriMesh reg = register_mesh(m).first;
  Spheroid s = Spheroid::from_semiaxes(1.0, 1.0);
  TutteResult r = hemispheroidal_tutte(reg, s);
  Points2 disk = r.disk;
  double maxdev = 0;
  for (int v = 0; v < reg.num_vertices(); ++v) {
    double d = 1 + disk.row(v).squaredNorm();
    Vec3 classical(2 * disk(v, 0) / d, 2 * disk(v, 1) / d, (1 - disk.row(v).squaredNorm()) / d);
    maxdev = std::max(maxdev, (Vec3(r.hemi.row(v)) - classical).norm());
  }
  CHECK(maxdev < 1e-6);
}
