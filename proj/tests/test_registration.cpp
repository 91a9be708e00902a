#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hemiparam;
using namespace testsupport;

TEST_CASE("plane fit on exact planes") {
  {
    Points3 pts(4, 3);
    pts << 1, 0, 5, 0, 1, 5, -1, 0, 5, 0, -1, 5;
    auto [n, c] = fit_boundary_plane(pts);
    CHECK(std::abs(n.z()) == Catch::Approx(1.0));
    CHECK(c.z() == Catch::Approx(5.0));
    CHECK(n.z() > 0);  // canonical orientation
  }
  {
    Points3 pts(4, 3);
    pts << 2, 1, 0, 2, 0, 1, 2, -1, 0, 2, 0, -1;
    auto [n, c] = fit_boundary_plane(pts);
    CHECK(std::abs(n.x()) == Catch::Approx(1.0));
    CHECK(std::abs(n.y()) < 1e-12);
  }
}

TEST_CASE("plane fit matches a direct least-squares solve on noisy data") {
  auto gen = rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  const int n = 200;
  Points3 pts(n, 3);
  for (int i = 0; i < n; ++i) {
    double x = U(gen), y = U(gen);
    pts.row(i) << x, y, 0.3 * x + 1e-6 * U(gen);
  }
  auto [nrm, c] = fit_boundary_plane(pts);
  // oracle: z = a x + b y + d normal-equations fit, normal (-a,-b,1)/norm
  Eigen::MatrixXd A(n, 3);
  A.col(0) = pts.col(0);
  A.col(1) = pts.col(1);
  A.col(2).setOnes();
  Eigen::Vector3d sol = (A.transpose() * A).ldlt().solve(A.transpose() * pts.col(2));
  Vec3 expected = Vec3(-sol[0], -sol[1], 1).normalized();
  if (nrm.dot(expected) < 0) expected = -expected;
  CHECK((nrm - expected).norm() < 1e-5);
}

TEST_CASE("plane fit rejects collinear points") {
  Points3 pts(4, 3);
  for (int i = 0; i < 4; ++i) pts.row(i) << i, 2.0 * i, -i;
  REQUIRE_THROWS_WITH(fit_boundary_plane(pts), Catch::Matchers::ContainsSubstring("collinear"));
}

TEST_CASE("registering a canonical mesh is the identity") {
  TriMesh m = hemisphere_mesh(1200);
  // center the vertex centroid first so the expectation is exact
  Vec3 c = m.V.colwise().mean();
  m.V.rowwise() -= c.transpose();
  auto [reg, xf] = register_mesh(m);
  CHECK((xf.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(xf.t.norm() < 1e-9);
}

TEST_CASE("translation is undone exactly") {
  TriMesh m = hemisphere_mesh(1200);
  Vec3 c = m.V.colwise().mean();
  m.V.rowwise() -= c.transpose();
  TriMesh moved = m;
  moved.V.rowwise() += Vec3(1, 2, 3).transpose();
  auto [reg, xf] = register_mesh(moved);
  CHECK((xf.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((xf.t - Vec3(-1, -2, -3)).norm() < 1e-9);
  CHECK((reg.V - m.V).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rotation about x is undone up to an in-plane rotation") {
  TriMesh m = half_ellipsoid_mesh(1500, 0.8);
  Eigen::Matrix3d R = Eigen::AngleAxisd(kPi / 2, Vec3::UnitX()).toRotationMatrix();
  TriMesh moved = m;
  moved.V = m.V * R.transpose();
  auto [reg, xf] = register_mesh(moved);
  // boundary plane normal must map back to +z
  BoundaryLoop loop = boundary_loop(reg);
  Points3 bpts(loop.size(), 3);
  for (int i = 0; i < loop.size(); ++i) bpts.row(i) = reg.V.row(loop.indices[i]);
  auto [nrm, c] = fit_boundary_plane(bpts);
  CHECK(std::abs(nrm.z()) > 1.0 - 1e-9);
  CHECK(reg.V.col(2).mean() >= -1e-10);
}

TEST_CASE("registration posts hold on a generic pose") {
  TriMesh m = double_hill_mesh(2000);
  Eigen::Matrix3d R = Eigen::AngleAxisd(1.1, Vec3(2, -1, 0.5).normalized()).toRotationMatrix();
  TriMesh moved = m;
  moved.V = (m.V * R.transpose()).rowwise() + Vec3(0.4, -0.8, 2.0).transpose();
  auto [reg, xf] = register_mesh(moved);

  CHECK(Vec3(reg.V.colwise().mean()).norm() < 1e-10);
  BoundaryLoop loop = boundary_loop(reg);
  Points3 bpts(loop.size(), 3);
  for (int i = 0; i < loop.size(); ++i) bpts.row(i) = reg.V.row(loop.indices[i]);
  auto [nrm, c] = fit_boundary_plane(bpts);
  CHECK(std::abs(nrm.z()) > 1.0 - 1e-10);

  // transform maps input to output; its inverse recovers the input
  CHECK((xf.apply(moved.V) - reg.V).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((xf.inverse().apply(reg.V) - moved.V).cwiseAbs().maxCoeff() < 1e-10);

  // idempotence
  auto [reg2, xf2] = register_mesh(reg);
  CHECK((xf2.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(xf2.t.norm() < 1e-9);
}

TEST_CASE("rigid transform composes with its inverse to the identity") {
  RigidTransform xf;
  xf.R = Eigen::AngleAxisd(0.7, Vec3(1, 1, 1).normalized()).toRotationMatrix();
  xf.t = Vec3(0.1, -2, 0.5);
  RigidTransform id = xf.compose(xf.inverse());
  CHECK((id.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(id.t.norm() < 1e-12);
}

TEST_CASE("rigid transform JSON round trip") {
  RigidTransform xf;
  xf.R = Eigen::AngleAxisd(-0.35, Vec3(0, 1, 2).normalized()).toRotationMatrix();
  xf.t = Vec3(1e-7, 3.25, -9);
  RigidTransform back = RigidTransform::from_json(xf.to_json());
  CHECK((back.R - xf.R).cwiseAbs().maxCoeff() == 0);
  CHECK((back.t - xf.t).norm() == 0);
}

TEST_CASE("spheroid construction and classification") {
  Spheroid ob = Spheroid::from_semiaxes(1.0, 0.5);
  CHECK(ob.kind == SpheroidKind::oblate);
  CHECK(ob.e == Catch::Approx(std::sqrt(0.75)));
  CHECK(ob.e * std::cosh(ob.zeta) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(ob.e * std::sinh(ob.zeta) == Catch::Approx(0.5).epsilon(1e-12));

  Spheroid pr = Spheroid::from_semiaxes(1.0, 2.0);
  CHECK(pr.kind == SpheroidKind::prolate);
  CHECK(pr.e * std::sinh(pr.zeta) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(pr.e * std::cosh(pr.zeta) == Catch::Approx(2.0).epsilon(1e-12));

  // degenerate sphere gets nudged to the prolate side
  Spheroid sp = Spheroid::from_semiaxes(1.0, 1.0);
  CHECK(sp.kind == SpheroidKind::prolate);
  CHECK(sp.c > 1.0);
  CHECK(sp.c - 1.0 < 1e-8);
}

TEST_CASE("hemisphere sizes to c of about 1") {
  TriMesh m = hemisphere_mesh(4000);
  auto [reg, xf] = register_mesh(m);
  Spheroid s = size_hemispheroid(reg);
  CHECK(s.a == 1.0);
  CHECK(s.c == Catch::Approx(1.0).margin(2e-3));
}

TEST_CASE("half ellipsoid sizes to its polar semiaxis") {
  TriMesh m = half_ellipsoid_mesh(4000, 0.6);
  auto [reg, xf] = register_mesh(m);
  Spheroid s = size_hemispheroid(reg);
  CHECK(s.c == Catch::Approx(0.6).margin(2e-3));
  CHECK(s.kind == SpheroidKind::oblate);
}

TEST_CASE("flat surface floors c with a warning") {
  std::vector<std::string> warnings;
  set_warning_handler([&](const std::string& w) { warnings.push_back(w); });
  TriMesh flat = fibonacci_disk_mesh(500);
  auto [reg, xf] = register_mesh(flat);
  Spheroid s = size_hemispheroid(reg);
  CHECK(s.c == Catch::Approx(0.05));
  CHECK_FALSE(warnings.empty());
  set_warning_handler([](const std::string&) {});
}

TEST_CASE("sizing is invariant under rigid motion") {
  TriMesh m = wavy_patch_mesh(2500);
  auto [reg1, xf1] = register_mesh(m);
  double c1 = size_hemispheroid(reg1).c;
  TriMesh moved = m;
  Eigen::Matrix3d R = Eigen::AngleAxisd(2.2, Vec3(1, 0, 3).normalized()).toRotationMatrix();
  moved.V = (m.V * R.transpose()).rowwise() + Vec3(5, 5, 5).transpose();
  auto [reg2, xf2] = register_mesh(moved);
  double c2 = size_hemispheroid(reg2).c;
  CHECK(c1 == Catch::Approx(c2).epsilon(1e-9));
}
