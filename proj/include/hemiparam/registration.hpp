#pragma once

// Canonical placement of an open surface and sizing of its target
// hemispheroid: centroid to the origin, least-squares boundary plane rotated
// into the XY plane with the surface bulk above it, then the polar semiaxis c
// read off the normalized bounding box.

#include "hemiparam/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "json.hpp"

namespace hemiparam {

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return R * p + t; }

  Points3 apply(const Points3& pts) const {
    return (pts * R.transpose()).rowwise() + t.transpose();
  }

  RigidTransform inverse() const {
    return RigidTransform{R.transpose(), -(R.transpose() * t)};
  }

  // other first, then this
  RigidTransform compose(const RigidTransform& other) const {
    return RigidTransform{R * other.R, R * other.t + t};
  }

  nlohmann::json to_json() const {
    std::vector<double> rot;
    rot.reserve(9);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) rot.push_back(R(i, j));
    return nlohmann::json{{"rotation", rot}, {"translation", {t.x(), t.y(), t.z()}}};
  }

  static RigidTransform from_json(const nlohmann::json& j) {
    RigidTransform out;
    const auto& rot = j.at("rotation");
    for (int i = 0; i < 3; ++i)
      for (int j2 = 0; j2 < 3; ++j2) out.R(i, j2) = rot.at(3 * i + j2).get<double>();
    const auto& tr = j.at("translation");
    out.t = Vec3(tr.at(0).get<double>(), tr.at(1).get<double>(), tr.at(2).get<double>());
    return out;
  }
};

enum class SpheroidKind { oblate, prolate };

inline const char* to_string(SpheroidKind k) {
  return k == SpheroidKind::oblate ? "oblate" : "prolate";
}

// Hemispheroid x^2+y^2 over a^2 plus z^2 over c^2 = 1, z >= 0. Oblate when
// the aspect ratio a/c exceeds 1, prolate otherwise. e is the focal distance
// and zeta the confocal shell parameter of the matching elliptic coordinates.
struct Spheroid {
  double a = 1;
  double c = 1;
  SpheroidKind kind = SpheroidKind::prolate;
  double e = 0;
  double zeta = 0;

  double aspect_ratio() const { return a / c; }

  // Residual of the implicit surface equation at p (0 on the spheroid).
  double implicit_residual(const Vec3& p) const {
    return (p.x() * p.x() + p.y() * p.y()) / (a * a) + p.z() * p.z() / (c * c) - 1.0;
  }

  static Spheroid from_semiaxes(double a, double c) {
    if (!(a > 0) || !(c > 0)) throw std::invalid_argument("spheroid semiaxes must be positive");
    // exact sphere degenerates the focal distance; nudge into the prolate
    // side (c up, so the prolate branch keeps a real focal distance)
    if (a == c) c *= 1.0 + 1e-9;
    Spheroid s;
    s.a = a;
    s.c = c;
    if (a / c > 1.0) {
      s.kind = SpheroidKind::oblate;
      s.e = std::sqrt(a * a - c * c);
      s.zeta = std::atanh(c / a);  // a = e cosh(zeta), c = e sinh(zeta)
    } else {
      s.kind = SpheroidKind::prolate;
      s.e = std::sqrt(c * c - a * a);
      s.zeta = std::atanh(a / c);  // a = e sinh(zeta), c = e cosh(zeta)
    }
    return s;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"a", a}, {"c", c}, {"kind", to_string(kind)}};
  }

  static Spheroid from_json(const nlohmann::json& j) {
    return from_semiaxes(j.at("a").get<double>(), j.at("c").get<double>());
  }
};

// Least-squares plane through a point set. Returns (unit normal, centroid).
// The normal is the singular direction of smallest singular value; when
// orient_toward is given the normal is flipped so that point has nonnegative
// signed offset, otherwise its largest-magnitude component is made positive.
inline std::pair<Vec3, Vec3> fit_boundary_plane(
    const Points3& pts, const Vec3* orient_toward = nullptr) {
  if (pts.rows() < 3) throw MeshError("boundary plane fit needs at least 3 points");
  Vec3 centroid = pts.colwise().mean();
  Points3 centered = pts.rowwise() - centroid.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(1) <= 1e-12 * std::max(sv(0), 1e-300))
    throw MeshError("degenerate boundary: points are collinear");
  Vec3 normal = svd.matrixV().col(2);
  if (orient_toward) {
    if (normal.dot(*orient_toward - centroid) < 0) normal = -normal;
  } else {
    int imax;
    normal.cwiseAbs().maxCoeff(&imax);
    if (normal(imax) < 0) normal = -normal;
  }
  return {normal, centroid};
}

namespace detail {

// Minimal rotation taking unit vector u to unit vector v.
inline Eigen::Matrix3d rotation_between(const Vec3& u, const Vec3& v) {
  Vec3 axis = u.cross(v);
  double s = axis.norm(), cth = u.dot(v);
  if (s < 1e-15) {
    if (cth > 0) return Eigen::Matrix3d::Identity();
    // antiparallel: rotate pi about any axis orthogonal to u
    Vec3 ortho = std::abs(u.x()) < 0.9 ? Vec3(1, 0, 0) : Vec3(0, 1, 0);
    Vec3 k = u.cross(ortho).normalized();
    return Eigen::AngleAxisd(kPi, k).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, cth), axis / s).toRotationMatrix();
}

inline int flipped_face_count_3d_z(const TriMesh& mesh) {
  int flips = 0;
  for (int f = 0; f < mesh.F.rows(); ++f) {
    Vec3 a = mesh.V.row(mesh.F(f, 0)), b = mesh.V.row(mesh.F(f, 1)),
         c = mesh.V.row(mesh.F(f, 2));
    if ((b - a).cross(c - a).z() < 0) ++flips;
  }
  return flips;
}

}  // namespace detail

// Canonical placement: vertex centroid at the origin and the boundary plane
// parallel to XY with the surface bulk on the z >= 0 side. Face windings are
// flipped if needed so normals point upward after alignment. The returned
// transform maps input vertices to output vertices.
inline std::pair<TriMesh, RigidTransform> register_mesh(const TriMesh& mesh) {
  Vec3 centroid = mesh.V.colwise().mean();

  BoundaryLoop loop = boundary_loop(mesh);
  Points3 bpts(loop.size(), 3);
  for (int i = 0; i < loop.size(); ++i) bpts.row(i) = mesh.V.row(loop.indices[i]);
  auto [normal, plane_centroid] = fit_boundary_plane(bpts, &centroid);

  RigidTransform xf;
  xf.R = detail::rotation_between(normal, Vec3(0, 0, 1));
  xf.t = -(xf.R * centroid);

  TriMesh out;
  out.V = xf.apply(mesh.V);
  out.F = mesh.F;

  // outward normals up: mean face normal along +z
  double zsum = 0;
  for (int f = 0; f < out.F.rows(); ++f) {
    Vec3 a = out.V.row(out.F(f, 0)), b = out.V.row(out.F(f, 1)),
         c = out.V.row(out.F(f, 2));
    zsum += (b - a).cross(c - a).z();
  }
  if (zsum < 0)
    for (int f = 0; f < out.F.rows(); ++f) std::swap(out.F(f, 1), out.F(f, 2));

  return {std::move(out), xf};
}

// Sizes the target hemispheroid for a registered mesh: a = 1 and c equal to
// the bounding-box height in units of the horizontal semi-extent. The
// horizontal semi-extent is the footprint circumradius about the z axis,
// which is invariant under the free in-plane rotation (for a centered
// symmetric footprint it equals half the larger horizontal box extent).
// A flat surface gets c floored at c_min.
inline Spheroid size_hemispheroid(const TriMesh& registered, double c_min = 0.05) {
  Vec3 lo = registered.V.colwise().minCoeff();
  Vec3 hi = registered.V.colwise().maxCoeff();
  double height = hi.z() - lo.z();
  double radius = registered.V.leftCols<2>().rowwise().norm().maxCoeff();
  if (!(radius > 0)) throw MeshError("degenerate registered mesh: zero horizontal extent");
  double c = height / radius;
  if (c < c_min) {
    detail::warn("size_hemispheroid: flat surface, flooring c at " + std::to_string(c_min));
    c = c_min;
  }
  return Spheroid::from_semiaxes(1.0, c);
}

}  // namespace hemiparam
