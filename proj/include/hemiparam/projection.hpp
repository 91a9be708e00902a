#pragma once

// Generalized stereographic projection between the plane and the Northern
// hemispheroid, and the spheroidal surface coordinates (eta, phi) with the
// affine Legendre argument xi_hat. The unit circle maps to the equator and
// the open unit disk to z > 0.
//
// Surface parametrization used throughout for both kinds:
//   (x, y, z) = (a cos(eta) cos(phi), a cos(eta) sin(phi), c sin(eta)),
// with eta in [0, pi/2] from equator to apex and phi in [0, 2*pi).

#include "hemiparam/registration.hpp"

namespace hemiparam {

// Latitudes within eps_eta of the apex are clamped away to keep the basis
// well behaved there; pi/160 matches the default used for reconstruction.
inline constexpr double kDefaultEpsEta = kPi / 160.0;

struct SpheroidalCoords {
  double eta = 0;  // [0, pi/2 - eps_eta]
  double phi = 0;  // [0, 2*pi)
};

inline Vec3 inverse_spheroidal_projection(const Vec2& p, const Spheroid& s) {
  double r2 = p.squaredNorm();
  double denom = 1.0 + r2;
  return Vec3(2.0 * s.a * p.x() / denom, 2.0 * s.a * p.y() / denom,
              -s.c * (-1.0 + r2) / denom);
}

inline Points3 inverse_spheroidal_projection(const Points2& pts, const Spheroid& s) {
  Points3 out(pts.rows(), 3);
  for (int i = 0; i < pts.rows(); ++i)
    out.row(i) = inverse_spheroidal_projection(Vec2(pts.row(i)), s);
  return out;
}

inline Vec2 spheroidal_projection(const Vec3& q, const Spheroid& s) {
  double denom = s.a * (1.0 + q.z() / s.c);
  if (!(std::abs(denom) > 0))
    throw std::domain_error("spheroidal projection singular at the South pole");
  return Vec2(q.x() / denom, q.y() / denom);
}

inline Points2 spheroidal_projection(const Points3& pts, const Spheroid& s) {
  Points2 out(pts.rows(), 2);
  for (int i = 0; i < pts.rows(); ++i)
    out.row(i) = spheroidal_projection(Vec3(pts.row(i)), s);
  return out;
}

// Inverts the surface parametrization at an on-spheroid point, clamping the
// latitude into [0, pi/2 - eps_eta]. phi is wrapped to [0, 2*pi).
inline SpheroidalCoords to_eta_phi(const Vec3& q, const Spheroid& s,
                                   double eps_eta = kDefaultEpsEta) {
  double residual = s.implicit_residual(q);
  if (std::abs(residual) > 1e-6)
    throw std::domain_error("point is off the spheroid (residual " +
                            std::to_string(residual) + ")");
  if (q.z() < -1e-9 * s.c)
    throw std::domain_error("point lies on the Southern half");
  SpheroidalCoords out;
  out.phi = std::atan2(q.y(), q.x());
  if (out.phi < 0) out.phi += 2.0 * kPi;
  double rho = std::hypot(q.x(), q.y());
  out.eta = std::atan2(std::max(q.z(), 0.0) / s.c, rho / s.a);
  out.eta = std::clamp(out.eta, 0.0, kPi / 2.0 - eps_eta);
  return out;
}

inline std::vector<SpheroidalCoords> to_eta_phi(const Points3& pts, const Spheroid& s,
                                                double eps_eta = kDefaultEpsEta) {
  std::vector<SpheroidalCoords> out(pts.rows());
  for (int i = 0; i < pts.rows(); ++i) out[i] = to_eta_phi(Vec3(pts.row(i)), s, eps_eta);
  return out;
}

// Affine shift of the Legendre argument (equator -> -1, apex -> +1).
inline double xi_hat(double eta, SpheroidKind kind) {
  return kind == SpheroidKind::oblate ? 2.0 * std::sin(eta) - 1.0
                                      : -2.0 * std::cos(eta) + 1.0;
}

inline Vec3 eta_phi_to_point(const SpheroidalCoords& coords, const Spheroid& s) {
  double ce = std::cos(coords.eta);
  return Vec3(s.a * ce * std::cos(coords.phi), s.a * ce * std::sin(coords.phi),
              s.c * std::sin(coords.eta));
}

}  // namespace hemiparam
