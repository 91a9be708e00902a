#pragma once

// Searches over the parameterization pipeline: the hemispheroid radius c
// against the basis orthogonality proxy, and the balance weights against the
// low-degree reconstruction error.

#include "hemiparam/balanced.hpp"
#include "hemiparam/metrics.hpp"

namespace hemiparam {

struct RadiusSample {
  double c = 0;
  double mean_orth = std::numeric_limits<double>::infinity();
  double armse = std::numeric_limits<double>::quiet_NaN();
  bool valid = false;
};

struct RadiusCurveOptions {
  int coarse_samples = 15;
  int refine_evaluations = 6;
  int n_max_probe = 10;
  bool with_armse = false;
  DemOptions dem;
};

namespace detail {

inline RadiusSample probe_radius(const TriMesh& mesh, double c,
                                 const RadiusCurveOptions& opts) {
  RadiusSample sample;
  sample.c = c;
  try {
    Spheroid s = Spheroid::from_semiaxes(1.0, c);
    AreaResult ar = hemispheroidal_area_preserving_full(mesh, s, opts.dem);
    auto coords = to_eta_phi(ar.hemi, s);
    sample.mean_orth = mean_orthogonality(coords, opts.n_max_probe, s.kind);
    if (opts.with_armse) {
      HarmonicCoeffs hc = decompose(ar.hemi, mesh.V, s, opts.n_max_probe);
      TriMesh recon{reconstruct(hc, coords, opts.n_max_probe), mesh.F};
      sample.armse = a_rmse(mesh, recon);
    }
    sample.valid = std::isfinite(sample.mean_orth);
  } catch (const std::exception& e) {
    warn(std::string("optimize_radius_c: c=") + std::to_string(c) + " failed: " + e.what());
    sample.valid = false;
  }
  return sample;
}

}  // namespace detail

// Scans c over log-uniform samples of [c_bounds], refines around the best
// one, and returns the minimizer together with the full sampled curve
// (sorted by c). Failed parameterizations are kept in the curve as invalid.
inline std::pair<double, std::vector<RadiusSample>> optimize_radius_c(
    const TriMesh& registered, std::pair<double, double> c_bounds = {0.2, 2.0},
    RadiusCurveOptions opts = {}) {
  if (!(c_bounds.first > 0) || !(c_bounds.second > c_bounds.first))
    throw std::invalid_argument("optimize_radius_c: bad bounds");
  std::vector<RadiusSample> curve;
  double lo = std::log(c_bounds.first), hi = std::log(c_bounds.second);
  for (int i = 0; i < opts.coarse_samples; ++i) {
    double t = opts.coarse_samples == 1 ? 0.5 : static_cast<double>(i) / (opts.coarse_samples - 1);
    curve.push_back(detail::probe_radius(registered, std::exp(lo + t * (hi - lo)), opts));
  }
  int best = -1;
  for (size_t i = 0; i < curve.size(); ++i)
    if (curve[i].valid && (best < 0 || curve[i].mean_orth < curve[best].mean_orth))
      best = static_cast<int>(i);
  if (best < 0) throw MeshError("optimize_radius_c: every sample failed");

  // golden-section style refinement between the neighbors of the incumbent
  double bracket_lo = best > 0 ? curve[best - 1].c : curve[best].c;
  double bracket_hi = best + 1 < static_cast<int>(curve.size()) ? curve[best + 1].c : curve[best].c;
  for (int k = 0; k < opts.refine_evaluations && bracket_hi > bracket_lo; ++k) {
    double t = (k + 1.0) / (opts.refine_evaluations + 1.0);
    double c = bracket_lo + t * (bracket_hi - bracket_lo);
    curve.push_back(detail::probe_radius(registered, c, opts));
  }
  std::sort(curve.begin(), curve.end(),
            [](const RadiusSample& a, const RadiusSample& b) { return a.c < b.c; });
  double best_c = 0, best_v = std::numeric_limits<double>::infinity();
  for (const auto& s : curve)
    if (s.valid && s.mean_orth < best_v) {
      best_v = s.mean_orth;
      best_c = s.c;
    }
  return {best_c, curve};
}

struct WeightSearchOptions {
  int n_max_probe = 10;
  int max_evaluations = 60;
  double tolerance = 1e-3;
};

// Reconstruction error of the balanced map at the probe degree, evaluated on
// the map's own sample points.
inline double weight_probe_error(const ComponentCache& cache, const TriMesh& mesh,
                                 const Spheroid& s, const BalanceWeights& w,
                                 int n_max_probe) {
  BalancedResult b = balanced_from_components(cache, mesh, s, w);
  auto coords = to_eta_phi(b.hemi, s);
  HarmonicCoeffs hc = decompose(b.hemi, mesh.V, s, n_max_probe);
  TriMesh recon{reconstruct(hc, coords, n_max_probe), mesh.F};
  return a_rmse(mesh, recon);
}

// Minimizes the probe reconstruction error over the weight simplex,
// parameterized by (alpha, beta) with gamma = 1 - alpha - beta.
inline BalanceWeights optimize_weights(const TriMesh& registered, const Spheroid& s,
                                       const ComponentCache& cache,
                                       WeightSearchOptions opts = {}) {
  auto objective = [&](const Eigen::VectorXd& x) {
    double alpha = x[0], beta = x[1], gamma = 1.0 - alpha - beta;
    if (gamma < -1e-12) return std::numeric_limits<double>::infinity();
    BalanceWeights w{alpha, beta, std::max(gamma, 0.0)};
    double scale = w.alpha + w.beta + w.gamma;
    w.alpha /= scale;
    w.beta /= scale;
    w.gamma /= scale;
    try {
      return weight_probe_error(cache, registered, s, w, opts.n_max_probe);
    } catch (const std::exception&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(0, 0);
  spec.upper = Eigen::Vector2d(1, 1);
  spec.max_evaluations = opts.max_evaluations;
  spec.tolerance = opts.tolerance;
  for (double a : {0.0, 0.5, 1.0})
    for (double b : {0.0, 0.5, 1.0})
      if (a + b <= 1.0) spec.seeds.push_back(Eigen::Vector2d(a, b));
  spec.seeds.push_back(Eigen::Vector2d(1.0 / 3.0, 1.0 / 3.0));
  MinimizeResult res = minimize_bounded(objective, spec);
  double alpha = res.x[0], beta = res.x[1];
  double gamma = std::max(1.0 - alpha - beta, 0.0);
  double scale = alpha + beta + gamma;
  return BalanceWeights{alpha / scale, beta / scale, gamma / scale};
}

inline BalanceWeights optimize_weights(const TriMesh& registered, const Spheroid& s,
                                       WeightSearchOptions opts = {}) {
  ComponentCache cache = build_components(registered, s);
  return optimize_weights(registered, s, cache, opts);
}

}  // namespace hemiparam
