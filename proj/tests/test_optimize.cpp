#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hemiparam;
using namespace testsupport;

TEST_CASE("1D quadratic minimum is found within tolerance") {
  SearchSpec spec;
  spec.lower = Eigen::VectorXd::Constant(1, 0.0);
  spec.upper = Eigen::VectorXd::Constant(1, 1.0);
  spec.tolerance = 1e-4;
  auto res = minimize_bounded(
      [](const Eigen::VectorXd& x) { return (x[0] - 0.3) * (x[0] - 0.3); }, spec);
  CHECK(std::abs(res.x[0] - 0.3) < 1e-4);
  CHECK(res.evaluations <= spec.max_evaluations);
}

TEST_CASE("best-so-far trace is monotone on a 2D bowl") {
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(-2, -2);
  spec.upper = Eigen::Vector2d(2, 2);
  spec.seeds = {Eigen::Vector2d(-1.5, 1.5), Eigen::Vector2d(1.5, 1.5)};
  std::vector<double> trace;
  double best = std::numeric_limits<double>::infinity();
  auto res = minimize_bounded(
      [&](const Eigen::VectorXd& x) {
        double dx = x[0] - 0.4, dy = x[1] + 0.7;
        double v = dx * dx + 5 * dy * dy + 0.5 * dx * dx * dx * dx;
        best = std::min(best, v);
        trace.push_back(best);
        return v;
      },
      spec);
  for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1]);
  CHECK(res.value == Catch::Approx(trace.back()));
  CHECK(std::abs(res.x[0] - 0.4) < 5e-3);
  CHECK(std::abs(res.x[1] + 0.7) < 5e-3);
}

TEST_CASE("the best value never loses to any seed") {
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(0, 0);
  spec.upper = Eigen::Vector2d(1, 1);
  spec.seeds = {Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.9, 0.9), Eigen::Vector2d(0.5, 0.2)};
  auto rosen = [](const Eigen::VectorXd& x) {
    return 10 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
  };
  auto res = minimize_bounded(rosen, spec);
  for (const auto& s : spec.seeds) CHECK(res.value <= rosen(s));
}

TEST_CASE("infeasible regions marked +inf are avoided") {
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(0, 0);
  spec.upper = Eigen::Vector2d(1, 1);
  auto res = minimize_bounded(
      [](const Eigen::VectorXd& x) {
        bool inside = x[0] >= 0.55 && x[0] <= 0.8 && x[1] >= 0.1 && x[1] <= 0.35;
        if (!inside) return std::numeric_limits<double>::infinity();
        return (x[0] - 0.6) * (x[0] - 0.6) + (x[1] - 0.3) * (x[1] - 0.3);
      },
      spec);
  CHECK(res.x[0] >= 0.55);
  CHECK(res.x[0] <= 0.8);
  CHECK(res.x[1] >= 0.1);
  CHECK(res.x[1] <= 0.35);
  CHECK(std::isfinite(res.value));
}

TEST_CASE("identical specs give bit-identical results") {
  SearchSpec spec;
  spec.lower = Eigen::Vector2d(-1, -1);
  spec.upper = Eigen::Vector2d(1, 1);
  auto f = [](const Eigen::VectorXd& x) {
    return std::sin(3 * x[0]) * std::cos(2 * x[1]) + 0.3 * x.squaredNorm();
  };
  auto a = minimize_bounded(f, spec);
  auto b = minimize_bounded(f, spec);
  CHECK(a.value == b.value);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("evaluation budget is respected") {
  SearchSpec spec;
  spec.lower = Eigen::VectorXd::Constant(3, -1.0);
  spec.upper = Eigen::VectorXd::Constant(3, 1.0);
  spec.max_evaluations = 37;
  int calls = 0;
  minimize_bounded(
      [&](const Eigen::VectorXd& x) {
        ++calls;
        return x.squaredNorm();
      },
      spec);
  CHECK(calls <= 37);
}

TEST_CASE("radius scan recovers the half-ellipsoid's own polar semiaxis") {
  TriMesh m = half_ellipsoid_mesh(2200, 0.6);
  TriMesh reg = register_mesh(m).first;
  RadiusCurveOptions opts;
  opts.coarse_samples = 11;
  opts.refine_evaluations = 4;
  auto [c_star, curve] = optimize_radius_c(reg, {0.2, 2.0}, opts);
  CHECK(c_star > 0.45);
  CHECK(c_star < 0.8);
  REQUIRE(curve.size() >= 10);
  for (size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].c >= curve[i - 1].c);
  // argmin of the emitted curve is the returned c*
  double best_v = std::numeric_limits<double>::infinity(), best_c = 0;
  for (const auto& s : curve)
    if (s.valid && s.mean_orth < best_v) {
      best_v = s.mean_orth;
      best_c = s.c;
    }
  CHECK(best_c == Catch::Approx(c_star));
}

TEST_CASE("hemisphere prefers a radius near 1") {
  TriMesh m = hemisphere_mesh(2200);
  TriMesh reg = register_mesh(m).first;
  RadiusCurveOptions opts;
  opts.coarse_samples = 11;
  opts.refine_evaluations = 4;
  auto [c_star, curve] = optimize_radius_c(reg, {0.3, 2.0}, opts);
  CHECK(std::abs(c_star - 1.0) < 0.25);
}

TEST_CASE("weight search favors the area-preserving map when it dominates") {
  // tall spike: the Tutte and conformal maps crush most of the surface into
  // a tiny apex patch, so their low-degree reconstructions are poor
  TriMesh m = half_ellipsoid_mesh(2200, 2.2);
  auto [reg, xf] = register_mesh(m);
  Spheroid s = size_hemispheroid(reg);
  ComponentCache cache = build_components(reg, s);
  WeightSearchOptions opts;
  opts.max_evaluations = 40;
  BalanceWeights w = optimize_weights(reg, s, cache, opts);
  double err_w = weight_probe_error(cache, reg, s, w, opts.n_max_probe);
  double err_area = weight_probe_error(cache, reg, s, {0, 0, 1}, opts.n_max_probe);
  CHECK(w.gamma >= 0.6);
  CHECK(err_w <= err_area + 1e-12);
}
