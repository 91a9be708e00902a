#pragma once

// Derivative-free bounded minimization: multi-start pattern search over a box
// with a Nelder-Mead polish. Deterministic for a fixed seed list. Used for
// the Mobius parameters, the balance weights and the hemispheroid radius.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hemiparam {

struct SearchSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int max_evaluations = 200;
  double tolerance = 1e-4;
  std::vector<Eigen::VectorXd> seeds;

  int dimension() const { return static_cast<int>(lower.size()); }

  void validate() const {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw std::invalid_argument("SearchSpec: bad bounds");
    for (int i = 0; i < lower.size(); ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i]))
        throw std::invalid_argument("SearchSpec: bounds must be finite with lower < upper");
    }
    if (!(tolerance > 0)) throw std::invalid_argument("SearchSpec: tolerance must be positive");
  }
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

inline MinimizeResult minimize_bounded(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const SearchSpec& spec) {
  spec.validate();
  const int d = spec.dimension();

  MinimizeResult best;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    double v = objective(x);
    ++evals;
    if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
    if (v < best.value) {
      best.value = v;
      best.x = x;
    }
    return v;
  };
  auto clamp_box = [&](Eigen::VectorXd x) {
    for (int i = 0; i < d; ++i) x[i] = std::clamp(x[i], spec.lower[i], spec.upper[i]);
    return x;
  };

  std::vector<Eigen::VectorXd> seeds = spec.seeds;
  if (seeds.empty()) seeds.push_back(0.5 * (spec.lower + spec.upper));
  for (const auto& s : seeds) {
    if (evals >= spec.max_evaluations) break;
    eval(clamp_box(s));
  }
  if (best.x.size() == 0) best.x = clamp_box(seeds.front());

  Eigen::VectorXd span = spec.upper - spec.lower;

  // grid scans at three resolutions, each centered on the incumbent
  {
    int k = std::clamp(static_cast<int>(std::floor(
                std::pow(spec.max_evaluations / 6.0, 1.0 / d))),
                       3, 9);
    double shrink = 1.0;
    for (int level = 0; level < 3 && evals < spec.max_evaluations; ++level) {
      Eigen::VectorXd lo(d), hi(d);
      for (int i = 0; i < d; ++i) {
        double half = 0.5 * shrink * span[i];
        lo[i] = std::max(spec.lower[i], best.x[i] - half);
        hi[i] = std::min(spec.upper[i], best.x[i] + half);
      }
      std::vector<int> idx(d, 0);
      while (evals < spec.max_evaluations) {
        Eigen::VectorXd cand(d);
        for (int i = 0; i < d; ++i)
          cand[i] = k == 1 ? 0.5 * (lo[i] + hi[i])
                           : lo[i] + (hi[i] - lo[i]) * idx[i] / (k - 1);
        eval(cand);
        int i = 0;
        while (i < d && ++idx[i] == k) idx[i++] = 0;
        if (i == d) break;
      }
      shrink *= 0.25;
    }
  }

  // compass pattern search from the incumbent, three step resolutions
  for (double scale : {1.0 / 8.0, 1.0 / 32.0, 1.0 / 128.0}) {
    Eigen::VectorXd step = scale * span;
    while (evals < spec.max_evaluations && step.maxCoeff() > spec.tolerance * 0.25) {
      bool improved = false;
      for (int i = 0; i < d && evals < spec.max_evaluations; ++i) {
        for (double sgn : {+1.0, -1.0}) {
          Eigen::VectorXd cand = best.x;
          cand[i] += sgn * step[i];
          cand = clamp_box(cand);
          if ((cand - best.x).cwiseAbs().maxCoeff() == 0) continue;
          double cur = best.value;
          if (eval(cand) < cur) {
            improved = true;
            break;
          }
          if (evals >= spec.max_evaluations) break;
        }
      }
      if (!improved) break;
    }
  }

  // Nelder-Mead polish clipped to the box
  if (evals < spec.max_evaluations) {
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    std::vector<std::pair<double, Eigen::VectorXd>> simplex;
    simplex.emplace_back(best.value, best.x);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd v = best.x;
      double h = 0.05 * span[i];
      v[i] += (v[i] + h <= spec.upper[i]) ? h : -h;
      v = clamp_box(v);
      simplex.emplace_back(eval(v), v);
      if (evals >= spec.max_evaluations) break;
    }
    while (evals < spec.max_evaluations &&
           static_cast<int>(simplex.size()) == d + 1) {
      std::sort(simplex.begin(), simplex.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double spread = 0;
      for (int i = 1; i <= d; ++i)
        spread = std::max(spread, (simplex[i].second - simplex[0].second).cwiseAbs().maxCoeff());
      if (spread < spec.tolerance) break;
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
      for (int i = 0; i < d; ++i) centroid += simplex[i].second;
      centroid /= d;
      const auto& worst = simplex[d];
      Eigen::VectorXd xr = clamp_box(centroid + alpha * (centroid - worst.second));
      double fr = eval(xr);
      if (fr < simplex[0].first) {
        Eigen::VectorXd xe = clamp_box(centroid + gamma * (centroid - worst.second));
        double fe = (evals < spec.max_evaluations) ? eval(xe) : fr;
        simplex[d] = fe < fr ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
      } else if (fr < simplex[d - 1].first) {
        simplex[d] = {fr, xr};
      } else {
        Eigen::VectorXd xc = clamp_box(centroid + rho * (worst.second - centroid));
        double fc = (evals < spec.max_evaluations) ? eval(xc) : fr;
        if (fc < worst.first) {
          simplex[d] = {fc, xc};
        } else {
          for (int i = 1; i <= d && evals < spec.max_evaluations; ++i) {
            Eigen::VectorXd xs =
                clamp_box(simplex[0].second + sigma * (simplex[i].second - simplex[0].second));
            simplex[i] = {eval(xs), xs};
          }
        }
      }
    }
  }

  best.evaluations = evals;
  return best;
}

}  // namespace hemiparam
