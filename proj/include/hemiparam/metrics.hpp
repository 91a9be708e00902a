#pragma once

// Distortion, reconstruction-error and basis-orthogonality diagnostics.

#include "hemiparam/harmonics.hpp"
#include "hemiparam/mesh.hpp"

#include "json.hpp"

namespace hemiparam {

struct Histogram {
  std::vector<double> edges;   // 65 edges for 64 bins
  std::vector<int> counts;
};

inline Histogram make_histogram(const Eigen::VectorXd& values, int bins = 64) {
  Histogram h;
  if (values.size() == 0) return h;
  double lo = values.minCoeff(), hi = values.maxCoeff();
  if (hi <= lo) hi = lo + 1.0;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0);
  for (int b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * b / bins;
  for (int i = 0; i < values.size(); ++i) {
    int b = static_cast<int>((values[i] - lo) / (hi - lo) * bins);
    ++h.counts[std::clamp(b, 0, bins - 1)];
  }
  return h;
}

// Signed per-item distortion values plus summary statistics of |value|.
struct DistortionReport {
  Eigen::VectorXd values;
  double mean_abs = 0;
  double std_abs = 0;
  Histogram histogram;

  int count() const { return static_cast<int>(values.size()); }

  static DistortionReport from_values(Eigen::VectorXd v) {
    DistortionReport r;
    r.values = std::move(v);
    const int n = r.count();
    if (n > 0) {
      Eigen::VectorXd a = r.values.cwiseAbs();
      r.mean_abs = a.mean();
      r.std_abs = std::sqrt((a.array() - r.mean_abs).square().sum() / n);
      r.histogram = make_histogram(r.values);
    }
    return r;
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"count", count()},
                          {"mean_abs", mean_abs},
                          {"std_abs", std_abs},
                          {"histogram_edges", histogram.edges},
                          {"histogram_counts", histogram.counts}};
  }
};

namespace detail {

inline Eigen::Matrix<double, Eigen::Dynamic, 3> corner_angles_of(
    const Points3& V, const FaceList& F) {
  TriMesh tmp{V, F};
  return corner_angles(tmp);
}

inline Points3 lift_to_3d(const Points2& pts) {
  Points3 out(pts.rows(), 3);
  out.leftCols<2>() = pts;
  out.col(2).setZero();
  return out;
}

}  // namespace detail

// Per-corner angle difference (degrees): image angle minus source angle.
inline DistortionReport angle_distortion(const TriMesh& mesh, const Points3& image) {
  auto src = corner_angles(mesh);
  auto img = detail::corner_angles_of(image, mesh.F);
  Eigen::VectorXd d(3 * mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int k = 0; k < 3; ++k) d[3 * f + k] = img(f, k) - src(f, k);
  return DistortionReport::from_values(std::move(d));
}

inline DistortionReport angle_distortion(const TriMesh& mesh, const Points2& image) {
  return angle_distortion(mesh, detail::lift_to_3d(image));
}

// Per-face log ratio of globally normalized areas; zero for any similarity.
inline DistortionReport area_distortion(const TriMesh& mesh, const Points3& image) {
  Eigen::VectorXd src(mesh.num_faces()), img(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    src[f] = triangle_area(mesh.V.row(mesh.F(f, 0)), mesh.V.row(mesh.F(f, 1)),
                           mesh.V.row(mesh.F(f, 2)));
    img[f] = triangle_area(image.row(mesh.F(f, 0)), image.row(mesh.F(f, 1)),
                           image.row(mesh.F(f, 2)));
  }
  double so = src.sum(), si = img.sum();
  if (!(so > 0) || !(si > 0)) throw MeshError("area_distortion: degenerate total area");
  Eigen::VectorXd d(mesh.num_faces());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!(src[f] > 0) || !(img[f] > 0))
      throw MeshError("area_distortion: zero-area face " + std::to_string(f));
    d[f] = std::log((img[f] / si) / (src[f] / so));
  }
  return DistortionReport::from_values(std::move(d));
}

inline DistortionReport area_distortion(const TriMesh& mesh, const Points2& image) {
  return area_distortion(mesh, detail::lift_to_3d(image));
}

// ---------------------------------------------------------------------------
// Point-to-surface distance via an axis-aligned BVH
// ---------------------------------------------------------------------------

namespace detail {

inline double point_triangle_dist2(const Vec3& p, const Vec3& a, const Vec3& b,
                                   const Vec3& c) {
  // Ericson, Real-Time Collision Detection, closest point on triangle
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return ap.squaredNorm();
  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return bp.squaredNorm();
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    double t = d1 / (d1 - d3);
    return (ap - t * ab).squaredNorm();
  }
  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return cp.squaredNorm();
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    double t = d2 / (d2 - d6);
    return (ap - t * ac).squaredNorm();
  }
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (bp - t * (c - b)).squaredNorm();
  }
  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom, w = vc * denom;
  return (a + v * ab + w * ac - p).squaredNorm();
}

class TriangleBVH {
 public:
  TriangleBVH(const Points3& V, const FaceList& F) : V_(V), F_(F) {
    const int nf = static_cast<int>(F.rows());
    order_.resize(nf);
    for (int f = 0; f < nf; ++f) order_[f] = f;
    cent_.resize(nf, 3);
    for (int f = 0; f < nf; ++f)
      cent_.row(f) = (V.row(F(f, 0)) + V.row(F(f, 1)) + V.row(F(f, 2))) / 3.0;
    nodes_.reserve(2 * nf);
    root_ = build(0, nf);
  }

  double distance2(const Vec3& p) const {
    double best = std::numeric_limits<double>::infinity();
    query(root_, p, best);
    return best;
  }

 private:
  struct Node {
    Vec3 lo, hi;
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in order_
  };

  int build(int begin, int end) {
    Node node;
    node.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    node.hi = -node.lo;
    for (int i = begin; i < end; ++i) {
      int f = order_[i];
      for (int k = 0; k < 3; ++k) {
        Vec3 v = V_.row(F_(f, k));
        node.lo = node.lo.cwiseMin(v);
        node.hi = node.hi.cwiseMax(v);
      }
    }
    if (end - begin <= 4) {
      node.begin = begin;
      node.end = end;
      nodes_.push_back(node);
      return static_cast<int>(nodes_.size()) - 1;
    }
    Vec3 span = node.hi - node.lo;
    int axis = 0;
    span.maxCoeff(&axis);
    int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return cent_(a, axis) < cent_(b, axis); });
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    int l = build(begin, mid);
    int r = build(mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  double box_dist2(const Node& n, const Vec3& p) const {
    Vec3 d = (n.lo - p).cwiseMax(Vec3::Zero()).cwiseMax(p - n.hi);
    return d.squaredNorm();
  }

  void query(int ni, const Vec3& p, double& best) const {
    const Node& n = nodes_[ni];
    if (box_dist2(n, p) >= best) return;
    if (n.left < 0) {
      for (int i = n.begin; i < n.end; ++i) {
        int f = order_[i];
        best = std::min(best, point_triangle_dist2(p, V_.row(F_(f, 0)),
                                                   V_.row(F_(f, 1)), V_.row(F_(f, 2))));
      }
      return;
    }
    double dl = box_dist2(nodes_[n.left], p), dr = box_dist2(nodes_[n.right], p);
    if (dl < dr) {
      query(n.left, p, best);
      query(n.right, p, best);
    } else {
      query(n.right, p, best);
      query(n.left, p, best);
    }
  }

  const Points3& V_;
  const FaceList& F_;
  std::vector<int> order_;
  Points3 cent_;
  std::vector<Node> nodes_;
  int root_ = 0;
};

inline double rms_point_to_surface(const Points3& queries, const TriangleBVH& bvh) {
  const int n = static_cast<int>(queries.rows());
  // chunk boundaries are deterministic, so the fixed-order sum is too
  std::vector<double> partial(chunk_count(n), 0.0);
  parallel_chunks(n, [&](int chunk, int begin, int end) {
    double acc = 0;
    for (int i = begin; i < end; ++i) acc += bvh.distance2(queries.row(i));
    partial[chunk] = acc;
  });
  double acc = 0;
  for (double p : partial) acc += p;
  return std::sqrt(acc / std::max(1, n));
}

}  // namespace detail

// Symmetric RMS surface distance: vertices of each mesh against the other
// surface, the two directional RMS values averaged. Normalized by the first
// mesh's bounding-box diagonal unless normalized = false.
inline double a_rmse(const TriMesh& input, const TriMesh& output, bool normalized = true) {
  if (input.num_vertices() == 0 || output.num_vertices() == 0)
    throw MeshError("a_rmse: empty mesh");
  detail::TriangleBVH bvh_out(output.V, output.F);
  detail::TriangleBVH bvh_in(input.V, input.F);
  double fwd = detail::rms_point_to_surface(input.V, bvh_out);
  double bwd = detail::rms_point_to_surface(output.V, bvh_in);
  double d = 0.5 * (fwd + bwd);
  if (normalized) {
    Vec3 lo = input.V.colwise().minCoeff(), hi = input.V.colwise().maxCoeff();
    double diag = (hi - lo).norm();
    if (!(diag > 0)) throw MeshError("a_rmse: degenerate input bounding box");
    d /= diag;
  }
  return d;
}

namespace detail {

inline Eigen::MatrixXd normalized_gram(const std::vector<SpheroidalCoords>& pts,
                                       int n_max, SpheroidKind kind,
                                       const Eigen::VectorXd* weights = nullptr) {
  Eigen::MatrixXd B = basis_matrix(pts, n_max, kind);
  if (weights) {
    if (weights->size() != B.rows())
      throw std::invalid_argument("orthogonality: weight count mismatch");
    B = weights->cwiseMax(0.0).cwiseSqrt().asDiagonal() * B;
  }
  for (int c = 0; c < B.cols(); ++c) {
    double n = B.col(c).norm();
    if (!(n > 0)) throw MeshError("orthogonality: zero-norm basis column " + std::to_string(c));
    B.col(c) /= n;
  }
  return B.transpose() * B;
}

}  // namespace detail

// Entrywise |Gram(map) - Gram(reference)| and its mean. Columns are unit
// normalized first, so the comparison only sees the sampling geometry.
inline std::pair<Eigen::MatrixXd, double> orthogonality_error(
    const std::vector<SpheroidalCoords>& map_points,
    const std::vector<SpheroidalCoords>& reference_points, int n_max,
    SpheroidKind kind) {
  if (map_points.empty() || reference_points.empty())
    throw std::invalid_argument("orthogonality_error: empty point set");
  Eigen::MatrixXd gm = detail::normalized_gram(map_points, n_max, kind);
  Eigen::MatrixXd gr = detail::normalized_gram(reference_points, n_max, kind);
  Eigen::MatrixXd diff = (gm - gr).cwiseAbs();
  return {diff, diff.mean()};
}

// Mean absolute off-diagonal Gram entry of the unit-normalized sampled basis;
// zero for an exactly orthogonal sampling.
inline double mean_orthogonality(const std::vector<SpheroidalCoords>& points, int n_max,
                                 SpheroidKind kind,
                                 const Eigen::VectorXd* weights = nullptr) {
  Eigen::MatrixXd g = detail::normalized_gram(points, n_max, kind, weights);
  const int k = static_cast<int>(g.rows());
  if (k <= 1) return 0;
  double acc = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) acc += std::abs(g(i, j));
  return acc / (static_cast<double>(k) * k - k);
}

}  // namespace hemiparam
