#include "lodom/association.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "lodom/errors.hpp"
#include "lodom/registration.hpp"

namespace lodom {

namespace {

std::optional<Correspondence> make_pair(const Vec3& p, const Vec3& q,
                                        const Vec3& n, std::size_t source,
                                        const PairingParams& pairing) {
  if (pairing.residual_cutoff &&
      std::abs(n.dot(p - q)) > *pairing.residual_cutoff) {
    return std::nullopt;
  }
  const double w = pairing.weighting ? weight(p, q, pairing.sigma) : 1.0;
  return Correspondence{p, q, n, w, source};
}

}  // namespace

std::vector<std::optional<Vec3>> pca_normals(std::span<const Vec3> points,
                                             const KdTree& index, std::size_t k,
                                             const Vec3& viewpoint) {
  if (k < 3) throw ConfigError("pca_normals needs k >= 3");
  std::vector<std::optional<Vec3>> normals(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::vector<Neighbor> nbrs = index.knn(points[i], k);
    if (nbrs.size() < 3) continue;
    Vec3 mean = Vec3::Zero();
    for (const Neighbor& nb : nbrs) mean += index.point(nb.index);
    mean /= static_cast<double>(nbrs.size());
    Mat3 cov = Mat3::Zero();
    for (const Neighbor& nb : nbrs) {
      const Vec3 d = index.point(nb.index) - mean;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());
    solver.compute(cov);
    const Vec3& ev = solver.eigenvalues();  // ascending
    if (ev(1) - ev(0) <= 1e-9 * (1.0 + ev(2))) continue;
    Vec3 n = solver.eigenvectors().col(0).normalized();
    if (n.dot(viewpoint - points[i]) < 0.0) n = -n;
    normals[i] = n;
  }
  return normals;
}

CandidateGrid::CandidateGrid(int height, int width, int depth)
    : height_(height),
      width_(width),
      depth_(depth),
      points_(static_cast<std::size_t>(height) * width * depth, Vec3::Zero()),
      ranges_(static_cast<std::size_t>(height) * width * depth, 0.0),
      counts_(static_cast<std::size_t>(height) * width, 0) {
  if (depth < 1 || depth > 255) throw ConfigError("candidate depth must be 1..255");
}

std::span<const Vec3> CandidateGrid::at(int row, int col) const {
  const std::size_t cell = static_cast<std::size_t>(row) * width_ + col;
  return {points_.data() + cell * depth_, counts_[cell]};
}

void CandidateGrid::insert(int row, int col, const Vec3& p) {
  const std::size_t cell = static_cast<std::size_t>(row) * width_ + col;
  Vec3* pts = points_.data() + cell * depth_;
  double* rng = ranges_.data() + cell * depth_;
  int count = counts_[cell];
  const double r = p.norm();
  // Equal ranges keep arrival order.
  int pos = count;
  while (pos > 0 && rng[pos - 1] > r) --pos;
  if (pos >= depth_) return;
  const int last = std::min(count, depth_ - 1);
  for (int j = last; j > pos; --j) {
    pts[j] = pts[j - 1];
    rng[j] = rng[j - 1];
  }
  pts[pos] = p;
  rng[pos] = r;
  counts_[cell] = static_cast<std::uint8_t>(std::min(count + 1, depth_));
}

std::vector<Correspondence> projective_associate(
    const VertexMap& map_vm, const NormalMap& map_nm,
    const CandidateGrid* candidates, std::span<const Vec3> scan,
    const Pose& pose, const ProjectionSpec& spec, const PairingParams& pairing) {
  std::vector<Correspondence> out;
  out.reserve(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const Vec3 p = pose * scan[i];
    const auto px = project_pixel(p, spec);
    if (!px || !map_vm.active(px->row, px->col) ||
        !map_nm.active(px->row, px->col)) {
      continue;
    }
    Vec3 q = map_vm.point(px->row, px->col);
    if (candidates) {
      double best = (q - p).squaredNorm();
      for (const Vec3& c : candidates->at(px->row, px->col)) {
        const double d2 = (c - p).squaredNorm();
        if (d2 < best) {
          best = d2;
          q = c;
        }
      }
    }
    if (auto c = make_pair(p, q, map_nm.normal(px->row, px->col), i, pairing)) {
      out.push_back(*c);
    }
  }
  return out;
}

std::vector<Correspondence> kd_associate(
    const KdTree& tree, std::span<const std::optional<Vec3>> map_normals,
    std::span<const Vec3> points, double r_max, const PairingParams& pairing) {
  std::vector<Correspondence> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto nb = tree.nearest(points[i], r_max);
    if (!nb || !map_normals[nb->index]) continue;
    if (auto c = make_pair(points[i], tree.point(nb->index),
                           *map_normals[nb->index], i, pairing)) {
      out.push_back(*c);
    }
  }
  return out;
}

}  // namespace lodom
