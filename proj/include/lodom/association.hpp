#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lodom/geom.hpp"
#include "lodom/kdtree.hpp"
#include "lodom/projection.hpp"

namespace lodom {

// One point-to-plane pair. `p` is already expressed in the map frame.
struct Correspondence {
  Vec3 p;
  Vec3 q;
  Vec3 n;
  double w = 1.0;
  std::size_t source = 0;  // index of p in the associated point array
};

// How pairs are weighted and filtered once a neighbor is found.
struct PairingParams {
  double sigma = 0.5;
  bool weighting = true;
  // Drop pairs whose point-to-plane residual exceeds this, meters.
  std::optional<double> residual_cutoff;
};

// Anything that can pair map-frame points with map points and normals.
class CorrespondenceSource {
 public:
  virtual ~CorrespondenceSource() = default;
  virtual std::vector<Correspondence> associate(
      std::span<const Vec3> points, const PairingParams& pairing) const = 0;
};

// Per-point normal from the k-neighborhood covariance, oriented toward
// `viewpoint`. nullopt marks degenerate neighborhoods (two smallest
// eigenvalues equal within 1e-9).
std::vector<std::optional<Vec3>> pca_normals(std::span<const Vec3> points,
                                             const KdTree& index, std::size_t k,
                                             const Vec3& viewpoint);

// Up to `depth` map points per pixel, sorted by increasing range.
class CandidateGrid {
 public:
  CandidateGrid() = default;
  CandidateGrid(int height, int width, int depth);

  int depth() const { return depth_; }
  std::span<const Vec3> at(int row, int col) const;
  // Inserts keeping range order; drops the farthest beyond `depth`.
  void insert(int row, int col, const Vec3& p);

  bool operator==(const CandidateGrid&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int depth_ = 0;
  std::vector<Vec3> points_;
  std::vector<double> ranges_;
  std::vector<std::uint8_t> counts_;
};

// Projects each point of `scan` moved by `pose` into the map image and
// pairs it with the closest candidate of that pixel. Without a candidate
// grid only the vertex-map point is considered.
std::vector<Correspondence> projective_associate(
    const VertexMap& map_vm, const NormalMap& map_nm,
    const CandidateGrid* candidates, std::span<const Vec3> scan,
    const Pose& pose, const ProjectionSpec& spec,
    const PairingParams& pairing = {});

// Nearest map point within r_max; pairs whose map normal is invalid are
// skipped. `points` are already in the map frame.
std::vector<Correspondence> kd_associate(
    const KdTree& tree, std::span<const std::optional<Vec3>> map_normals,
    std::span<const Vec3> points, double r_max, const PairingParams& pairing);

}  // namespace lodom
