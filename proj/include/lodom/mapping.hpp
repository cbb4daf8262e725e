#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "lodom/association.hpp"
#include "lodom/cloud_io.hpp"
#include "lodom/geom.hpp"
#include "lodom/kdtree.hpp"
#include "lodom/projection.hpp"

namespace lodom {

struct MapFrame {
  PointCloud cloud;
  Pose pose;                      // sensor -> world
  std::vector<Vec3> world_points; // pose * cloud.points
};

// Sliding window over the last `capacity` registered scans.
class LocalMap {
 public:
  explicit LocalMap(std::size_t capacity = 30);

  void insert_frame(const PointCloud& pc, const Pose& pose);

  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<MapFrame>& frames() const { return frames_; }
  const Pose& last_pose() const { return frames_.back().pose; }
  // Bumped on every insert; views built from an older revision are stale.
  std::uint64_t revision() const { return revision_; }

  std::vector<Vec3> world_points() const;

 private:
  std::size_t capacity_;
  std::deque<MapFrame> frames_;
  std::uint64_t revision_ = 0;
};

// One representative per occupied voxel: the member closest to the
// voxel's member centroid (first in input order on ties). Output follows
// the order in which voxels are first seen.
std::vector<Vec3> voxel_sample(std::span<const Vec3> points, double size);

struct KdViewParams {
  double voxel_size = 0.4;
  std::size_t normal_neighbors = 20;
  double max_distance = 1.0;  // pairing radius
};

// World-frame map queried through a k-d tree.
class KdMapView : public CorrespondenceSource {
 public:
  KdMapView(std::vector<Vec3> points, const Vec3& viewpoint,
            const KdViewParams& params);

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<std::optional<Vec3>>& normals() const { return normals_; }
  const KdTree& tree() const { return tree_; }

  std::vector<Correspondence> associate(
      std::span<const Vec3> points, const PairingParams& pairing) const override;

 private:
  std::vector<Vec3> points_;
  KdTree tree_;
  std::vector<std::optional<Vec3>> normals_;
  double max_distance_;
};

// Map rendered in the frame of the last registered scan. Points handed to
// associate() must be expressed in that frame.
struct ProjMapView : public CorrespondenceSource {
  ProjectionSpec spec;
  Pose reference;  // last registered sensor pose, world frame
  VertexMap vertices;
  NormalMap normals;
  CandidateGrid candidates;

  std::vector<Correspondence> associate(
      std::span<const Vec3> points, const PairingParams& pairing) const override;
};

// Throws DataError on an empty map.
KdMapView kd_view(const LocalMap& m, const KdViewParams& params = {});
ProjMapView projective_view(const LocalMap& m, const ProjectionSpec& spec = {},
                            int candidate_depth = 4);

}  // namespace lodom
