#include "lodom/mapping.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "lodom/errors.hpp"

namespace lodom {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    // Teschner et al. spatial hash primes.
    return static_cast<std::size_t>(k.x * 73856093) ^
           static_cast<std::size_t>(k.y * 19349663) ^
           static_cast<std::size_t>(k.z * 83492791);
  }
};

}  // namespace

LocalMap::LocalMap(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("map window must hold at least one frame");
}

void LocalMap::insert_frame(const PointCloud& pc, const Pose& pose) {
  MapFrame f{pc, pose, {}};
  f.world_points.reserve(pc.size());
  for (const Vec3& p : pc.points) f.world_points.push_back(pose * p);
  frames_.push_back(std::move(f));
  while (frames_.size() > capacity_) frames_.pop_front();
  ++revision_;
}

std::vector<Vec3> LocalMap::world_points() const {
  std::size_t n = 0;
  for (const MapFrame& f : frames_) n += f.world_points.size();
  std::vector<Vec3> out;
  out.reserve(n);
  for (const MapFrame& f : frames_) {
    out.insert(out.end(), f.world_points.begin(), f.world_points.end());
  }
  return out;
}

std::vector<Vec3> voxel_sample(std::span<const Vec3> points, double size) {
  if (!(size > 0.0)) throw ConfigError("voxel size must be > 0");
  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> slots;
  slots.reserve(points.size() / 4 + 16);
  std::vector<std::uint32_t> slot_of(points.size());
  std::vector<Vec3> sums;
  std::vector<std::uint32_t> counts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / size)),
                       static_cast<std::int64_t>(std::floor(p.y() / size)),
                       static_cast<std::int64_t>(std::floor(p.z() / size))};
    auto [it, inserted] =
        slots.try_emplace(key, static_cast<std::uint32_t>(sums.size()));
    if (inserted) {
      sums.push_back(Vec3::Zero());
      counts.push_back(0);
    }
    slot_of[i] = it->second;
    sums[it->second] += p;
    ++counts[it->second];
  }
  std::vector<double> best_d2(sums.size(), INFINITY);
  std::vector<std::uint32_t> best(sums.size(), 0);
  // Members symmetric about the centroid tie exactly in real arithmetic;
  // the slack keeps summation rounding from picking a different winner.
  const double tie = 1e-12 * size * size;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::uint32_t s = slot_of[i];
    const double d2 = (points[i] - sums[s] / counts[s]).squaredNorm();
    if (d2 < best_d2[s] - tie) {
      best_d2[s] = d2;
      best[s] = static_cast<std::uint32_t>(i);
    }
  }
  std::vector<Vec3> out;
  out.reserve(sums.size());
  for (std::uint32_t idx : best) out.push_back(points[idx]);
  return out;
}

KdMapView::KdMapView(std::vector<Vec3> points, const Vec3& viewpoint,
                     const KdViewParams& params)
    : points_(std::move(points)),
      tree_(points_),
      // Maps smaller than the neighborhood get whatever knn returns;
      // under three points every normal is invalid.
      normals_(pca_normals(points_, tree_, params.normal_neighbors, viewpoint)),
      max_distance_(params.max_distance) {}

std::vector<Correspondence> KdMapView::associate(
    std::span<const Vec3> points, const PairingParams& pairing) const {
  return kd_associate(tree_, normals_, points, max_distance_, pairing);
}

std::vector<Correspondence> ProjMapView::associate(
    std::span<const Vec3> points, const PairingParams& pairing) const {
  return projective_associate(vertices, normals, &candidates, points,
                              Pose::identity(), spec, pairing);
}

KdMapView kd_view(const LocalMap& m, const KdViewParams& params) {
  if (m.empty()) throw DataError("cannot build a map view from an empty map");
  const std::vector<Vec3> all = m.world_points();
  return KdMapView(voxel_sample(all, params.voxel_size),
                   m.last_pose().translation(), params);
}

ProjMapView projective_view(const LocalMap& m, const ProjectionSpec& spec,
                            int candidate_depth) {
  if (m.empty()) throw DataError("cannot build a map view from an empty map");
  spec.validate();
  ProjMapView view;
  view.spec = spec;
  view.reference = m.last_pose();
  view.candidates = CandidateGrid(spec.height, spec.width, candidate_depth);
  const Pose world_to_ref = inverse(view.reference);
  const std::size_t last = m.size() - 1;
  for (std::size_t fi = 0; fi < m.size(); ++fi) {
    const MapFrame& f = m.frames()[fi];
    const bool is_reference = fi == last;
    for (std::size_t i = 0; i < f.cloud.size(); ++i) {
      const Vec3 p = is_reference ? f.cloud.points[i] : world_to_ref * f.world_points[i];
      const auto px = project_pixel(p, spec);
      if (!px) continue;
      view.candidates.insert(px->row, px->col, p);
    }
  }
  view.vertices = VertexMap(spec.height, spec.width);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const auto c = view.candidates.at(row, col);
      if (!c.empty()) view.vertices.set(row, col, c.front());
    }
  }
  view.normals = normal_map(view.vertices);
  return view;
}

}  // namespace lodom
