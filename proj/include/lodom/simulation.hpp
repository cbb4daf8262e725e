#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "lodom/cloud_io.hpp"
#include "lodom/config.hpp"
#include "lodom/geom.hpp"

namespace lodom {

// Parallelogram origin + a*u + b*v, a, b in [0, 1].
struct Rectangle {
  Vec3 origin;
  Vec3 u;
  Vec3 v;
};

// Box with half extents in its own frame; `pose` maps box to world.
struct Box {
  Pose pose;
  Vec3 half_extents;

  static Box from_min_max(const Vec3& lo, const Vec3& hi);
};

using Primitive = std::variant<Rectangle, Box>;

struct Scene {
  std::vector<Primitive> primitives;

  // Throws ConfigError on a degenerate primitive.
  void validate() const;
  Scene transformed(const Pose& t) const;
};

// Channels and azimuth steps are laid out at the centers of the cells of a
// ProjectionSpec with the same dimensions, so a scan projects one point per
// pixel.
struct LidarModel {
  int channels = 64;
  int horizontal_steps = 720;
  double elevation_max_deg = 3.0;
  double elevation_min_deg = -25.0;
  double max_range = 120.0;
  double range_noise = 0.0;  // sigma, m
  std::uint32_t noise_seed = 7;

  void validate() const;
  Vec3 ray_direction(int channel, int step) const;  // sensor frame, unit
};

struct RayHit {
  double distance;
  std::size_t primitive;
};

std::optional<RayHit> raycast(const Scene& scene, const Vec3& origin,
                              const Vec3& direction, double max_range);

// One ray per (channel, step) in that order; misses are omitted. Noise, if
// any, is drawn from `rng` (or a generator seeded from the model).
PointCloud raycast_scan(const Scene& scene, const Pose& pose,
                        const LidarModel& model, std::mt19937* rng = nullptr);

// Writes <out>/velodyne/NNNNNN.bin and <out>/poses.txt (re-anchored at the
// first pose).
void generate_sequence(const Scene& scene, const Trajectory& traj,
                       const LidarModel& model, const std::filesystem::path& out);

// Primitives come from [[rectangle]] (origin, u, v) and [[box]] (min, max,
// optional yaw_deg) tables, in declaration order.
Scene build_scene(const ConfigDocument& doc);
Scene build_scene(const std::filesystem::path& path);
LidarModel lidar_model_from(const ConfigDocument& doc);

// Closed elliptical circuit with the sensor looking along the direction
// of travel, plus abrupt heading offsets: from each frame in
// `yaw_jump_frames` on, the heading carries an extra `yaw_jump_deg`.
struct CircuitSpec {
  double center_x = 0.0;
  double center_y = 0.0;
  double semi_major = 25.0;
  double semi_minor = 15.0;
  int frames = 200;
  double laps = 1.0;
  double sensor_height = 1.7;
  std::vector<int> yaw_jump_frames;
  double yaw_jump_deg = 20.0;
};

Trajectory circuit_trajectory(const CircuitSpec& spec);
CircuitSpec circuit_from(const ConfigDocument& doc);

}  // namespace lodom
