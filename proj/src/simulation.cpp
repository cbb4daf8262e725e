#include "lodom/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lodom/errors.hpp"

namespace lodom {

namespace fs = std::filesystem;

namespace {

constexpr double kMinHitDistance = 1e-6;

std::optional<double> intersect(const Rectangle& r, const Vec3& o, const Vec3& d) {
  const Vec3 n = r.u.cross(r.v);
  const double denom = d.dot(n);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = (r.origin - o).dot(n) / denom;
  if (!(t > kMinHitDistance)) return std::nullopt;
  const Vec3 rel = o + t * d - r.origin;
  // Solve rel = a u + b v in the least-squares sense (exact on the plane).
  const double uu = r.u.dot(r.u), uv = r.u.dot(r.v), vv = r.v.dot(r.v);
  const double ru = rel.dot(r.u), rv = rel.dot(r.v);
  const double det = uu * vv - uv * uv;
  const double a = (ru * vv - rv * uv) / det;
  const double b = (rv * uu - ru * uv) / det;
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) return std::nullopt;
  return t;
}

// Slab test with the ray already expressed in the box frame.
std::optional<double> intersect_local_box(const Vec3& half, const Vec3& o,
                                          const Vec3& d) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < -half[k] || o[k] > half[k]) return std::nullopt;
      continue;
    }
    double t0 = (-half[k] - o[k]) / d[k];
    double t1 = (half[k] - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near > kMinHitDistance) return t_near;
  // Origin inside the box: the exit face is the visible surface.
  if (t_far > kMinHitDistance) return t_far;
  return std::nullopt;
}

std::optional<double> intersect(const Box& b, const Vec3& o, const Vec3& d) {
  const Mat3 rt = b.pose.rotation().transpose();
  return intersect_local_box(b.half_extents, rt * (o - b.pose.translation()),
                             rt * d);
}

// Bounding circle of the primitive's xy footprint.
void footprint(const Primitive& p, Eigen::Vector2d& center, double& radius) {
  if (const auto* r = std::get_if<Rectangle>(&p)) {
    const Vec3 c = r->origin + 0.5 * (r->u + r->v);
    center = c.head<2>();
    radius = 0.5 * std::max((r->u + r->v).head<2>().norm(),
                            (r->u - r->v).head<2>().norm());
    return;
  }
  const Box& b = std::get<Box>(p);
  center = b.pose.translation().head<2>();
  radius = b.half_extents.norm();
}

// Per-azimuth candidate lists for one sensor position. Rays whose
// horizontal direction falls in a bin only need the primitives listed
// there.
class AzimuthIndex {
 public:
  static constexpr int kBins = 720;

  AzimuthIndex(const Scene& scene, const Vec3& origin) : bins_(kBins) {
    const double bin_width = 2.0 * kPi / kBins;
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
      Eigen::Vector2d c;
      double radius;
      footprint(scene.primitives[i], c, radius);
      const Eigen::Vector2d rel = c - origin.head<2>();
      const double dist = rel.norm();
      if (dist <= radius * 1.0001 + 1e-9) {
        always_.push_back(i);
        continue;
      }
      const double mid = std::atan2(rel.y(), rel.x());
      const double half = std::asin(std::min(1.0, radius / dist));
      const int lo = static_cast<int>(std::floor((mid - half + kPi) / bin_width)) - 1;
      const int hi = static_cast<int>(std::floor((mid + half + kPi) / bin_width)) + 1;
      for (int b = lo; b <= hi; ++b) {
        bins_[((b % kBins) + kBins) % kBins].push_back(i);
      }
    }
  }

  template <typename Fn>
  void for_each_candidate(const Vec3& direction, Fn&& fn) const {
    for (std::size_t i : always_) fn(i);
    const double h = direction.head<2>().norm();
    if (h < 1e-9) {
      for (const auto& bin : bins_) {
        for (std::size_t i : bin) fn(i);
      }
      return;
    }
    const double az = std::atan2(direction.y(), direction.x());
    int b = static_cast<int>(std::floor((az + kPi) / (2.0 * kPi) * kBins));
    b = std::clamp(b, 0, kBins - 1);
    for (std::size_t i : bins_[b]) fn(i);
  }

 private:
  std::vector<std::size_t> always_;
  std::vector<std::vector<std::size_t>> bins_;
};

std::optional<double> intersect(const Primitive& p, const Vec3& o, const Vec3& d) {
  return std::visit([&](const auto& prim) { return intersect(prim, o, d); }, p);
}

}  // namespace

Box Box::from_min_max(const Vec3& lo, const Vec3& hi) {
  return {Pose::from_translation(0.5 * (lo + hi)), 0.5 * (hi - lo)};
}

void Scene::validate() const {
  for (std::size_t i = 0; i < primitives.size(); ++i) {
    const Primitive& p = primitives[i];
    if (const auto* r = std::get_if<Rectangle>(&p)) {
      if (!(r->u.cross(r->v).norm() > 0.0)) {
        throw ConfigError("primitive " + std::to_string(i) + " has zero area");
      }
    } else if (!(std::get<Box>(p).half_extents.minCoeff() > 0.0)) {
      throw ConfigError("primitive " + std::to_string(i) + " has zero volume");
    }
  }
}

Scene Scene::transformed(const Pose& t) const {
  Scene out;
  out.primitives.reserve(primitives.size());
  for (const Primitive& p : primitives) {
    if (const auto* r = std::get_if<Rectangle>(&p)) {
      out.primitives.push_back(Rectangle{t * r->origin, t.rotation() * r->u,
                                         t.rotation() * r->v});
    } else {
      const Box& b = std::get<Box>(p);
      out.primitives.push_back(Box{t * b.pose, b.half_extents});
    }
  }
  return out;
}

void LidarModel::validate() const {
  if (channels < 2) throw ConfigError("lidar needs at least 2 channels");
  if (horizontal_steps < 4) throw ConfigError("lidar needs at least 4 azimuth steps");
  if (!(max_range > 0.0)) throw ConfigError("lidar max_range must be > 0");
  if (!(elevation_max_deg > elevation_min_deg)) {
    throw ConfigError("lidar elevation band is empty");
  }
  if (range_noise < 0.0) throw ConfigError("lidar range noise must be >= 0");
}

Vec3 LidarModel::ray_direction(int channel, int step) const {
  const double band = elevation_max_deg - elevation_min_deg;
  const double elevation =
      deg2rad(elevation_max_deg - (channel + 0.5) * band / channels);
  const double azimuth = kPi - 2.0 * kPi * (step + 0.5) / horizontal_steps;
  return {std::cos(elevation) * std::cos(azimuth),
          std::cos(elevation) * std::sin(azimuth), std::sin(elevation)};
}

std::optional<RayHit> raycast(const Scene& scene, const Vec3& origin,
                              const Vec3& direction, double max_range) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const auto t = intersect(scene.primitives[i], origin, direction);
    if (t && *t <= max_range && (!best || *t < best->distance)) best = RayHit{*t, i};
  }
  return best;
}

PointCloud raycast_scan(const Scene& scene, const Pose& pose,
                        const LidarModel& model, std::mt19937* rng) {
  model.validate();
  std::mt19937 own_rng(model.noise_seed);
  std::mt19937& gen = rng ? *rng : own_rng;
  std::normal_distribution<double> noise(0.0, model.range_noise);

  const AzimuthIndex index(scene, pose.translation());
  const Vec3& origin = pose.translation();
  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(model.channels) * model.horizontal_steps);
  for (int ch = 0; ch < model.channels; ++ch) {
    for (int step = 0; step < model.horizontal_steps; ++step) {
      const Vec3 ds = model.ray_direction(ch, step);
      const Vec3 dw = pose.rotation() * ds;
      double best = std::numeric_limits<double>::infinity();
      index.for_each_candidate(dw, [&](std::size_t i) {
        const auto t = intersect(scene.primitives[i], origin, dw);
        if (t && *t < best) best = *t;
      });
      if (!(best <= model.max_range)) continue;
      double range = best;
      if (model.range_noise > 0.0) range = std::max(kMinHitDistance, range + noise(gen));
      cloud.points.push_back(range * ds);
    }
  }
  cloud.intensities.assign(cloud.points.size(), 0.0f);
  return cloud;
}

void generate_sequence(const Scene& scene, const Trajectory& traj,
                       const LidarModel& model, const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out / "velodyne", ec);
  if (ec) throw IoError("cannot create " + (out / "velodyne").string() + ": " + ec.message());
  std::mt19937 rng(model.noise_seed);
  char name[32];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PointCloud scan = raycast_scan(scene, traj.poses[i], model, &rng);
    std::snprintf(name, sizeof(name), "%06zu.bin", i);
    write_kitti_bin(scan, out / "velodyne" / name);
  }
  write_trajectory(reanchor(traj), out / "poses.txt");
}

Scene build_scene(const ConfigDocument& doc) {
  Scene scene;
  for (const ConfigTable& t : doc.all()) {
    if (t.name() == "rectangle") {
      Rectangle r{t.vec3("origin"), t.vec3("u"), t.vec3("v")};
      if (!(r.u.cross(r.v).norm() > 0.0)) {
        throw ParseError("rectangle has zero area", t.line());
      }
      scene.primitives.push_back(r);
    } else if (t.name() == "box") {
      const Vec3 lo = t.vec3("min"), hi = t.vec3("max");
      if (!((hi - lo).minCoeff() > 0.0)) {
        throw ParseError("box max must exceed min on every axis", t.line());
      }
      Box b = Box::from_min_max(lo, hi);
      const double yaw = t.number("yaw_deg", 0.0);
      if (yaw != 0.0) b.pose = Pose(rot_z(deg2rad(yaw)), b.pose.translation());
      scene.primitives.push_back(b);
    }
  }
  if (scene.primitives.empty()) throw ConfigError("scene has no primitives");
  return scene;
}

Scene build_scene(const fs::path& path) {
  return build_scene(ConfigDocument::parse_file(path));
}

LidarModel lidar_model_from(const ConfigDocument& doc) {
  LidarModel m;
  if (const ConfigTable* t = doc.table("lidar")) {
    m.channels = static_cast<int>(t->integer("channels", m.channels));
    m.horizontal_steps = static_cast<int>(t->integer("horizontal_steps", m.horizontal_steps));
    m.elevation_max_deg = t->number("elevation_max", m.elevation_max_deg);
    m.elevation_min_deg = t->number("elevation_min", m.elevation_min_deg);
    m.max_range = t->number("max_range", m.max_range);
    m.range_noise = t->number("range_noise", m.range_noise);
    m.noise_seed = static_cast<std::uint32_t>(t->integer("noise_seed", m.noise_seed));
  }
  m.validate();
  return m;
}

Trajectory circuit_trajectory(const CircuitSpec& spec) {
  if (spec.frames < 1) throw ConfigError("circuit needs at least one frame");
  if (!(spec.semi_major > 0.0) || !(spec.semi_minor > 0.0)) {
    throw ConfigError("circuit semi-axes must be > 0");
  }
  Trajectory traj;
  for (int i = 0; i < spec.frames; ++i) {
    const double theta = 2.0 * kPi * spec.laps * i / spec.frames;
    const Vec3 position(spec.center_x + spec.semi_major * std::cos(theta),
                        spec.center_y + spec.semi_minor * std::sin(theta),
                        spec.sensor_height);
    double heading = std::atan2(spec.semi_minor * std::cos(theta),
                                -spec.semi_major * std::sin(theta));
    const auto jumps = std::count_if(spec.yaw_jump_frames.begin(),
                                     spec.yaw_jump_frames.end(),
                                     [&](int f) { return f <= i; });
    heading += deg2rad(spec.yaw_jump_deg) * static_cast<double>(jumps);
    traj.push_back(Pose(rot_z(heading), position));
  }
  return traj;
}

CircuitSpec circuit_from(const ConfigDocument& doc) {
  CircuitSpec c;
  const ConfigTable* t = doc.table("trajectory");
  if (!t) return c;
  const std::vector<double> center = t->numbers("center", {c.center_x, c.center_y});
  if (center.size() != 2) throw ParseError("trajectory center needs 2 numbers", t->line());
  c.center_x = center[0];
  c.center_y = center[1];
  const std::vector<double> axes = t->numbers("semi_axes", {c.semi_major, c.semi_minor});
  if (axes.size() != 2) throw ParseError("trajectory semi_axes needs 2 numbers", t->line());
  c.semi_major = axes[0];
  c.semi_minor = axes[1];
  c.frames = static_cast<int>(t->integer("frames", c.frames));
  c.laps = t->number("laps", c.laps);
  c.sensor_height = t->number("sensor_height", c.sensor_height);
  for (double f : t->numbers("yaw_jump_frames", {})) c.yaw_jump_frames.push_back(static_cast<int>(f));
  c.yaw_jump_deg = t->number("yaw_jump_deg", c.yaw_jump_deg);
  return c;
}

}  // namespace lodom
