#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "lodom/geom.hpp"

namespace lodom {

// Points in the sensor frame, meters. `intensities` is either empty or the
// same length as `points`.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<float> intensities;
  // Records discarded while loading because of non-finite coordinates.
  std::size_t dropped = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Absolute poses; pose 0 is the identity and frame ids strictly increase.
struct Trajectory {
  std::vector<Pose> poses;
  std::vector<long> frame_ids;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
  void push_back(const Pose& p) {
    frame_ids.push_back(frame_ids.empty() ? 0 : frame_ids.back() + 1);
    poses.push_back(p);
  }
  static Trajectory from_poses(std::vector<Pose> poses);
};

// Relative pose between consecutive frames i-1 and i (i >= 1).
Pose relative_pose(const Trajectory& t, std::size_t i);

// Returns a copy whose first pose is the identity.
Trajectory reanchor(const Trajectory& t);

struct Calibration {
  // LiDAR frame to the frame the ground truth is expressed in.
  Pose sensor_to_reference;
};

enum class ScanFormat { kKittiBin, kPlyAscii };

ScanFormat parse_scan_format(const std::string& name);
std::string to_string(ScanFormat f);

PointCloud read_scan(const std::filesystem::path& path, ScanFormat format);
void write_kitti_bin(const PointCloud& cloud, const std::filesystem::path& path);
void write_ply(const std::vector<Vec3>& points, const std::filesystem::path& path);

// Parses KITTI pose lines (row-major 3x4), conjugates them into the sensor
// frame with C^-1 P C and re-anchors the result at frame 0.
Trajectory read_ground_truth(const std::filesystem::path& path,
                             const Calibration& calib);
Trajectory read_external_poses(const std::filesystem::path& path);
void write_trajectory(const Trajectory& t, const std::filesystem::path& path);

// Reads a KITTI calib.txt ("Tr: ..." line) or a file holding a single
// 12-number pose line.
Calibration read_calibration(const std::filesystem::path& path);

// Formats one pose as 12 numbers, 9 significant digits.
std::string format_pose_line(const Pose& p);

}  // namespace lodom
