#pragma once

#include <cstddef>
#include <string>

#include "lodom/cloud_io.hpp"
#include "lodom/features.hpp"
#include "lodom/geom.hpp"
#include "lodom/projection.hpp"

namespace lodom {

enum class Confidence { kTrusted, kFallback };

// Predicted motion of the new frame with respect to the previous one.
struct InitResult {
  Pose pose;
  Confidence confidence = Confidence::kFallback;
  std::size_t inlier_count = 0;  // elevation-image strategy only
  std::size_t match_count = 0;
  std::size_t feature_count = 0;  // min over the two images

  bool trusted() const { return confidence == Confidence::kTrusted; }
};

// No initialization.
InitResult predict_identity();

// Repeats the last relative motion of `traj`; identity while fewer than
// two poses exist.
InitResult predict_constant_velocity(const Trajectory& traj);

struct ElevationInitParams {
  ElevationImageParams image;
  OrbParams orb;
  double ratio = 0.8;
  RansacParams ransac;
  std::size_t min_inliers = 100;
  std::size_t min_features = 8;
};

// 2D motion from feature matching between the elevation images of two
// scans: homography consensus selects inliers, the rigid yaw/x/y motion is
// then fit to them. z, roll and pitch stay zero.
InitResult predict_elevation_image(const PointCloud& prev, const PointCloud& cur,
                                   const ElevationInitParams& params = {});

// Relative motion read from a precomputed trajectory. Throws ConfigError
// when frame_index or frame_index - 1 is not covered.
InitResult predict_external(const Trajectory& provider, std::size_t frame_index);

GrayImage to_gray_image(const ElevationImage& img);

}  // namespace lodom
