#include "lodom/initialization.hpp"

#include "lodom/errors.hpp"

namespace lodom {

InitResult predict_identity() { return {}; }

InitResult predict_constant_velocity(const Trajectory& traj) {
  if (traj.size() < 2) return {};
  InitResult r;
  r.pose = relative_pose(traj, traj.size() - 1);
  r.confidence = Confidence::kTrusted;
  return r;
}

GrayImage to_gray_image(const ElevationImage& img) {
  return {img.resolution(), img.resolution(), img.quantized()};
}

InitResult predict_elevation_image(const PointCloud& prev, const PointCloud& cur,
                                   const ElevationInitParams& params) {
  if (prev.empty() || cur.empty()) {
    throw DataError("elevation-image initialization needs two non-empty scans");
  }
  const ElevationImage prev_img = elevation_image(prev.points, params.image);
  const ElevationImage cur_img = elevation_image(cur.points, params.image);
  const std::vector<Feature2D> prev_f =
      detect_features(to_gray_image(prev_img), params.orb);
  const std::vector<Feature2D> cur_f =
      detect_features(to_gray_image(cur_img), params.orb);

  InitResult result;
  result.feature_count = std::min(prev_f.size(), cur_f.size());
  if (prev_f.size() < params.min_features || cur_f.size() < params.min_features) {
    return result;
  }
  const std::vector<FeatureMatch> matches =
      match_features(cur_f, prev_f, params.ratio);
  result.match_count = matches.size();

  // Pixel coordinates for the consensus step, metric ones for the rigid fit.
  std::vector<Eigen::Vector2d> src_px, dst_px;
  src_px.reserve(matches.size());
  dst_px.reserve(matches.size());
  for (const FeatureMatch& m : matches) {
    src_px.push_back(cur_f[m.query].position);
    dst_px.push_back(prev_f[m.train].position);
  }
  const auto fit = ransac_homography(src_px, dst_px, params.ransac);
  if (!fit || fit->inliers.size() < 2) return result;

  std::vector<Eigen::Vector2d> src_m, dst_m;
  for (std::size_t i : fit->inliers) {
    src_m.push_back(cur_img.pixel_to_world(src_px[i].y(), src_px[i].x()));
    dst_m.push_back(prev_img.pixel_to_world(dst_px[i].y(), dst_px[i].x()));
  }
  const Rigid2D motion = fit_rigid_2d(src_m, dst_m);
  result.pose = Pose(rot_z(motion.yaw),
                     Vec3(motion.translation.x(), motion.translation.y(), 0.0));
  result.inlier_count = fit->inliers.size();
  result.confidence = result.inlier_count >= params.min_inliers
                          ? Confidence::kTrusted
                          : Confidence::kFallback;
  return result;
}

InitResult predict_external(const Trajectory& provider, std::size_t frame_index) {
  if (frame_index == 0 || frame_index >= provider.size()) {
    throw ConfigError("external poses do not cover frame " +
                      std::to_string(frame_index) + " (have " +
                      std::to_string(provider.size()) + ")");
  }
  InitResult r;
  r.pose = relative_pose(provider, frame_index);
  r.confidence = Confidence::kTrusted;
  return r;
}

}  // namespace lodom
