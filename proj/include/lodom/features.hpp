#pragma once

#include <bitset>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace lodom {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major

  std::uint8_t at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + col];
  }
};

using Descriptor = std::bitset<256>;

struct Feature2D {
  Eigen::Vector2d position;  // (col, row), pixels
  double orientation = 0.0;  // radians, image axes
  Descriptor descriptor;
  double response = 0.0;     // Harris corner measure
};

struct OrbParams {
  int max_features = 500;
  int fast_threshold = 20;
  int harris_block = 7;
  double harris_k = 0.04;
  std::uint32_t pattern_seed = 0x0b5e55ed;
};

// FAST-9 corners ranked by Harris response, intensity-centroid orientation
// and rotation-steered 256-bit binary tests on a smoothed image. Single
// scale: elevation images have a fixed metric resolution.
std::vector<Feature2D> detect_features(const GrayImage& image,
                                       const OrbParams& params = {});

struct FeatureMatch {
  std::size_t query = 0;
  std::size_t train = 0;
  int distance = 0;
};

inline int hamming(const Descriptor& a, const Descriptor& b) {
  return static_cast<int>((a ^ b).count());
}

// Nearest train descriptor per query, kept when it beats the second
// nearest by the ratio.
std::vector<FeatureMatch> match_features(std::span<const Feature2D> query,
                                         std::span<const Feature2D> train,
                                         double ratio = 0.8);

using Homography = Eigen::Matrix3d;

// Normalized DLT through >= 4 correspondences src -> dst.
std::optional<Homography> fit_homography(std::span<const Eigen::Vector2d> src,
                                         std::span<const Eigen::Vector2d> dst);

struct RansacParams {
  int iterations = 1000;
  double inlier_threshold = 2.0;  // pixels, forward transfer error
  std::uint32_t seed = 42;
};

struct HomographyFit {
  Homography model = Homography::Identity();
  std::vector<std::size_t> inliers;
};

// Random-sample consensus over 4-point homographies; the largest inlier set
// wins, earliest sample on ties.
std::optional<HomographyFit> ransac_homography(
    std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst,
    const RansacParams& params = {});

struct Rigid2D {
  double yaw = 0.0;  // radians
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
};

// Least-squares rotation + translation taking src onto dst.
Rigid2D fit_rigid_2d(std::span<const Eigen::Vector2d> src,
                     std::span<const Eigen::Vector2d> dst);

}  // namespace lodom
