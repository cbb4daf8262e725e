#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "lodom/association.hpp"
#include "lodom/geom.hpp"

namespace lodom::test {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline Vec3 random_vec(std::mt19937_64& g, double scale) {
  return Vec3(uniform(g, -scale, scale), uniform(g, -scale, scale),
              uniform(g, -scale, scale));
}

inline Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v(n(g), n(g), n(g));
  return v.normalized();
}

// Rotation by exactly `angle` about a random axis, translation of norm
// exactly `dist` in a random direction.
inline Pose perturbation(std::mt19937_64& g, double dist, double angle) {
  return Pose(exp_rotation(random_unit(g) * angle), random_unit(g) * dist);
}

inline Pose random_pose(std::mt19937_64& g, double max_t = 10.0) {
  return Pose(exp_rotation(random_unit(g) * uniform(g, 0.0, kPi)),
              random_vec(g, max_t));
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline double translation_error(const Pose& a, const Pose& b) {
  return (a.translation() - b.translation()).norm();
}

inline double rotation_error(const Pose& a, const Pose& b) {
  return rotation_angle(a.rotation().transpose() * b.rotation());
}

// Points on the three faces x=0, y=0, z=0 of a corner, with the face
// normal of each point.
struct Corner {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
};

inline Corner random_corner(std::mt19937_64& g, int per_face, double extent) {
  Corner c;
  for (int axis = 0; axis < 3; ++axis) {
    for (int i = 0; i < per_face; ++i) {
      Vec3 p(uniform(g, 0.2, extent), uniform(g, 0.2, extent), uniform(g, 0.2, extent));
      p[axis] = 0.0;
      c.points.push_back(p);
      c.normals.push_back(Vec3::Unit(axis));
    }
  }
  // Random placement of the whole corner.
  const Pose place = random_pose(g, 3.0);
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    c.points[i] = place * c.points[i];
    c.normals[i] = place.rotation() * c.normals[i];
  }
  return c;
}

// Pairs point i with target i: the oracle association.
class ExactPairs : public CorrespondenceSource {
 public:
  ExactPairs(std::vector<Vec3> targets, std::vector<Vec3> normals)
      : targets_(std::move(targets)), normals_(std::move(normals)) {}
  std::vector<Correspondence> associate(std::span<const Vec3> points,
                                        const PairingParams& pairing) const override {
    std::vector<Correspondence> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
      Correspondence c{points[i], targets_[i], normals_[i], 1.0, i};
      if (pairing.weighting) {
        const double d2 = (c.p - c.q).squaredNorm();
        c.w = std::exp(-d2 / (pairing.sigma * pairing.sigma));
      }
      out.push_back(c);
    }
    return out;
  }

 private:
  std::vector<Vec3> targets_;
  std::vector<Vec3> normals_;
};

// Linear-scan nearest neighbor; smallest index wins ties.
inline std::pair<std::size_t, double> brute_nearest(const std::vector<Vec3>& pts,
                                                    const Vec3& q) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, std::sqrt(best_d2)};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("lodom_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lodom::test
