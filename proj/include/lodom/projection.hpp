#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "lodom/cloud_io.hpp"
#include "lodom/geom.hpp"

namespace lodom {

struct ProjectionSpec {
  int height = 64;
  int width = 720;
  double elevation_max_deg = 3.0;
  double elevation_min_deg = -25.0;

  // Throws ConfigError unless height >= 2, width >= 4 and the band is
  // non-empty.
  void validate() const;
};

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
};

// Pixel hit by the ray through p, or nullopt when p lies outside the
// elevation band (or at the origin).
std::optional<Pixel> project_pixel(const Vec3& p, const ProjectionSpec& spec);

// Row-major H x W grid of 3D points. Inactive cells hold zeros.
class VertexMap {
 public:
  VertexMap() = default;
  VertexMap(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }

  bool active(int row, int col) const { return mask_[index(row, col)] != 0; }
  const Vec3& point(int row, int col) const { return points_[index(row, col)]; }
  double range(int row, int col) const { return ranges_[index(row, col)]; }

  void set(int row, int col, const Vec3& p);
  void clear(int row, int col);

  std::size_t active_count() const;
  std::vector<Vec3> active_points() const;

  bool operator==(const VertexMap&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Vec3> points_;
  std::vector<double> ranges_;
  std::vector<std::uint8_t> mask_;
};

class NormalMap {
 public:
  NormalMap() = default;
  NormalMap(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width_ + col;
  }
  bool active(int row, int col) const { return mask_[index(row, col)] != 0; }
  const Vec3& normal(int row, int col) const { return normals_[index(row, col)]; }
  void set(int row, int col, const Vec3& n);

  std::size_t active_count() const;

  bool operator==(const NormalMap&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Vec3> normals_;
  std::vector<std::uint8_t> mask_;
};

// Keeps the smallest-range point per pixel; the earlier point wins exact
// ties.
VertexMap spherical_project(const std::vector<Vec3>& points,
                            const ProjectionSpec& spec);
inline VertexMap spherical_project(const PointCloud& pc,
                                   const ProjectionSpec& spec) {
  return spherical_project(pc.points, spec);
}

// Cross product of the right and down neighbor differences, oriented toward
// the sensor. Columns wrap around (the image covers a full turn).
NormalMap normal_map(const VertexMap& vm);

struct ElevationImageParams {
  double pixel_size = 0.30;
  int resolution = 800;
  // Height band mapped onto gray levels 0..255.
  double band_min = -2.0;
  double band_max = 6.0;
  // Points below this height are skipped. Off (all points) by default.
  std::optional<double> min_z;
};

// Top-down raster centered on the sensor. Cell (row, col) covers
// x in [(col - res/2) * s, (col - res/2 + 1) * s), same for y with rows.
class ElevationImage {
 public:
  ElevationImage() = default;
  explicit ElevationImage(const ElevationImageParams& params);

  const ElevationImageParams& params() const { return params_; }
  int resolution() const { return params_.resolution; }
  double pixel_size() const { return params_.pixel_size; }

  bool occupied(int row, int col) const { return mask_[index(row, col)] != 0; }
  double height(int row, int col) const { return heights_[index(row, col)]; }
  std::size_t occupied_count() const;

  std::optional<Pixel> world_to_pixel(double x, double y) const;
  // Center of the cell, meters.
  Eigen::Vector2d pixel_to_world(double row, double col) const;

  void add_point(const Vec3& p);

  // Gray image over [band_min, band_max]; unoccupied cells are 0.
  std::vector<std::uint8_t> quantized() const;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * params_.resolution + col;
  }

  ElevationImageParams params_;
  std::vector<double> heights_;
  std::vector<std::uint8_t> mask_;
};

ElevationImage elevation_image(const std::vector<Vec3>& points,
                               const ElevationImageParams& params = {});

// Debug dumps, binary PGM (P5). Range in centimeters, 16-bit big-endian.
void write_range_pgm(const VertexMap& vm, const std::filesystem::path& path);
void write_gray_pgm(const std::vector<std::uint8_t>& gray, int width, int height,
                    const std::filesystem::path& path);

}  // namespace lodom
