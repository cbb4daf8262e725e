#include "lodom/projection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lodom/errors.hpp"

namespace lodom {

void ProjectionSpec::validate() const {
  if (height < 2) throw ConfigError("projection height must be >= 2");
  if (width < 4) throw ConfigError("projection width must be >= 4");
  if (!(elevation_max_deg > elevation_min_deg)) {
    throw ConfigError("projection elevation_max must exceed elevation_min");
  }
}

std::optional<Pixel> project_pixel(const Vec3& p, const ProjectionSpec& spec) {
  const double r = p.norm();
  if (!(r > 0.0) || !std::isfinite(r)) return std::nullopt;
  const double elevation = rad2deg(std::asin(std::clamp(p.z() / r, -1.0, 1.0)));
  if (elevation > spec.elevation_max_deg || elevation < spec.elevation_min_deg) {
    return std::nullopt;
  }
  const double band = spec.elevation_max_deg - spec.elevation_min_deg;
  int row = static_cast<int>(
      std::floor((spec.elevation_max_deg - elevation) / band * spec.height));
  row = std::clamp(row, 0, spec.height - 1);
  const double azimuth = std::atan2(p.y(), p.x());
  int col = static_cast<int>(
      std::floor(spec.width * (1.0 - (azimuth + kPi) / (2.0 * kPi))));
  col = std::clamp(col, 0, spec.width - 1);
  return Pixel{row, col};
}

VertexMap::VertexMap(int height, int width)
    : height_(height),
      width_(width),
      points_(static_cast<std::size_t>(height) * width, Vec3::Zero()),
      ranges_(static_cast<std::size_t>(height) * width, 0.0),
      mask_(static_cast<std::size_t>(height) * width, 0) {}

void VertexMap::set(int row, int col, const Vec3& p) {
  const std::size_t i = index(row, col);
  points_[i] = p;
  ranges_[i] = p.norm();
  mask_[i] = 1;
}

void VertexMap::clear(int row, int col) {
  const std::size_t i = index(row, col);
  points_[i] = Vec3::Zero();
  ranges_[i] = 0.0;
  mask_[i] = 0;
}

std::size_t VertexMap::active_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::vector<Vec3> VertexMap::active_points() const {
  std::vector<Vec3> out;
  out.reserve(active_count());
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i]) out.push_back(points_[i]);
  }
  return out;
}

NormalMap::NormalMap(int height, int width)
    : height_(height),
      width_(width),
      normals_(static_cast<std::size_t>(height) * width, Vec3::Zero()),
      mask_(static_cast<std::size_t>(height) * width, 0) {}

void NormalMap::set(int row, int col, const Vec3& n) {
  const std::size_t i = index(row, col);
  normals_[i] = n;
  mask_[i] = 1;
}

std::size_t NormalMap::active_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

VertexMap spherical_project(const std::vector<Vec3>& points,
                            const ProjectionSpec& spec) {
  spec.validate();
  VertexMap vm(spec.height, spec.width);
  for (const Vec3& p : points) {
    const auto px = project_pixel(p, spec);
    if (!px) continue;
    if (!vm.active(px->row, px->col) || p.norm() < vm.range(px->row, px->col)) {
      vm.set(px->row, px->col, p);
    }
  }
  return vm;
}

NormalMap normal_map(const VertexMap& vm) {
  NormalMap nm(vm.height(), vm.width());
  for (int row = 0; row + 1 < vm.height(); ++row) {
    for (int col = 0; col < vm.width(); ++col) {
      const int right = (col + 1) % vm.width();
      if (!vm.active(row, col) || !vm.active(row, right) ||
          !vm.active(row + 1, col)) {
        continue;
      }
      const Vec3& v = vm.point(row, col);
      const Vec3 n = (vm.point(row, right) - v).cross(vm.point(row + 1, col) - v);
      const double len = n.norm();
      if (len < 1e-9) continue;
      Vec3 unit = n / len;
      if (unit.dot(v) > 0.0) unit = -unit;
      nm.set(row, col, unit);
    }
  }
  return nm;
}

ElevationImage::ElevationImage(const ElevationImageParams& params)
    : params_(params),
      heights_(static_cast<std::size_t>(params.resolution) * params.resolution,
               0.0),
      mask_(static_cast<std::size_t>(params.resolution) * params.resolution, 0) {
  if (params.resolution < 2 || !(params.pixel_size > 0.0)) {
    throw ConfigError("elevation image needs resolution >= 2 and pixel_size > 0");
  }
  if (!(params.band_max > params.band_min)) {
    throw ConfigError("elevation band_max must exceed band_min");
  }
}

std::size_t ElevationImage::occupied_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::optional<Pixel> ElevationImage::world_to_pixel(double x, double y) const {
  const int half = params_.resolution / 2;
  const double fc = std::floor(x / params_.pixel_size) + half;
  const double fr = std::floor(y / params_.pixel_size) + half;
  if (!(fc >= 0.0 && fc < params_.resolution && fr >= 0.0 &&
        fr < params_.resolution)) {
    return std::nullopt;
  }
  return Pixel{static_cast<int>(fr), static_cast<int>(fc)};
}

Eigen::Vector2d ElevationImage::pixel_to_world(double row, double col) const {
  const int half = params_.resolution / 2;
  return {(col - half + 0.5) * params_.pixel_size,
          (row - half + 0.5) * params_.pixel_size};
}

void ElevationImage::add_point(const Vec3& p) {
  if (!p.allFinite()) return;
  if (params_.min_z && p.z() < *params_.min_z) return;
  const auto px = world_to_pixel(p.x(), p.y());
  if (!px) return;
  const std::size_t i = index(px->row, px->col);
  if (!mask_[i] || p.z() > heights_[i]) {
    heights_[i] = p.z();
    mask_[i] = 1;
  }
}

std::vector<std::uint8_t> ElevationImage::quantized() const {
  std::vector<std::uint8_t> gray(heights_.size(), 0);
  const double span = params_.band_max - params_.band_min;
  for (std::size_t i = 0; i < heights_.size(); ++i) {
    if (!mask_[i]) continue;
    const double level = std::round((heights_[i] - params_.band_min) / span * 255.0);
    gray[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
  }
  return gray;
}

ElevationImage elevation_image(const std::vector<Vec3>& points,
                               const ElevationImageParams& params) {
  ElevationImage img(params);
  for (const Vec3& p : points) img.add_point(p);
  return img;
}

void write_range_pgm(const VertexMap& vm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << vm.width() << ' ' << vm.height() << "\n65535\n";
  for (int row = 0; row < vm.height(); ++row) {
    for (int col = 0; col < vm.width(); ++col) {
      const double cm = vm.active(row, col) ? vm.range(row, col) * 100.0 : 0.0;
      const auto v = static_cast<unsigned>(std::clamp(std::round(cm), 0.0, 65535.0));
      out.put(static_cast<char>(v >> 8));
      out.put(static_cast<char>(v & 0xff));
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_gray_pgm(const std::vector<std::uint8_t>& gray, int width, int height,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lodom
