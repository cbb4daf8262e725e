#include "lodom/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lodom/errors.hpp"
#include "lodom/metrics.hpp"

namespace lodom {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_svg(const Trajectory& est, const Trajectory* gt, const fs::path& path) {
  constexpr double kSize = 800.0, kMargin = 20.0;
  double min_x = INFINITY, max_x = -INFINITY, min_y = INFINITY, max_y = -INFINITY;
  auto grow = [&](const Trajectory& t) {
    for (const Pose& p : t.poses) {
      min_x = std::min(min_x, p.translation().x());
      max_x = std::max(max_x, p.translation().x());
      min_y = std::min(min_y, p.translation().y());
      max_y = std::max(max_y, p.translation().y());
    }
  };
  grow(est);
  if (gt) grow(*gt);
  const double span = std::max({max_x - min_x, max_y - min_y, 1e-6});
  const double scale = (kSize - 2 * kMargin) / span;

  auto polyline = [&](const Trajectory& t, const char* color, const char* id) {
    std::string pts;
    char buf[64];
    for (const Pose& p : t.poses) {
      const double x = kMargin + (p.translation().x() - min_x) * scale;
      const double y = kSize - kMargin - (p.translation().y() - min_y) * scale;
      std::snprintf(buf, sizeof(buf), "%s%.3f,%.3f", pts.empty() ? "" : " ", x, y);
      pts += buf;
    }
    return std::string("  <polyline id=\"") + id + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  };

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" "
         "viewBox=\"0 0 800 800\">\n";
  out << "  <rect width=\"800\" height=\"800\" fill=\"white\"/>\n";
  if (gt) out << polyline(*gt, "red", "ground_truth");
  out << polyline(est, "blue", "estimate");
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<SpeedBin> speed_histogram(const Trajectory& t, const PlotOptions& opts) {
  if (!(opts.speed_bin_kmh > 0.0) || !(opts.frame_rate_hz > 0.0)) {
    throw ConfigError("speed histogram needs positive bin width and frame rate");
  }
  std::vector<SpeedBin> bins;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double kmh = relative_pose(t, i).translation().norm() * opts.frame_rate_hz * 3.6;
    const auto b = static_cast<std::size_t>(std::floor(kmh / opts.speed_bin_kmh));
    while (bins.size() <= b) {
      const double lo = static_cast<double>(bins.size()) * opts.speed_bin_kmh;
      bins.push_back({lo, lo + opts.speed_bin_kmh, 0});
    }
    ++bins[b].count;
  }
  return bins;
}

void emit_plots(const Trajectory& est, const Trajectory* gt, const fs::path& out,
                const PlotOptions& opts) {
  if (est.empty()) throw DataError("cannot plot an empty trajectory");
  if (gt && gt->size() != est.size()) {
    throw DataError("estimate and ground truth lengths differ");
  }
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) {
    throw IoError("cannot create output directory " + out.string());
  }
  write_svg(est, gt, out / "trajectory.svg");

  std::ofstream hist = open_out(out / "speed_histogram.csv");
  hist << "lower_kmh,upper_kmh,count\n";
  for (const SpeedBin& b : speed_histogram(est, opts)) {
    hist << b.lower_kmh << ',' << b.upper_kmh << ',' << b.count << '\n';
  }
  if (!hist) throw IoError("write failed: speed_histogram.csv");

  if (gt) {
    std::ofstream errs = open_out(out / "pose_errors.csv");
    errs << "frame,translation_error_m,rotation_error_deg\n";
    char buf[96];
    for (std::size_t i = 1; i < est.size(); ++i) {
      const RelativePoseError e = relative_pose_error(est, *gt, i);
      std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", i, e.translation, e.rotation_deg);
      errs << buf;
    }
    if (!errs) throw IoError("write failed: pose_errors.csv");
  }
}

}  // namespace lodom
