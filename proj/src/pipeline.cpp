#include "lodom/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "lodom/errors.hpp"

namespace lodom {

namespace fs = std::filesystem;

InitStrategy parse_strategy(const std::string& s) {
  if (s == "ni" || s == "NI" || s == "identity") return InitStrategy::kIdentity;
  if (s == "cv" || s == "CV") return InitStrategy::kConstantVelocity;
  if (s == "ei" || s == "EI") return InitStrategy::kElevationImage;
  if (s == "external") return InitStrategy::kExternal;
  throw ConfigError("unknown initialization strategy '" + s + "'");
}

Backend parse_backend(const std::string& s) {
  if (s == "kd-f2m") return Backend::kKdF2M;
  if (s == "p-f2m") return Backend::kProjectiveF2M;
  if (s == "kd-f2f") return Backend::kKdF2F;
  if (s == "p-f2f") return Backend::kProjectiveF2F;
  throw ConfigError("unknown backend '" + s + "'");
}

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::kIdentity: return "ni";
    case InitStrategy::kConstantVelocity: return "cv";
    case InitStrategy::kElevationImage: return "ei";
    case InitStrategy::kExternal: return "external";
  }
  return "?";
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::kKdF2M: return "kd-f2m";
    case Backend::kProjectiveF2M: return "p-f2m";
    case Backend::kKdF2F: return "kd-f2f";
    case Backend::kProjectiveF2F: return "p-f2f";
  }
  return "?";
}

namespace {

bool is_kd(Backend b) { return b == Backend::kKdF2M || b == Backend::kKdF2F; }
bool is_f2f(Backend b) { return b == Backend::kKdF2F || b == Backend::kProjectiveF2F; }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void PipelineConfig::validate() const {
  if (window < 1) throw ConfigError("map window k must be >= 1");
  if (!(scan_voxel_size > 0.0) || !(kd.voxel_size > 0.0)) {
    throw ConfigError("voxel sizes must be > 0");
  }
  if (kd.normal_neighbors < 3) throw ConfigError("normal_neighbors must be >= 3");
  if (!(kd.max_distance > 0.0)) throw ConfigError("max_distance must be > 0");
  if (candidate_depth < 1) throw ConfigError("candidate_depth must be >= 1");
  if (!(frame_rate_hz > 0.0)) throw ConfigError("frame_rate must be > 0");
  projection.validate();
  icp.validate();
  if (strategy == InitStrategy::kExternal && !external_poses) {
    throw ConfigError("strategy 'external' requires an external pose file");
  }
}

PipelineConfig pipeline_config_from(const ConfigDocument& doc, const fs::path& base) {
  PipelineConfig c;
  if (const ConfigTable* t = doc.table("dataset")) {
    c.dataset = resolve(base, t->string("path"));
    c.format = parse_scan_format(t->string("format", "kitti-bin"));
    if (auto p = t->optional_string("ground_truth")) c.ground_truth = resolve(base, *p);
    if (auto p = t->optional_string("calibration")) c.calibration = resolve(base, *p);
    if (t->has("max_frames")) c.max_frames = static_cast<std::size_t>(t->integer("max_frames"));
  } else {
    throw ParseError("missing [dataset] section", doc.line_count());
  }
  if (const ConfigTable* t = doc.table("pipeline")) {
    c.strategy = parse_strategy(t->string("strategy", to_string(c.strategy)));
    c.backend = parse_backend(t->string("backend", to_string(c.backend)));
    c.output_dir = resolve(base, t->string("output", c.output_dir.string()));
    if (auto p = t->optional_string("external_poses")) c.external_poses = resolve(base, *p);
    c.frame_rate_hz = t->number("frame_rate", c.frame_rate_hz);
  }
  if (const ConfigTable* t = doc.table("mapping")) {
    const long k = t->integer("window", static_cast<long>(c.window));
    if (k < 1) throw ParseError("window must be >= 1", t->line());
    c.window = static_cast<std::size_t>(k);
    c.kd.voxel_size = t->number("voxel_size", c.kd.voxel_size);
    c.scan_voxel_size = t->number("scan_voxel_size", c.kd.voxel_size);
    c.candidate_depth = static_cast<int>(t->integer("candidate_depth", c.candidate_depth));
  }
  if (const ConfigTable* t = doc.table("projection")) {
    c.projection.height = static_cast<int>(t->integer("height", c.projection.height));
    c.projection.width = static_cast<int>(t->integer("width", c.projection.width));
    c.projection.elevation_max_deg = t->number("elevation_max", c.projection.elevation_max_deg);
    c.projection.elevation_min_deg = t->number("elevation_min", c.projection.elevation_min_deg);
  }
  if (const ConfigTable* t = doc.table("association")) {
    const long k = t->integer("normal_neighbors", static_cast<long>(c.kd.normal_neighbors));
    if (k < 3) throw ParseError("normal_neighbors must be >= 3", t->line());
    c.kd.normal_neighbors = static_cast<std::size_t>(k);
    c.kd.max_distance = t->number("max_distance", c.kd.max_distance);
  }
  if (const ConfigTable* t = doc.table("registration")) {
    c.icp.max_iterations = static_cast<int>(t->integer("max_iterations", c.icp.max_iterations));
    c.icp.translation_tolerance = t->number("translation_tolerance", c.icp.translation_tolerance);
    c.icp.rotation_tolerance = t->number("rotation_tolerance", c.icp.rotation_tolerance);
    c.icp.sigma = t->number("sigma", c.icp.sigma);
    c.icp.min_correspondences = static_cast<std::size_t>(
        t->integer("min_correspondences", static_cast<long>(c.icp.min_correspondences)));
    c.icp.hard_residual_cutoff = t->optional_number("hard_residual_cutoff");
    c.icp.weighting = t->boolean("weighting", c.icp.weighting);
  }
  if (const ConfigTable* t = doc.table("initialization")) {
    ElevationInitParams& e = c.elevation;
    e.image.pixel_size = t->number("pixel_size", e.image.pixel_size);
    e.image.resolution = static_cast<int>(t->integer("resolution", e.image.resolution));
    e.image.band_min = t->number("band_min", e.image.band_min);
    e.image.band_max = t->number("band_max", e.image.band_max);
    e.image.min_z = t->optional_number("min_z");
    e.orb.max_features = static_cast<int>(t->integer("max_features", e.orb.max_features));
    e.orb.fast_threshold = static_cast<int>(t->integer("fast_threshold", e.orb.fast_threshold));
    e.ratio = t->number("ratio", e.ratio);
    e.ransac.iterations = static_cast<int>(t->integer("ransac_iterations", e.ransac.iterations));
    e.ransac.inlier_threshold = t->number("ransac_threshold", e.ransac.inlier_threshold);
    e.ransac.seed = static_cast<std::uint32_t>(t->integer("seed", e.ransac.seed));
    e.min_inliers = static_cast<std::size_t>(
        t->integer("min_inliers", static_cast<long>(e.min_inliers)));
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  return pipeline_config_from(ConfigDocument::parse_file(path), path.parent_path());
}

DirectorySource::DirectorySource(const fs::path& dir, ScanFormat format)
    : format_(format) {
  fs::path root = dir;
  if (fs::is_directory(dir / "velodyne")) root = dir / "velodyne";
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + dir.string());
  const std::string ext = format == ScanFormat::kKittiBin ? ".bin" : ".ply";
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());
  if (files_.empty()) throw IoError("no " + ext + " scans in " + root.string());
}

PointCloud DirectorySource::load(std::size_t index) const {
  return read_scan(files_.at(index), format_);
}

double OdometryResult::mean_runtime_s() const {
  if (diagnostics.empty()) return 0.0;
  double s = 0.0;
  for (const FrameDiagnostics& d : diagnostics) s += d.runtime_s;
  return s / static_cast<double>(diagnostics.size());
}

OdometryResult run_odometry(const PipelineConfig& config, const FrameSource& frames,
                            const Trajectory* external, const DiagnosticsSink& sink) {
  config.validate();
  std::size_t n = frames.size();
  if (config.max_frames) n = std::min(n, *config.max_frames);
  if (n == 0) throw DataError("dataset has no frames");
  if (config.strategy == InitStrategy::kExternal) {
    if (!external) throw ConfigError("strategy 'external' requires external poses");
    if (external->size() < n) {
      throw ConfigError("external poses do not cover frame " +
                        std::to_string(external->size()) + " of " + std::to_string(n));
    }
  }

  using Clock = std::chrono::steady_clock;
  OdometryResult result;
  LocalMap map(is_f2f(config.backend) ? 1 : config.window);

  auto emit = [&](FrameDiagnostics d) {
    if (sink) sink(d);
    result.diagnostics.push_back(std::move(d));
  };

  auto load = [&](std::size_t i) {
    try {
      return frames.load(i);
    } catch (const Error& e) {
      throw DataError("frame " + std::to_string(i) + ": " + e.what());
    }
  };

  {
    const auto t0 = Clock::now();
    PointCloud first = load(0);
    result.trajectory.push_back(Pose::identity());
    map.insert_frame(first, Pose::identity());
    FrameDiagnostics d;
    d.frame = 0;
    d.icp.converged = true;
    d.note = "seed";
    d.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    emit(std::move(d));
  }

  for (std::size_t i = 1; i < n; ++i) {
    const auto t0 = Clock::now();
    PointCloud scan = load(i);
    FrameDiagnostics d;
    d.frame = i;

    InitResult init;
    switch (config.strategy) {
      case InitStrategy::kIdentity:
        init = predict_identity();
        break;
      case InitStrategy::kConstantVelocity:
        init = predict_constant_velocity(result.trajectory);
        break;
      case InitStrategy::kElevationImage:
        init = predict_elevation_image(map.frames().back().cloud, scan, config.elevation);
        // An untrusted elevation match is not used.
        if (!init.trusted()) init.pose = Pose::identity();
        break;
      case InitStrategy::kExternal:
        init = predict_external(*external, i);
        break;
    }
    d.init_confidence = init.confidence;
    d.init_inliers = init.inlier_count;

    const Pose& prev = result.trajectory.poses.back();
    const Pose predicted = prev * init.pose;
    Pose estimate = predicted;
    try {
      if (is_kd(config.backend)) {
        const KdMapView view = kd_view(map, config.kd);
        const std::vector<Vec3> pts = voxel_sample(scan.points, config.scan_voxel_size);
        const IcpResult r = icp(pts, view, predicted, config.icp);
        d.icp = r.diagnostics;
        estimate = r.pose;
      } else {
        const ProjMapView view = projective_view(map, config.projection, config.candidate_depth);
        const std::vector<Vec3> pts =
            spherical_project(scan.points, config.projection).active_points();
        if (pts.empty()) throw DegenerateGeometryError("scan projects to no pixels");
        const Pose init_rel = inverse(view.reference) * predicted;
        const IcpResult r = icp(pts, view, init_rel, config.icp);
        d.icp = r.diagnostics;
        estimate = view.reference * r.pose;
      }
      if (d.icp.starved) {
        d.flagged = true;
        d.note = "too few correspondences";
        estimate = predicted;
      }
    } catch (const DegenerateGeometryError& e) {
      d.flagged = true;
      d.note = e.what();
      estimate = predicted;
    }

    result.trajectory.push_back(estimate);
    map.insert_frame(scan, estimate);
    d.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    emit(std::move(d));
  }
  return result;
}

OdometryResult run_odometry(const PipelineConfig& config, const DiagnosticsSink& sink) {
  config.validate();
  const DirectorySource source(config.dataset, config.format);
  std::optional<Trajectory> external;
  if (config.strategy == InitStrategy::kExternal) {
    external = read_external_poses(*config.external_poses);
  }
  return run_odometry(config, source, external ? &*external : nullptr, sink);
}

std::string diagnostics_csv_header() {
  return "frame,init_confidence,init_inliers,icp_iterations,icp_final_energy,"
         "icp_correspondences,icp_converged,flagged,runtime_s,note";
}

std::string diagnostics_csv_row(const FrameDiagnostics& d) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%s,%zu,%d,%.9g,%zu,%d,%d,%.6f,", d.frame,
                d.init_confidence == Confidence::kTrusted ? "trusted" : "fallback",
                d.init_inliers, d.icp.iterations_run, d.icp.final_energy,
                d.icp.correspondence_count, d.icp.converged ? 1 : 0, d.flagged ? 1 : 0,
                d.runtime_s);
  std::string note = d.note;
  std::replace(note.begin(), note.end(), ',', ';');
  return buf + note;
}

}  // namespace lodom
