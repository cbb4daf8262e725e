#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lodom/cloud_io.hpp"
#include "lodom/config.hpp"
#include "lodom/initialization.hpp"
#include "lodom/mapping.hpp"
#include "lodom/metrics.hpp"
#include "lodom/projection.hpp"
#include "lodom/registration.hpp"

namespace lodom {

enum class InitStrategy { kIdentity, kConstantVelocity, kElevationImage, kExternal };
enum class Backend { kKdF2M, kProjectiveF2M, kKdF2F, kProjectiveF2F };

InitStrategy parse_strategy(const std::string& s);
Backend parse_backend(const std::string& s);
std::string to_string(InitStrategy s);
std::string to_string(Backend b);

struct PipelineConfig {
  std::filesystem::path dataset;
  ScanFormat format = ScanFormat::kKittiBin;
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> calibration;
  std::optional<std::filesystem::path> external_poses;
  std::filesystem::path output_dir = "lodom_out";
  std::optional<std::size_t> max_frames;

  InitStrategy strategy = InitStrategy::kConstantVelocity;
  Backend backend = Backend::kKdF2M;
  std::size_t window = 30;
  double scan_voxel_size = 0.4;  // kd backends only
  KdViewParams kd;
  ProjectionSpec projection;
  int candidate_depth = 4;
  IcpParams icp;
  ElevationInitParams elevation;
  double frame_rate_hz = 10.0;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

// Sections: [dataset] [pipeline] [mapping] [projection] [association]
// [registration] [initialization]. Relative paths resolve against the
// config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from(const ConfigDocument& doc,
                                    const std::filesystem::path& base_dir = {});

class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::size_t size() const = 0;
  virtual PointCloud load(std::size_t index) const = 0;
};

// Scan files in a directory (or its velodyne/ subdirectory) in name order.
class DirectorySource : public FrameSource {
 public:
  DirectorySource(const std::filesystem::path& dir, ScanFormat format);
  std::size_t size() const override { return files_.size(); }
  PointCloud load(std::size_t index) const override;
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
  ScanFormat format_;
};

class MemorySource : public FrameSource {
 public:
  explicit MemorySource(std::vector<PointCloud> scans) : scans_(std::move(scans)) {}
  std::size_t size() const override { return scans_.size(); }
  PointCloud load(std::size_t index) const override { return scans_.at(index); }

 private:
  std::vector<PointCloud> scans_;
};

struct FrameDiagnostics {
  std::size_t frame = 0;
  Confidence init_confidence = Confidence::kFallback;
  std::size_t init_inliers = 0;
  IcpDiagnostics icp;
  // Registration failed (degenerate geometry or too few pairs); the pose
  // is the initialization.
  bool flagged = false;
  std::string note;
  double runtime_s = 0.0;
};

struct OdometryResult {
  Trajectory trajectory;
  std::vector<FrameDiagnostics> diagnostics;
  double mean_runtime_s() const;
};

using DiagnosticsSink = std::function<void(const FrameDiagnostics&)>;

// External poses, when the strategy needs them, come from `external`.
OdometryResult run_odometry(const PipelineConfig& config, const FrameSource& frames,
                            const Trajectory* external = nullptr,
                            const DiagnosticsSink& sink = {});

// Reads the dataset and external poses named in the config.
OdometryResult run_odometry(const PipelineConfig& config,
                            const DiagnosticsSink& sink = {});

std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const FrameDiagnostics& d);

}  // namespace lodom
