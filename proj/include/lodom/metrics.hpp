#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "lodom/cloud_io.hpp"

namespace lodom {

struct SegmentError {
  double length = 0.0;          // m
  double mean_error_percent = 0.0;
  std::size_t segments = 0;
};

struct AteResult {
  bool valid = false;  // false: no segment of 100 m or more exists
  double ate_percent = 0.0;
  std::vector<SegmentError> per_length;  // lengths with at least one segment
  std::size_t segments = 0;
};

// Mean of |translation(dGT^-1 dEST)| / L over start frames every `stride`
// frames and L in {100, ..., 800} m, as a percentage.
AteResult kitti_ate(const Trajectory& est, const Trajectory& gt,
                    std::size_t stride = 10);

struct FailureThresholds {
  double translation = 1.0;  // m
  double rotation_deg = 3.0; // Euler-vector norm
};

struct RelativePoseError {
  double translation = 0.0;   // |t_est - t_gt|, m
  double rotation_deg = 0.0;  // |e_est - e_gt|, wrapped per component
};

// Error of the relative motion from frame i-1 to i (i >= 1).
RelativePoseError relative_pose_error(const Trajectory& est, const Trajectory& gt,
                                      std::size_t i);

std::size_t count_failures(const Trajectory& est, const Trajectory& gt,
                           const FailureThresholds& thresholds = {});

struct EvalReport {
  AteResult ate;
  std::size_t failure_count = 0;
  std::size_t frame_count = 0;
  std::optional<double> mean_runtime_s;
};

// Throws DataError unless both trajectories have the same length >= 2.
EvalReport evaluate(const Trajectory& est, const Trajectory& gt);

// key<TAB>value lines followed by a per-length table.
void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string format_report(const EvalReport& report);

}  // namespace lodom
