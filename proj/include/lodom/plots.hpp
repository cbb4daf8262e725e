#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "lodom/cloud_io.hpp"

namespace lodom {

struct PlotOptions {
  double frame_rate_hz = 10.0;
  double speed_bin_kmh = 1.0;
};

struct SpeedBin {
  double lower_kmh = 0.0;
  double upper_kmh = 0.0;
  std::size_t count = 0;
};

// Per-frame speed |t_rel| * rate converted to km/h, binned from 0.
std::vector<SpeedBin> speed_histogram(const Trajectory& t, const PlotOptions& opts);

// Writes trajectory.svg (top-down XY overlay), speed_histogram.csv and,
// with a ground truth, pose_errors.csv (one row per consecutive pair).
void emit_plots(const Trajectory& est, const Trajectory* gt,
                const std::filesystem::path& out, const PlotOptions& opts = {});

}  // namespace lodom
