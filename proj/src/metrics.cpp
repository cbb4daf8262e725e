#include "lodom/metrics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lodom/errors.hpp"

namespace lodom {

namespace {

constexpr std::array<double, 8> kLengths{100, 200, 300, 400, 500, 600, 700, 800};

void require_pair(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size()) {
    throw DataError("trajectory lengths differ: " + std::to_string(est.size()) +
                    " vs " + std::to_string(gt.size()));
  }
  if (est.size() < 2) throw DataError("need at least two poses to evaluate");
}

double wrap_degrees(double d) {
  d = std::fmod(d + 180.0, 360.0);
  if (d < 0.0) d += 360.0;
  return d - 180.0;
}

}  // namespace

AteResult kitti_ate(const Trajectory& est, const Trajectory& gt,
                    std::size_t stride) {
  require_pair(est, gt);
  if (stride == 0) throw ConfigError("ATE stride must be >= 1");
  std::vector<double> dist(gt.size(), 0.0);
  for (std::size_t i = 1; i < gt.size(); ++i) {
    dist[i] = dist[i - 1] +
              (gt.poses[i].translation() - gt.poses[i - 1].translation()).norm();
  }
  AteResult out;
  std::array<double, kLengths.size()> sums{};
  std::array<std::size_t, kLengths.size()> counts{};
  double total = 0.0;
  for (std::size_t first = 0; first < gt.size(); first += stride) {
    for (std::size_t li = 0; li < kLengths.size(); ++li) {
      const double target = dist[first] + kLengths[li];
      std::size_t last = first;
      while (last < gt.size() && dist[last] < target) ++last;
      if (last >= gt.size()) continue;
      const Pose d_gt = inverse(gt.poses[first]) * gt.poses[last];
      const Pose d_est = inverse(est.poses[first]) * est.poses[last];
      const double err = (inverse(d_gt) * d_est).translation().norm() / kLengths[li];
      sums[li] += err;
      ++counts[li];
      total += err;
      ++out.segments;
    }
  }
  if (out.segments == 0) return out;
  out.valid = true;
  out.ate_percent = 100.0 * total / static_cast<double>(out.segments);
  for (std::size_t li = 0; li < kLengths.size(); ++li) {
    if (counts[li] == 0) continue;
    out.per_length.push_back(
        {kLengths[li], 100.0 * sums[li] / static_cast<double>(counts[li]), counts[li]});
  }
  return out;
}

RelativePoseError relative_pose_error(const Trajectory& est, const Trajectory& gt,
                                      std::size_t i) {
  const Pose re = relative_pose(est, i);
  const Pose rg = relative_pose(gt, i);
  const EulerAngles ee = rotation_to_euler(re.rotation());
  const EulerAngles eg = rotation_to_euler(rg.rotation());
  const Vec3 de(wrap_degrees(ee.yaw - eg.yaw), wrap_degrees(ee.pitch - eg.pitch),
                wrap_degrees(ee.roll - eg.roll));
  return {(re.translation() - rg.translation()).norm(), de.norm()};
}

std::size_t count_failures(const Trajectory& est, const Trajectory& gt,
                           const FailureThresholds& thresholds) {
  require_pair(est, gt);
  std::size_t failures = 0;
  for (std::size_t i = 1; i < est.size(); ++i) {
    const RelativePoseError e = relative_pose_error(est, gt, i);
    if (e.translation > thresholds.translation ||
        e.rotation_deg > thresholds.rotation_deg) {
      ++failures;
    }
  }
  return failures;
}

EvalReport evaluate(const Trajectory& est, const Trajectory& gt) {
  EvalReport r;
  r.ate = kitti_ate(est, gt);
  r.failure_count = count_failures(est, gt);
  r.frame_count = est.size();
  return r;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream os;
  os.precision(6);
  os << "frames\t" << report.frame_count << '\n';
  os << "failures\t" << report.failure_count << '\n';
  if (report.ate.valid) {
    os << "ate_percent\t" << report.ate.ate_percent << '\n';
  } else {
    os << "ate_percent\tnan\n";
    os << "note\tno valid segments (path shorter than 100 m)\n";
  }
  os << "segments\t" << report.ate.segments << '\n';
  if (report.mean_runtime_s) {
    os << "mean_runtime_s\t" << *report.mean_runtime_s << '\n';
  }
  if (!report.ate.per_length.empty()) {
    os << "length_m\terror_percent\tsegments\n";
    for (const SegmentError& s : report.ate.per_length) {
      os << s.length << '\t' << s.mean_error_percent << '\t' << s.segments << '\n';
    }
  }
  return os.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_report(report);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace lodom
