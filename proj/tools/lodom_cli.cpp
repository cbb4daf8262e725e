#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lodom/cloud_io.hpp"
#include "lodom/errors.hpp"
#include "lodom/metrics.hpp"
#include "lodom/pipeline.hpp"
#include "lodom/plots.hpp"
#include "lodom/simulation.hpp"

namespace fs = std::filesystem;
using namespace lodom;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

Trajectory load_gt(const fs::path& gt, const std::optional<fs::path>& calib) {
  Calibration c;
  if (calib) c = read_calibration(*calib);
  return read_ground_truth(gt, c);
}

int cmd_run(const fs::path& config_path, bool quiet) {
  const PipelineConfig config = load_pipeline_config(config_path);
  ensure_dir(config.output_dir);
  std::ofstream log(config.output_dir / "diagnostics.csv");
  if (!log) throw IoError("cannot write " + (config.output_dir / "diagnostics.csv").string());
  log << diagnostics_csv_header() << '\n';
  const OdometryResult result = run_odometry(config, [&](const FrameDiagnostics& d) {
    log << diagnostics_csv_row(d) << '\n';
    if (d.flagged && !quiet) {
      std::cerr << "frame " << d.frame << " flagged: " << d.note << '\n';
    }
  });
  write_trajectory(result.trajectory, config.output_dir / "trajectory.txt");
  if (config.ground_truth) {
    const Trajectory gt = load_gt(*config.ground_truth, config.calibration);
    if (gt.size() < result.trajectory.size()) {
      throw DataError("ground truth has fewer poses than the run");
    }
    Trajectory gt_cut;
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) gt_cut.push_back(gt.poses[i]);
    EvalReport report = evaluate(result.trajectory, gt_cut);
    report.mean_runtime_s = result.mean_runtime_s();
    write_report(report, config.output_dir / "report.txt");
    std::cout << format_report(report);
  } else {
    std::printf("frames\t%zu\nmean_runtime_s\t%.6f\n", result.trajectory.size(),
                result.mean_runtime_s());
  }
  return 0;
}

int cmd_eval(const fs::path& est_path, const fs::path& gt_path,
             const std::optional<fs::path>& calib) {
  const Trajectory est = read_external_poses(est_path);
  const Trajectory gt = load_gt(gt_path, calib);
  if (est.size() != gt.size()) {
    throw DataError("estimate has " + std::to_string(est.size()) + " poses, ground truth " +
                    std::to_string(gt.size()));
  }
  std::cout << format_report(evaluate(est, gt));
  return 0;
}

int cmd_plot(const fs::path& est_path, const std::optional<fs::path>& gt_path,
             const std::optional<fs::path>& calib, const fs::path& out, double rate) {
  const Trajectory est = read_external_poses(est_path);
  std::optional<Trajectory> gt;
  if (gt_path) gt = load_gt(*gt_path, calib);
  ensure_dir(out);
  PlotOptions opts;
  opts.frame_rate_hz = rate;
  emit_plots(est, gt ? &*gt : nullptr, out, opts);
  return 0;
}

int cmd_simulate(const fs::path& scene_path, const fs::path& out) {
  const ConfigDocument doc = ConfigDocument::parse_file(scene_path);
  const Scene scene = build_scene(doc);
  const LidarModel model = lidar_model_from(doc);
  const Trajectory traj = circuit_trajectory(circuit_from(doc));
  generate_sequence(scene, traj, model, out);
  std::printf("wrote %zu scans to %s\n", traj.size(), out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR odometry toolkit"};
  app.require_subcommand(1);

  std::string run_config;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run odometry from a pipeline config");
  run->add_option("config", run_config, "Pipeline config file")->required();
  run->add_flag("-q,--quiet", quiet, "Do not report flagged frames");

  std::string est, gt, calib, out;
  auto* eval = app.add_subcommand("eval", "Evaluate an estimate against ground truth");
  eval->add_option("--est", est, "Estimated poses")->required();
  eval->add_option("--gt", gt, "Ground-truth poses")->required();
  eval->add_option("--calib", calib, "Calibration file (Tr line)");

  double rate = 10.0;
  auto* plot = app.add_subcommand("plot", "Write trajectory and speed plots");
  plot->add_option("--est", est, "Estimated poses")->required();
  plot->add_option("--gt", gt, "Ground-truth poses");
  plot->add_option("--calib", calib, "Calibration file (Tr line)");
  plot->add_option("--out", out, "Output directory")->required();
  plot->add_option("--frame-rate", rate, "Scan rate in Hz")->check(CLI::PositiveNumber);

  std::string scene;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("scene", scene, "Scene config file")->required();
  sim->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  auto opt = [](const std::string& s) {
    return s.empty() ? std::nullopt : std::optional<fs::path>(s);
  };
  try {
    if (*run) return cmd_run(run_config, quiet);
    if (*eval) return cmd_eval(est, gt, opt(calib));
    if (*plot) return cmd_plot(est, opt(gt), opt(calib), out, rate);
    if (*sim) return cmd_simulate(scene, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
