#include <fstream>

#include "doctest.h"
#include "lodom/config.hpp"
#include "lodom/errors.hpp"
#include "lodom/pipeline.hpp"
#include "support.hpp"

using namespace lodom;
using namespace lodom::test;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    ConfigDocument::parse_string(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("values, comments and tables") {
  const auto doc = ConfigDocument::parse_string(R"(# header comment
top = 1
[alpha]
x = 1.5      # trailing comment
n = -42
flag = true
off = false
name = "a # not a comment"
list = [1, 2.5, -3e2]
empty = []

[[item]]
id = 1
[[item]]
id = 2
)");
  CHECK(doc.root().integer("top") == 1);
  const ConfigTable* a = doc.table("alpha");
  REQUIRE(a);
  CHECK(a->number("x") == 1.5);
  CHECK(a->integer("n") == -42);
  CHECK(a->boolean("flag", false));
  CHECK_FALSE(a->boolean("off", true));
  CHECK(a->string("name") == "a # not a comment");
  CHECK(a->numbers("list") == std::vector<double>{1, 2.5, -300});
  CHECK(a->numbers("empty").empty());
  CHECK(a->number("missing", 7.0) == 7.0);
  CHECK_FALSE(a->optional_string("missing"));
  CHECK(doc.table("nothing") == nullptr);
  const auto items = doc.tables("item");
  REQUIRE(items.size() == 2);
  CHECK(items[0]->integer("id") == 1);
  CHECK(items[1]->integer("id") == 2);
  CHECK(items[1]->array_entry());
}

TEST_CASE("vec3 needs three numbers") {
  const auto doc = ConfigDocument::parse_string("[s]\nv = [1, 2, 3]\nw = [1, 2]\n");
  CHECK(doc.table("s")->vec3("v") == Vec3(1, 2, 3));
  CHECK_THROWS_AS(doc.table("s")->vec3("w"), ParseError);
}

TEST_CASE("errors carry the offending line") {
  CHECK(error_line("a = 1\nb = \n") == 2);
  CHECK(error_line("a = 1\n\n[t\n") == 3);
  CHECK(error_line("a = \"open\n") == 1);
  CHECK(error_line("[t]\nx = 1\nx = 2\n") == 3);
  CHECK(error_line("[t]\n[t]\n") == 2);
  CHECK(error_line("x = [1, , 2]\n") == 1);
  CHECK(error_line("x = 12abc\n") == 1);
  CHECK(error_line("just words\n") == 1);
  CHECK(error_line("bad key! = 1\n") == 1);
  CHECK(error_line("x = [1, 2\n") == 1);
}

TEST_CASE("typed getters reject the wrong type") {
  const auto doc = ConfigDocument::parse_string("[t]\ns = \"x\"\nf = 1.5\nb = true\n");
  const ConfigTable& t = *doc.table("t");
  CHECK_THROWS_AS(t.number("s"), ParseError);
  CHECK_THROWS_AS(t.integer("f"), ParseError);
  CHECK_THROWS_AS(t.string("b"), ParseError);
  CHECK_THROWS_AS(t.number("nope"), ParseError);
  try {
    t.number("s");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(ConfigDocument::parse_file("/nonexistent/x.toml"), IoError);
}

TEST_CASE("pipeline defaults") {
  const auto doc = ConfigDocument::parse_string("[dataset]\npath = \"seq\"\n");
  const PipelineConfig c = pipeline_config_from(doc, "/data");
  CHECK(c.dataset == std::filesystem::path("/data/seq"));
  CHECK(c.format == ScanFormat::kKittiBin);
  CHECK(c.strategy == InitStrategy::kConstantVelocity);
  CHECK(c.backend == Backend::kKdF2M);
  CHECK(c.window == 30);
  CHECK(c.kd.voxel_size == 0.4);
  CHECK(c.scan_voxel_size == 0.4);
  CHECK(c.kd.normal_neighbors == 20);
  CHECK(c.kd.max_distance == 1.0);
  CHECK(c.candidate_depth == 4);
  CHECK(c.projection.height == 64);
  CHECK(c.projection.width == 720);
  CHECK(c.projection.elevation_max_deg == 3.0);
  CHECK(c.projection.elevation_min_deg == -25.0);
  CHECK(c.icp.max_iterations == 20);
  CHECK(c.icp.translation_tolerance == 1e-4);
  CHECK(c.icp.rotation_tolerance == 1e-4);
  CHECK(c.icp.sigma == 0.5);
  CHECK(c.icp.min_correspondences == 100);
  CHECK_FALSE(c.icp.hard_residual_cutoff);
  CHECK(c.icp.weighting);
  CHECK(c.elevation.image.pixel_size == 0.3);
  CHECK(c.elevation.image.resolution == 800);
  CHECK_FALSE(c.elevation.image.min_z);
  CHECK(c.elevation.orb.max_features == 500);
  CHECK(c.elevation.ratio == 0.8);
  CHECK(c.elevation.ransac.iterations == 1000);
  CHECK(c.elevation.ransac.inlier_threshold == 2.0);
  CHECK(c.elevation.min_inliers == 100);
  CHECK(c.frame_rate_hz == 10.0);
}

TEST_CASE("every section overrides") {
  const auto doc = ConfigDocument::parse_string(R"(
[dataset]
path = "/abs/seq"
format = "ply"
ground_truth = "gt.txt"
calibration = "calib.txt"
max_frames = 50
[pipeline]
strategy = "ei"
backend = "p-f2f"
output = "out"
frame_rate = 20
[mapping]
window = 5
voxel_size = 0.2
scan_voxel_size = 0.3
candidate_depth = 2
[projection]
height = 32
width = 360
elevation_max = 10
elevation_min = -30
[association]
normal_neighbors = 12
max_distance = 2.0
[registration]
max_iterations = 7
translation_tolerance = 1e-3
rotation_tolerance = 1e-3
sigma = 0.8
min_correspondences = 50
hard_residual_cutoff = 0.5
weighting = false
[initialization]
pixel_size = 0.2
resolution = 400
band_min = -1
band_max = 4
min_z = 0.0
max_features = 300
fast_threshold = 15
ratio = 0.7
ransac_iterations = 500
ransac_threshold = 3
seed = 9
min_inliers = 60
)");
  const PipelineConfig c = pipeline_config_from(doc, "/base");
  CHECK(c.dataset == std::filesystem::path("/abs/seq"));
  CHECK(c.format == ScanFormat::kPlyAscii);
  CHECK(*c.ground_truth == std::filesystem::path("/base/gt.txt"));
  CHECK(*c.calibration == std::filesystem::path("/base/calib.txt"));
  CHECK(*c.max_frames == 50);
  CHECK(c.strategy == InitStrategy::kElevationImage);
  CHECK(c.backend == Backend::kProjectiveF2F);
  CHECK(c.output_dir == std::filesystem::path("/base/out"));
  CHECK(c.frame_rate_hz == 20.0);
  CHECK(c.window == 5);
  CHECK(c.kd.voxel_size == 0.2);
  CHECK(c.scan_voxel_size == 0.3);
  CHECK(c.candidate_depth == 2);
  CHECK(c.projection.height == 32);
  CHECK(c.projection.width == 360);
  CHECK(c.projection.elevation_max_deg == 10.0);
  CHECK(c.projection.elevation_min_deg == -30.0);
  CHECK(c.kd.normal_neighbors == 12);
  CHECK(c.kd.max_distance == 2.0);
  CHECK(c.icp.max_iterations == 7);
  CHECK(c.icp.sigma == 0.8);
  CHECK(c.icp.min_correspondences == 50);
  CHECK(*c.icp.hard_residual_cutoff == 0.5);
  CHECK_FALSE(c.icp.weighting);
  CHECK(c.elevation.image.pixel_size == 0.2);
  CHECK(c.elevation.image.resolution == 400);
  CHECK(*c.elevation.image.min_z == 0.0);
  CHECK(c.elevation.orb.max_features == 300);
  CHECK(c.elevation.orb.fast_threshold == 15);
  CHECK(c.elevation.ratio == 0.7);
  CHECK(c.elevation.ransac.iterations == 500);
  CHECK(c.elevation.ransac.inlier_threshold == 3.0);
  CHECK(c.elevation.ransac.seed == 9);
  CHECK(c.elevation.min_inliers == 60);
}

TEST_CASE("strategy and backend names") {
  CHECK(parse_strategy("ni") == InitStrategy::kIdentity);
  CHECK(parse_strategy("NI") == InitStrategy::kIdentity);
  CHECK(parse_strategy("cv") == InitStrategy::kConstantVelocity);
  CHECK(parse_strategy("EI") == InitStrategy::kElevationImage);
  CHECK(parse_strategy("external") == InitStrategy::kExternal);
  CHECK_THROWS_AS(parse_strategy("posenet"), ConfigError);
  for (Backend b : {Backend::kKdF2M, Backend::kProjectiveF2M, Backend::kKdF2F, Backend::kProjectiveF2F}) {
    CHECK(parse_backend(to_string(b)) == b);
  }
  for (InitStrategy s : {InitStrategy::kIdentity, InitStrategy::kConstantVelocity,
                         InitStrategy::kElevationImage, InitStrategy::kExternal}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_backend("icp"), ConfigError);
}

TEST_CASE("inconsistent settings are rejected") {
  CHECK_THROWS_AS(pipeline_config_from(ConfigDocument::parse_string("[pipeline]\nstrategy = \"cv\"\n")),
                  ParseError);
  CHECK_THROWS_AS(pipeline_config_from(ConfigDocument::parse_string(
                      "[dataset]\npath = \"x\"\n[pipeline]\nstrategy = \"external\"\n")),
                  ConfigError);
  CHECK_THROWS(pipeline_config_from(
      ConfigDocument::parse_string("[dataset]\npath = \"x\"\n[mapping]\nwindow = 0\n")));
  CHECK_THROWS_AS(pipeline_config_from(ConfigDocument::parse_string(
                      "[dataset]\npath = \"x\"\n[registration]\nsigma = 0\n")),
                  ConfigError);
  CHECK_THROWS_AS(pipeline_config_from(ConfigDocument::parse_string(
                      "[dataset]\npath = \"x\"\n[projection]\nelevation_min = 5\n")),
                  ConfigError);
  PipelineConfig c;
  c.dataset = "x";
  CHECK_NOTHROW(c.validate());
  c.window = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.strategy = InitStrategy::kExternal;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.external_poses = "poses.txt";
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("shipped configs load") {
  const std::filesystem::path dir(LODOM_CONFIG_DIR);
  const PipelineConfig run = load_pipeline_config(dir / "hall_run.toml");
  CHECK(run.strategy == InitStrategy::kConstantVelocity);
  CHECK(run.backend == Backend::kKdF2M);
  for (const char* scene : {"hall.toml", "hall_abrupt.toml", "room.toml"}) {
    CAPTURE(scene);
    CHECK_NOTHROW(ConfigDocument::parse_file(dir / scene));
  }
}

TEST_CASE("relative paths resolve against the config file") {
  TempDir dir("cfg");
  {
    std::ofstream out(dir / "run.toml");
    out << "[dataset]\npath = \"scans\"\n[pipeline]\noutput = \"results\"\n";
  }
  const PipelineConfig c = load_pipeline_config(dir / "run.toml");
  CHECK(c.dataset == dir / "scans");
  CHECK(c.output_dir == dir / "results");
}
