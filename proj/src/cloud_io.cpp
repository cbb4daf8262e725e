#include "lodom/cloud_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include "lodom/errors.hpp"

namespace lodom {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kKittiRecordBytes = 16;

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

float decode_le_float(const char* p) {
  std::uint32_t u;
  std::memcpy(&u, p, 4);
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0xffu) << 24) | ((u & 0xff00u) << 8) | ((u >> 8) & 0xff00u) |
        (u >> 24);
  }
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void encode_le_float(float f, char* p) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0xffu) << 24) | ((u & 0xff00u) << 8) | ((u >> 8) & 0xff00u) |
        (u >> 24);
  }
  std::memcpy(p, &u, 4);
}

PointCloud read_kitti_bin(const fs::path& path) {
  const std::vector<char> bytes = read_bytes(path);
  if (bytes.empty()) throw FormatError("no points in " + path.string(), 0);
  if (bytes.size() % kKittiRecordBytes != 0) {
    throw FormatError("truncated kitti-bin record in " + path.string(),
                      bytes.size() - bytes.size() % kKittiRecordBytes);
  }
  PointCloud cloud;
  const std::size_t n = bytes.size() / kKittiRecordBytes;
  cloud.points.reserve(n);
  cloud.intensities.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* rec = bytes.data() + i * kKittiRecordBytes;
    const float x = decode_le_float(rec);
    const float y = decode_le_float(rec + 4);
    const float z = decode_le_float(rec + 8);
    const float r = decode_le_float(rec + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      ++cloud.dropped;
      continue;
    }
    cloud.points.emplace_back(x, y, z);
    cloud.intensities.push_back(r);
  }
  if (cloud.points.empty()) {
    throw FormatError("no points in " + path.string(), 0);
  }
  return cloud;
}

PointCloud read_ply_ascii(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;

  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line() || line != "ply") throw ParseError("missing ply magic", 1);
  bool header_done = false;
  while (next_line()) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") {
        throw ParseError("only ascii PLY is supported, got " + fmt, line_no);
      }
    } else if (kw == "element") {
      Element e;
      if (!(ls >> e.name >> e.count)) {
        throw ParseError("malformed element line", line_no);
      }
      elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (elements.empty()) throw ParseError("property before element", line_no);
      std::string type, name;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type;
      }
      ls >> name;
      elements.back().properties.push_back(name);
    } else if (kw == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError("missing end_header", line_no);

  PointCloud cloud;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next_line()) throw ParseError("unexpected end of file", line_no);
      }
      continue;
    }
    auto find = [&](std::initializer_list<const char*> names) -> long {
      for (const char* n : names) {
        auto it = std::find(e.properties.begin(), e.properties.end(), n);
        if (it != e.properties.end()) return it - e.properties.begin();
      }
      return -1;
    };
    const long ix = find({"x"}), iy = find({"y"}), iz = find({"z"});
    const long ii = find({"intensity", "reflectance"});
    if (ix < 0 || iy < 0 || iz < 0) {
      throw ParseError("vertex element lacks x/y/z properties", line_no);
    }
    std::vector<double> values(e.properties.size());
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!next_line()) throw ParseError("unexpected end of file", line_no);
      std::istringstream ls(line);
      for (double& v : values) {
        std::string tok;
        if (!(ls >> tok)) throw ParseError("too few vertex values", line_no);
        try {
          v = std::stod(tok);
        } catch (const std::exception&) {
          // stod rejects "nan"/"inf" spellings on some platforms
          v = std::nan("");
        }
      }
      const Vec3 p(values[ix], values[iy], values[iz]);
      if (!p.allFinite()) {
        ++cloud.dropped;
        continue;
      }
      cloud.points.push_back(p);
      if (ii >= 0) cloud.intensities.push_back(static_cast<float>(values[ii]));
    }
  }
  if (cloud.points.empty()) throw FormatError("no points in " + path.string(), 0);
  return cloud;
}

Pose parse_pose_numbers(const std::array<double, 12>& v) {
  Mat3 r;
  Vec3 t;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col) r(row, col) = v[row * 4 + col];
    t(row) = v[row * 4 + 3];
  }
  return {r, t};
}

bool parse_twelve(std::istream& ls, std::array<double, 12>& v) {
  for (double& x : v) {
    if (!(ls >> x)) return false;
  }
  std::string extra;
  return !(ls >> extra);
}

std::vector<Pose> read_pose_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::array<double, 12> v{};
    if (!parse_twelve(ls, v)) {
      throw ParseError("expected 12 numbers in " + path.string(), line_no);
    }
    poses.push_back(parse_pose_numbers(v));
  }
  return poses;
}

}  // namespace

Trajectory Trajectory::from_poses(std::vector<Pose> poses) {
  Trajectory t;
  t.frame_ids.resize(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) t.frame_ids[i] = long(i);
  t.poses = std::move(poses);
  return t;
}

Pose relative_pose(const Trajectory& t, std::size_t i) {
  return inverse(t.poses.at(i - 1)) * t.poses.at(i);
}

Trajectory reanchor(const Trajectory& t) {
  Trajectory out = t;
  if (t.empty()) return out;
  const Pose origin_inv = inverse(t.poses.front());
  for (Pose& p : out.poses) p = origin_inv * p;
  out.poses.front() = Pose::identity();
  return out;
}

ScanFormat parse_scan_format(const std::string& name) {
  if (name == "kitti-bin") return ScanFormat::kKittiBin;
  if (name == "ply-ascii" || name == "ply") return ScanFormat::kPlyAscii;
  throw ConfigError("unknown scan format '" + name + "'");
}

std::string to_string(ScanFormat f) {
  return f == ScanFormat::kKittiBin ? "kitti-bin" : "ply-ascii";
}

PointCloud read_scan(const fs::path& path, ScanFormat format) {
  switch (format) {
    case ScanFormat::kKittiBin:
      return read_kitti_bin(path);
    case ScanFormat::kPlyAscii:
      return read_ply_ascii(path);
  }
  throw ConfigError("unknown scan format");
}

void write_kitti_bin(const PointCloud& cloud, const fs::path& path) {
  std::vector<char> bytes(cloud.size() * kKittiRecordBytes);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    char* rec = bytes.data() + i * kKittiRecordBytes;
    const Vec3& p = cloud.points[i];
    encode_le_float(static_cast<float>(p.x()), rec);
    encode_le_float(static_cast<float>(p.y()), rec + 4);
    encode_le_float(static_cast<float>(p.z()), rec + 8);
    encode_le_float(cloud.intensities.empty() ? 0.0f : cloud.intensities[i],
                    rec + 12);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_ply(const std::vector<Vec3>& points, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[96];
  for (const Vec3& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6g %.6g %.6g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Trajectory read_ground_truth(const fs::path& path, const Calibration& calib) {
  std::vector<Pose> raw = read_pose_lines(path);
  const Pose& c = calib.sensor_to_reference;
  const Pose c_inv = inverse(c);
  for (Pose& p : raw) p = c_inv * p * c;
  return reanchor(Trajectory::from_poses(std::move(raw)));
}

Trajectory read_external_poses(const fs::path& path) {
  return read_ground_truth(path, Calibration{});
}

std::string format_pose_line(const Pose& p) {
  std::string line;
  char buf[32];
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col) {
      const double v =
          (col < 3 ? p.rotation()(row, col) : p.translation()(row)) + 0.0;
      std::snprintf(buf, sizeof(buf), "%.9g", v);
      if (!line.empty()) line += ' ';
      line += buf;
    }
  }
  return line;
}

void write_trajectory(const Trajectory& t, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const Pose& p : t.poses) out << format_pose_line(p) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Calibration read_calibration(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::optional<Pose> bare;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    std::array<double, 12> v{};
    if (head == "Tr:" || head == "Tr_velo_to_cam:") {
      if (!parse_twelve(ls, v)) {
        throw ParseError("expected 12 numbers after " + head, line_no);
      }
      return {parse_pose_numbers(v)};
    }
    if (!bare && head.back() != ':') {
      std::istringstream full(line);
      if (!parse_twelve(full, v)) {
        throw ParseError("expected 12 numbers", line_no);
      }
      bare = parse_pose_numbers(v);
    }
  }
  if (bare) return {*bare};
  throw ParseError("no Tr entry in " + path.string(), line_no);
}

}  // namespace lodom
