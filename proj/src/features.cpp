#include "lodom/features.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace lodom {

namespace {

constexpr int kPatchRadius = 15;
constexpr int kPatternRadius = 13;
constexpr int kBorder = kPatchRadius + 4;

// Bresenham circle of radius 3, clockwise from the top.
constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3}, {1, -3}, {2, -2},
                                                      {3, -1}, {3, 0}, {3, 1},
                                                      {2, 2}, {1, 3}, {0, 3},
                                                      {-1, 3}, {-2, 2}, {-3, 1},
                                                      {-3, 0}, {-3, -1}, {-2, -2},
                                                      {-1, -3}}};

struct TestPair {
  int ax, ay, bx, by;
};

std::vector<TestPair> make_pattern(std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 31.0 / 5.0);
  auto sample = [&](int& x, int& y) {
    do {
      x = static_cast<int>(std::lround(gauss(rng)));
      y = static_cast<int>(std::lround(gauss(rng)));
    } while (x * x + y * y > kPatternRadius * kPatternRadius);
  };
  std::vector<TestPair> pattern(256);
  for (TestPair& t : pattern) {
    do {
      sample(t.ax, t.ay);
      sample(t.bx, t.by);
    } while (t.ax == t.bx && t.ay == t.by);
  }
  return pattern;
}

// FAST-9 segment test. Returns the corner score (sum of the excess
// contrast over the threshold on the qualifying side) or 0.
int fast_score(const GrayImage& img, int row, int col, int threshold) {
  const int c = img.at(row, col);
  const int hi = c + threshold, lo = c - threshold;
  int brighter_compass = 0, darker_compass = 0;
  for (int k = 0; k < 16; k += 4) {
    const int v = img.at(row + kCircle[k][1], col + kCircle[k][0]);
    brighter_compass += v > hi;
    darker_compass += v < lo;
  }
  if (brighter_compass < 2 && darker_compass < 2) return 0;

  std::array<int, 16> ring;
  for (int k = 0; k < 16; ++k) {
    ring[k] = img.at(row + kCircle[k][1], col + kCircle[k][0]);
  }
  auto longest_run = [&](auto pred) {
    int best = 0, run = 0;
    for (int k = 0; k < 32; ++k) {
      if (pred(ring[k % 16])) {
        best = std::max(best, ++run);
      } else {
        run = 0;
      }
    }
    return std::min(best, 16);
  };
  int score = 0;
  if (longest_run([&](int v) { return v > hi; }) >= 9) {
    for (int v : ring) score += std::max(0, v - hi);
  }
  if (longest_run([&](int v) { return v < lo; }) >= 9) {
    int s = 0;
    for (int v : ring) s += std::max(0, lo - v);
    score = std::max(score, s);
  }
  return score;
}

double harris_response(const GrayImage& img, int row, int col, int block,
                       double k) {
  const int r = block / 2;
  double sxx = 0, syy = 0, sxy = 0;
  for (int y = row - r; y <= row + r; ++y) {
    for (int x = col - r; x <= col + r; ++x) {
      const double gx = (img.at(y - 1, x + 1) + 2.0 * img.at(y, x + 1) +
                         img.at(y + 1, x + 1)) -
                        (img.at(y - 1, x - 1) + 2.0 * img.at(y, x - 1) +
                         img.at(y + 1, x - 1));
      const double gy = (img.at(y + 1, x - 1) + 2.0 * img.at(y + 1, x) +
                         img.at(y + 1, x + 1)) -
                        (img.at(y - 1, x - 1) + 2.0 * img.at(y - 1, x) +
                         img.at(y - 1, x + 1));
      sxx += gx * gx;
      syy += gy * gy;
      sxy += gx * gy;
    }
  }
  const double det = sxx * syy - sxy * sxy;
  const double tr = sxx + syy;
  return det - k * tr * tr;
}

// 7-tap Gaussian, sigma 2, applied separably.
std::vector<float> smooth(const GrayImage& img) {
  constexpr int kRadius = 3;
  std::array<float, 2 * kRadius + 1> kernel;
  float total = 0.f;
  for (int k = -kRadius; k <= kRadius; ++k) {
    kernel[k + kRadius] = std::exp(-0.5f * k * k / 4.f);
    total += kernel[k + kRadius];
  }
  for (float& v : kernel) v /= total;

  const int w = img.width, h = img.height;
  std::vector<float> tmp(static_cast<std::size_t>(w) * h, 0.f);
  std::vector<float> out(tmp.size(), 0.f);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int k = -kRadius; k <= kRadius; ++k) {
        s += kernel[k + kRadius] * img.at(y, std::clamp(x + k, 0, w - 1));
      }
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float s = 0.f;
      for (int k = -kRadius; k <= kRadius; ++k) {
        s += kernel[k + kRadius] *
             tmp[static_cast<std::size_t>(std::clamp(y + k, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

template <typename Sample>
double centroid_orientation(const Sample& img, int row, int col) {
  double m01 = 0, m10 = 0;
  for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy) {
    for (int dx = -kPatchRadius; dx <= kPatchRadius; ++dx) {
      if (dx * dx + dy * dy > kPatchRadius * kPatchRadius) continue;
      const double v = img(row + dy, col + dx);
      m10 += dx * v;
      m01 += dy * v;
    }
  }
  return std::atan2(m01, m10);
}

}  // namespace

std::vector<Feature2D> detect_features(const GrayImage& image,
                                       const OrbParams& params) {
  const int w = image.width, h = image.height;
  if (w <= 2 * kBorder || h <= 2 * kBorder) return {};

  std::vector<int> scores(static_cast<std::size_t>(w) * h, 0);
  for (int row = kBorder; row < h - kBorder; ++row) {
    for (int col = kBorder; col < w - kBorder; ++col) {
      scores[static_cast<std::size_t>(row) * w + col] =
          fast_score(image, row, col, params.fast_threshold);
    }
  }

  struct Candidate {
    int row, col;
    double response;
  };
  std::vector<Candidate> candidates;
  for (int row = kBorder; row < h - kBorder; ++row) {
    for (int col = kBorder; col < w - kBorder; ++col) {
      const int s = scores[static_cast<std::size_t>(row) * w + col];
      if (s == 0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int o = scores[static_cast<std::size_t>(row + dy) * w + col + dx];
          // Ties resolve toward the earlier pixel in raster order.
          if (o > s || (o == s && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (!is_max) continue;
      candidates.push_back(
          {row, col, harris_response(image, row, col, params.harris_block,
                                     params.harris_k)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.response > b.response;
                   });
  if (static_cast<int>(candidates.size()) > params.max_features) {
    candidates.resize(params.max_features);
  }

  const std::vector<TestPair> pattern = make_pattern(params.pattern_seed);
  const std::vector<float> smoothed = smooth(image);
  auto sample = [&](int row, int col) {
    return smoothed[static_cast<std::size_t>(row) * w + col];
  };

  std::vector<Feature2D> features;
  features.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    Feature2D f;
    f.position = Eigen::Vector2d(c.col, c.row);
    f.response = c.response;
    f.orientation = centroid_orientation(sample, c.row, c.col);
    const double cs = std::cos(f.orientation), sn = std::sin(f.orientation);
    for (std::size_t bit = 0; bit < pattern.size(); ++bit) {
      const TestPair& t = pattern[bit];
      const int ax = static_cast<int>(std::lround(cs * t.ax - sn * t.ay));
      const int ay = static_cast<int>(std::lround(sn * t.ax + cs * t.ay));
      const int bx = static_cast<int>(std::lround(cs * t.bx - sn * t.by));
      const int by = static_cast<int>(std::lround(sn * t.bx + cs * t.by));
      f.descriptor[bit] = sample(c.row + ay, c.col + ax) < sample(c.row + by, c.col + bx);
    }
    features.push_back(std::move(f));
  }
  return features;
}

std::vector<FeatureMatch> match_features(std::span<const Feature2D> query,
                                         std::span<const Feature2D> train,
                                         double ratio) {
  std::vector<FeatureMatch> matches;
  for (std::size_t qi = 0; qi < query.size(); ++qi) {
    int best = 257, second = 257;
    std::size_t best_idx = 0;
    for (std::size_t ti = 0; ti < train.size(); ++ti) {
      const int d = hamming(query[qi].descriptor, train[ti].descriptor);
      if (d < best) {
        second = best;
        best = d;
        best_idx = ti;
      } else if (d < second) {
        second = d;
      }
    }
    if (best > 256) continue;
    if (second <= 256 && !(best < ratio * second)) continue;
    matches.push_back({qi, best_idx, best});
  }
  return matches;
}

namespace {

Eigen::Matrix3d normalizing_transform(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double spread = 0.0;
  for (const auto& p : pts) spread += (p - mean).norm();
  spread /= static_cast<double>(pts.size());
  const double s = spread > 0.0 ? std::sqrt(2.0) / spread : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
              const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a, v = c - a;
  return u.x() * v.y() - u.y() * v.x();
}

bool has_collinear_triple(const std::array<Eigen::Vector2d, 4>& p) {
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (std::abs(cross2(p[t[0]], p[t[1]], p[t[2]])) < 1e-3) return true;
  }
  return false;
}

std::optional<Eigen::Vector2d> apply_homography(const Homography& h,
                                                const Eigen::Vector2d& p) {
  const Eigen::Vector3d q = h * p.homogeneous();
  if (std::abs(q.z()) < 1e-12) return std::nullopt;
  return q.hnormalized();
}

}  // namespace

std::optional<Homography> fit_homography(std::span<const Eigen::Vector2d> src,
                                         std::span<const Eigen::Vector2d> dst) {
  const std::size_t n = src.size();
  if (n < 4 || dst.size() != n) return std::nullopt;
  const Eigen::Matrix3d ts = normalizing_transform(src);
  const Eigen::Matrix3d td = normalizing_transform(dst);
  Eigen::MatrixXd a(2 * n, 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = ts * src[i].homogeneous();
    const Eigen::Vector3d d = td * dst[i].homogeneous();
    a.row(2 * i) << -s.x(), -s.y(), -1, 0, 0, 0, d.x() * s.x(), d.x() * s.y(), d.x();
    a.row(2 * i + 1) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd hv = svd.matrixV().col(8);
  Homography hn;
  hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  Homography h = td.inverse() * hn * ts;
  if (!h.allFinite() || std::abs(h(2, 2)) < 1e-12) return std::nullopt;
  h /= h(2, 2);
  return h;
}

std::optional<HomographyFit> ransac_homography(
    std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst,
    const RansacParams& params) {
  const std::size_t n = src.size();
  if (n < 4 || dst.size() != n) return std::nullopt;
  std::mt19937 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const double thr2 = params.inlier_threshold * params.inlier_threshold;

  std::optional<HomographyFit> best;
  std::vector<std::size_t> inliers;
  for (int it = 0; it < params.iterations; ++it) {
    std::array<std::size_t, 4> idx;
    for (std::size_t k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = pick(rng);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      } while (!fresh);
    }
    std::array<Eigen::Vector2d, 4> s, d;
    for (std::size_t k = 0; k < 4; ++k) {
      s[k] = src[idx[k]];
      d[k] = dst[idx[k]];
    }
    if (has_collinear_triple(s) || has_collinear_triple(d)) continue;
    const auto h = fit_homography(s, d);
    if (!h) continue;
    inliers.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = apply_homography(*h, src[i]);
      if (p && (*p - dst[i]).squaredNorm() <= thr2) inliers.push_back(i);
    }
    if (!best || inliers.size() > best->inliers.size()) {
      best = HomographyFit{*h, inliers};
    }
  }
  return best;
}

Eigen::Vector2d Rigid2D::apply(const Eigen::Vector2d& p) const {
  return Eigen::Rotation2Dd(yaw) * p + translation;
}

Rigid2D fit_rigid_2d(std::span<const Eigen::Vector2d> src,
                     std::span<const Eigen::Vector2d> dst) {
  Rigid2D out;
  const std::size_t n = std::min(src.size(), dst.size());
  if (n == 0) return out;
  Eigen::Vector2d cs = Eigen::Vector2d::Zero(), cd = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(n);
  cd /= static_cast<double>(n);
  Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    s += (src[i] - cs) * (dst[i] - cd).transpose();
  }
  out.yaw = std::atan2(s(0, 1) - s(1, 0), s(0, 0) + s(1, 1));
  out.translation = cd - Eigen::Rotation2Dd(out.yaw) * cs;
  return out;
}

}  // namespace lodom
