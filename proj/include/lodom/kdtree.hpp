#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lodom/geom.hpp"

namespace lodom {

struct Neighbor {
  std::size_t index = 0;  // into the array the tree was built from
  double distance = 0.0;
};

// Static 3D k-d tree. Splits at the median along the axis of largest
// spread; ties on the split coordinate go by input index, so both the
// structure and every query result are deterministic. Among equidistant
// points a query returns the smallest input index, matching a linear scan.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  // Throws DataError on empty input or non-finite coordinates.
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::size_t input_index) const;

  // Nearest point within r_max (inclusive), if any.
  std::optional<Neighbor> nearest(const Vec3& q, double r_max) const;
  std::optional<Neighbor> nearest(const Vec3& q) const;

  // Up to k nearest points sorted by (distance, index).
  std::vector<Neighbor> knn(const Vec3& q, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double split = 0.0;
    std::int8_t axis = -1;  // -1 for leaves
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> points_;           // reordered to leaf order
  std::vector<std::uint32_t> order_;   // leaf slot -> input index
  std::vector<std::uint32_t> slot_of_; // input index -> leaf slot
  std::vector<Node> nodes_;
};

inline KdTree build_index(std::span<const Vec3> points) { return KdTree(points); }

inline std::optional<Neighbor> nearest(const KdTree& index, const Vec3& q,
                                       double r_max) {
  return index.nearest(q, r_max);
}

}  // namespace lodom
