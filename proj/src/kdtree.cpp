#include "lodom/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "lodom/errors.hpp"

namespace lodom {

namespace {

// (squared distance, index) ordering shared by all queries.
struct Candidate {
  double d2;
  std::uint32_t index;
  bool operator<(const Candidate& o) const {
    return d2 < o.d2 || (d2 == o.d2 && index < o.index);
  }
};

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) {
  if (points.empty()) throw DataError("cannot build a k-d tree from no points");
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw DataError("too many points for a k-d tree");
  }
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw DataError("non-finite point in k-d tree input");
  }
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  points_.assign(points.begin(), points.end());
  nodes_.reserve(2 * points.size() / kLeafSize + 2);
  build(0, static_cast<std::uint32_t>(points.size()));

  std::vector<Vec3> reordered(points.size());
  slot_of_.resize(points.size());
  for (std::size_t slot = 0; slot < order_.size(); ++slot) {
    reordered[slot] = points_[order_[slot]];
    slot_of_[order_[slot]] = static_cast<std::uint32_t>(slot);
  }
  points_ = std::move(reordered);
}

const Vec3& KdTree::point(std::size_t input_index) const {
  return points_[slot_of_.at(input_index)];
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const double ca = points_[a][axis], cb = points_[b][axis];
    return ca < cb || (ca == cb && a < b);
  };
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, less);
  const double split = points_[order_[mid]][axis];

  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = static_cast<std::int8_t>(axis);
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

std::optional<Neighbor> KdTree::nearest(const Vec3& q, double r_max) const {
  Candidate best{r_max * r_max, std::numeric_limits<std::uint32_t>::max()};
  // Explicit stack of (node, lower bound on squared distance).
  std::int32_t stack_nodes[64];
  double stack_bounds[64];
  int top = 0;
  stack_nodes[top] = 0;
  stack_bounds[top] = 0.0;
  ++top;
  while (top > 0) {
    --top;
    const Node& node = nodes_[stack_nodes[top]];
    if (stack_bounds[top] > best.d2) continue;
    if (node.axis < 0) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        const Candidate c{(points_[s] - q).squaredNorm(), order_[s]};
        if (c.d2 < best.d2 || (c.d2 == best.d2 && c.index < best.index)) {
          best = c;
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near_child = diff < 0.0 ? node.left : node.right;
    const std::int32_t far_child = diff < 0.0 ? node.right : node.left;
    stack_nodes[top] = far_child;
    stack_bounds[top] = diff * diff;
    ++top;
    stack_nodes[top] = near_child;
    stack_bounds[top] = 0.0;
    ++top;
  }
  if (best.index == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  return Neighbor{best.index, std::sqrt(best.d2)};
}

std::optional<Neighbor> KdTree::nearest(const Vec3& q) const {
  return nearest(q, std::numeric_limits<double>::infinity());
}

std::vector<Neighbor> KdTree::knn(const Vec3& q, std::size_t k) const {
  std::vector<Candidate> heap;  // max-heap under Candidate::operator<
  if (k == 0) return {};
  heap.reserve(k + 1);
  auto worst = [&]() {
    return heap.size() < k ? std::numeric_limits<double>::infinity()
                           : heap.front().d2;
  };
  std::int32_t stack_nodes[64];
  double stack_bounds[64];
  int top = 0;
  stack_nodes[top] = 0;
  stack_bounds[top] = 0.0;
  ++top;
  while (top > 0) {
    --top;
    const Node& node = nodes_[stack_nodes[top]];
    if (stack_bounds[top] > worst()) continue;
    if (node.axis < 0) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        const Candidate c{(points_[s] - q).squaredNorm(), order_[s]};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      continue;
    }
    const double diff = q[node.axis] - node.split;
    const std::int32_t near_child = diff < 0.0 ? node.left : node.right;
    const std::int32_t far_child = diff < 0.0 ? node.right : node.left;
    stack_nodes[top] = far_child;
    stack_bounds[top] = diff * diff;
    ++top;
    stack_nodes[top] = near_child;
    stack_bounds[top] = 0.0;
    ++top;
  }
  std::sort_heap(heap.begin(), heap.end());
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const Candidate& c : heap) out.push_back({c.index, std::sqrt(c.d2)});
  return out;
}

}  // namespace lodom
