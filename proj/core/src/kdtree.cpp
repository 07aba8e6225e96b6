#include "seqtopo/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "seqtopo/error.hpp"

namespace seqtopo {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  // Split along the axis of largest spread.
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{-lo.x, -lo.y, -lo.z};
  for (std::uint32_t i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (std::size_t a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  (void)depth;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid, depth + 1);
  const std::int32_t right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  return id;
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw GeometryError("kd-tree: nearest query on an empty tree");
  Hit best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
  nearest_impl(0, query, best);
  return best;
}

void KdTree::nearest_impl(std::int32_t id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = norm2(points_[idx] - q);
      if (d2 < best.distance2 || (d2 == best.distance2 && idx < best.index)) best = {idx, d2};
    }
    return;
  }
  const double delta = q[node.axis] - node.split;
  const std::int32_t near = delta < 0.0 ? node.left : node.right;
  const std::int32_t far = delta < 0.0 ? node.right : node.left;
  nearest_impl(near, q, best);
  if (delta * delta <= best.distance2) nearest_impl(far, q, best);
}

void KdTree::within_radius(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const {
  if (points_.empty()) return;
  radius_impl(0, query, radius * radius, out);
}

void KdTree::radius_impl(std::int32_t id, const Vec3& q, double r2, std::vector<std::uint32_t>& out) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      if (norm2(points_[idx] - q) <= r2) out.push_back(idx);
    }
    return;
  }
  const double delta = q[node.axis] - node.split;
  // Points equal to the split value can sit on either side of the median.
  if (delta <= 0.0 || delta * delta <= r2) radius_impl(node.left, q, r2, out);
  if (delta >= 0.0 || delta * delta <= r2) radius_impl(node.right, q, r2, out);
}

}  // namespace seqtopo
