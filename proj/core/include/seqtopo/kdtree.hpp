#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "seqtopo/geometry.hpp"

namespace seqtopo {

// Static 3-d tree over a point set, built once by median splits.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  struct Hit {
    std::uint32_t index = 0;
    double distance2 = 0.0;
  };

  // Closest point; ties resolve to the lowest index. Requires a non-empty tree.
  Hit nearest(const Vec3& query) const;

  // Appends the indices of all points with |p - query| <= radius.
  void within_radius(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const;

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  struct Node {
    std::uint32_t begin;  // range into order_
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
  void nearest_impl(std::int32_t node, const Vec3& q, Hit& best) const;
  void radius_impl(std::int32_t node, const Vec3& q, double r2, std::vector<std::uint32_t>& out) const;

  static constexpr std::uint32_t kLeafSize = 8;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace seqtopo
