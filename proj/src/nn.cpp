#include "vipscene/nn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace vipscene {

KdTree3::KdTree3(const PointCloud& points) : points_(points) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(points_.cols()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  nodes_.reserve(idx.size());
  root_ = build(idx, 0, idx.size());
}

int KdTree3::build(std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t end) {
  if (begin >= end) return -1;
  // split on the widest axis of this cell
  Vec3<double> lo = Vec3<double>::Constant(std::numeric_limits<double>::infinity());
  Vec3<double> hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_.col(idx[i]));
    hi = hi.cwiseMax(points_.col(idx[i]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(begin), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(end), [&](Eigen::Index a, Eigen::Index b) {
                     const double pa = points_(axis, a), pb = points_(axis, b);
                     return pa < pb || (pa == pb && a < b);
                   });
  const int node = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const int left = build(idx, begin, mid);
  const int right = build(idx, mid + 1, end);
  nodes_[static_cast<std::size_t>(node)].left = left;
  nodes_[static_cast<std::size_t>(node)].right = right;
  return node;
}

void KdTree3::search(int node, const Vec3<double>& q, Hit& best) const {
  if (node < 0) return;
  const Node& n = nodes_[static_cast<std::size_t>(node)];
  const double d2 = (points_.col(n.point) - q).squaredNorm();
  if (d2 < best.squared_distance || (d2 == best.squared_distance && n.point < best.index)) {
    best.squared_distance = d2;
    best.index = n.point;
  }
  const double diff = q(n.axis) - points_(n.axis, n.point);
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, best);
  // `<=` keeps equal-distance candidates on the far side reachable for the index tie-break
  if (diff * diff <= best.squared_distance) search(far, q, best);
}

KdTree3::Hit KdTree3::nearest(const Vec3<double>& query) const {
  Hit best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

} // namespace vipscene
