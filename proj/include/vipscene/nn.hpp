#pragma once

#include "vipscene/geom.hpp"

#include <vector>

namespace vipscene {

/// Static 3D k-d tree over the columns of a point block. Exact nearest
/// neighbor; equal distances resolve to the smallest point index.
class KdTree3 {
public:
  explicit KdTree3(const PointCloud& points);

  struct Hit {
    Eigen::Index index = -1;
    double squared_distance = 0;
  };

  Hit nearest(const Vec3<double>& query) const;

  Eigen::Index size() const { return points_.cols(); }

private:
  struct Node {
    Eigen::Index point;
    int axis;
    int left = -1, right = -1;
  };

  int build(std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t end);
  void search(int node, const Vec3<double>& q, Hit& best) const;

  PointCloud points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

} // namespace vipscene
