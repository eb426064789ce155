#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace cardioinfer {

/// Static kd-tree over low-dimensional points with exhaustive-search
/// semantics: nearest() returns exactly the index an ascending linear scan
/// would, including the lowest-index rule on distance ties. Built once,
/// queried concurrently.
template <int Dim>
class KdTree {
 public:
  using Point = Eigen::Matrix<double, Dim, 1>;

  KdTree() = default;

  explicit KdTree(std::vector<Point> points) : points_(std::move(points)) {
    const int n = static_cast<int>(points_.size());
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(n);
    if (n > 0) root_ = build(0, n, 0);
  }

  int size() const { return static_cast<int>(points_.size()); }

  /// Index of the stored point nearest to q; ties go to the lowest index.
  /// Requires a non-empty tree.
  int nearest(const Point& q) const {
    int best_idx = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    search(root_, q, best_idx, best_d2);
    return best_idx;
  }

 private:
  struct Node {
    int point = -1;
    int axis = 0;
    int left = -1;
    int right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % Dim;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid,
                     order_.begin() + hi, [&](int a, int b) {
                       const double va = points_[a][axis];
                       const double vb = points_[b][axis];
                       if (va != vb) return va < vb;
                       return a < b;  // deterministic layout
                     });
    Node node;
    node.point = order_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    const int left = build(lo, mid, depth + 1);
    const int right = build(mid + 1, hi, depth + 1);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
  }

  void consider(int idx, const Point& q, int& best_idx, double& best_d2) const {
    const double d2 = (points_[idx] - q).squaredNorm();
    if (d2 < best_d2 || (d2 == best_d2 && idx < best_idx)) {
      best_d2 = d2;
      best_idx = idx;
    }
  }

  void search(int node_id, const Point& q, int& best_idx,
              double& best_d2) const {
    if (node_id < 0) return;
    const Node& node = nodes_[node_id];
    consider(node.point, q, best_idx, best_d2);
    const double diff = q[node.axis] - points_[node.point][node.axis];
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, q, best_idx, best_d2);
    // <= keeps equal-distance points on the far side reachable, which the
    // lowest-index tie rule needs.
    if (diff * diff <= best_d2) search(far, q, best_idx, best_d2);
  }

  std::vector<Point> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace cardioinfer
