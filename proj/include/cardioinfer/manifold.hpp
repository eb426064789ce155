#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cardioinfer/kdtree.hpp"
#include "cardioinfer/mesh.hpp"

namespace cardioinfer {

/// Symmetrized k-nearest-neighbor graph with euclidean weights.
struct NeighborGraph {
  struct Arc {
    int to;
    double w;
  };
  std::vector<std::vector<Arc>> adj;

  int n_vertices() const { return static_cast<int>(adj.size()); }
};

/// Mutual-or k-NN graph: an edge survives if either endpoint ranks the
/// other among its k nearest (distance ties broken by lower index).
/// Throws ValidationError listing component sizes if the result is
/// disconnected.
NeighborGraph knn_graph(const std::vector<Eigen::Vector3d>& points, int k);

/// All-pairs shortest-path matrix via Dijkstra from every source.
/// Symmetric, zero diagonal. Throws ValidationError on an unreachable
/// pair.
Eigen::MatrixXd geodesic_distances(const NeighborGraph& graph);

/// Classical MDS of a distance matrix: eigendecomposition of the
/// double-centered squared distances, top-`dim` axes scaled by the square
/// root of their eigenvalues, eigenvalues descending. Sign convention:
/// the first non-negligible loading of each axis is positive. Throws
/// NumericalError when fewer than `dim` eigenvalues are positive.
Eigen::MatrixXd isomap_embed(const Eigen::MatrixXd& distances, int dim = 2);

/// 2D isomap chart of the endocardial surface plus the kd-tree lookup
/// that inverts the (injective) embedding back to mesh vertices.
class ManifoldEmbedding {
 public:
  /// Runs the pipeline over the mesh's endocardial vertices:
  /// knn_graph(k) -> geodesic_distances -> isomap_embed(2).
  static ManifoldEmbedding build(const HeartMesh& mesh, int k);

  /// Wraps precomputed latent coordinates (rows follow vertex_ids).
  static ManifoldEmbedding from_latent(std::vector<int> vertex_ids,
                                       const Eigen::MatrixXd& latent);

  /// Mesh vertex whose latent point is nearest to z. Queries are clamped
  /// to the latent bounding box first; ties go to the lowest vertex id.
  int nearest_node(const Eigen::Vector2d& z) const;

  Eigen::Vector2d clamp(const Eigen::Vector2d& z) const;

  const std::vector<int>& vertex_ids() const { return vertex_ids_; }
  const Eigen::MatrixXd& latent() const { return latent_; }
  Eigen::Vector2d latent_lo() const { return lo_; }
  Eigen::Vector2d latent_hi() const { return hi_; }
  int size() const { return static_cast<int>(vertex_ids_.size()); }

  /// Latent coordinates of a mesh vertex (which must be embedded).
  Eigen::Vector2d latent_of_vertex(int mesh_vertex) const;

 private:
  std::vector<int> vertex_ids_;  // ascending mesh vertex ids
  Eigen::MatrixXd latent_;       // n x 2, rows follow vertex_ids_
  KdTree<2> index_;
  Eigen::Vector2d lo_{0, 0};
  Eigen::Vector2d hi_{0, 0};
};

struct ReconstructionStats {
  double mean_error_mm = 0.0;
  double identity_fraction = 0.0;
};

/// Round-trip fidelity: each embedded vertex's own latent coordinate is
/// looked up through nearest_node and the Cartesian distance to the
/// returned vertex is averaged. Injective embeddings give zero error and
/// identity fraction 1.
ReconstructionStats reconstruction_error(const ManifoldEmbedding& emb,
                                         const HeartMesh& mesh);

/// CSV export "vertex_id,z1,z2" with header.
std::string embedding_csv(const ManifoldEmbedding& emb);

}  // namespace cardioinfer
