#include "cardioinfer/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>

#include "cardioinfer/common.hpp"

namespace cardioinfer {

NeighborGraph knn_graph(const std::vector<Eigen::Vector3d>& points, int k) {
  const int n = static_cast<int>(points.size());
  if (n < 2) throw std::invalid_argument("knn_graph needs at least 2 points");
  if (k < 1 || k >= n) {
    throw std::invalid_argument("knn_graph needs 1 <= k < n");
  }

  // Candidate lists per vertex, (distance, index) with the lower index
  // winning ties.
  std::vector<std::vector<std::pair<double, int>>> near(n);
  std::vector<std::pair<double, int>> cand(n - 1);
  for (int i = 0; i < n; ++i) {
    cand.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back((points[i] - points[j]).norm(), j);
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    near[i].assign(cand.begin(), cand.begin() + k);
  }

  NeighborGraph g;
  g.adj.resize(n);
  std::vector<std::vector<char>> linked(n);
  for (int i = 0; i < n; ++i) linked[i].assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (const auto& [d, j] : near[i]) {
      const int a = std::min(i, j);
      const int b = std::max(i, j);
      if (linked[a][b]) continue;
      linked[a][b] = 1;
      g.adj[a].push_back({b, d});
      g.adj[b].push_back({a, d});
    }
  }
  for (auto& arcs : g.adj) {
    std::sort(arcs.begin(), arcs.end(),
              [](const NeighborGraph::Arc& x, const NeighborGraph::Arc& y) {
                return x.to < y.to;
              });
  }

  // Connectivity check with component sizes for the error message.
  std::vector<int> comp(n, -1);
  std::vector<int> sizes;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(sizes.size());
    int size = 0;
    std::queue<int> q;
    q.push(s);
    comp[s] = c;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      ++size;
      for (const auto& arc : g.adj[v]) {
        if (comp[arc.to] < 0) {
          comp[arc.to] = c;
          q.push(arc.to);
        }
      }
    }
    sizes.push_back(size);
  }
  if (sizes.size() > 1) {
    std::string msg = "k-NN graph is disconnected: component sizes";
    for (int s : sizes) msg += " " + std::to_string(s);
    throw ValidationError(msg);
  }
  return g;
}

namespace {

std::vector<double> dijkstra(const NeighborGraph& g, int source) {
  const int n = g.n_vertices();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (const auto& arc : g.adj[v]) {
      const double nd = d + arc.w;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        heap.emplace(nd, arc.to);
      }
    }
  }
  return dist;
}

}  // namespace

Eigen::MatrixXd geodesic_distances(const NeighborGraph& graph) {
  const int n = graph.n_vertices();
  Eigen::MatrixXd D(n, n);
  for (int s = 0; s < n; ++s) {
    const std::vector<double> dist = dijkstra(graph, s);
    for (int v = 0; v < n; ++v) {
      if (!std::isfinite(dist[v])) {
        throw ValidationError("geodesic distances: vertex " +
                              std::to_string(v) + " unreachable from " +
                              std::to_string(s));
      }
      D(s, v) = dist[v];
    }
  }
  // Per-source runs can disagree in the last bit; make symmetry exact.
  D = ((D + D.transpose()) / 2.0).eval();
  return D;
}

Eigen::MatrixXd isomap_embed(const Eigen::MatrixXd& distances, int dim) {
  const int n = static_cast<int>(distances.rows());
  if (distances.cols() != n || n < 2) {
    throw std::invalid_argument("isomap_embed needs a square matrix, n >= 2");
  }
  if (dim < 1 || dim > n - 1) {
    throw std::invalid_argument("isomap_embed needs 1 <= dim <= n - 1");
  }

  const Eigen::MatrixXd D2 = distances.array().square();
  const Eigen::MatrixXd J =
      Eigen::MatrixXd::Identity(n, n) -
      Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd B = -0.5 * J * D2 * J;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      (B + B.transpose()) / 2.0);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("isomap_embed: eigendecomposition failed");
  }
  // Ascending order from the solver; take from the back.
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1.0);

  Eigen::MatrixXd coords(n, dim);
  for (int a = 0; a < dim; ++a) {
    const double lambda = values[n - 1 - a];
    if (!(lambda > 1e-12 * scale)) {
      throw NumericalError(
          "isomap_embed: fewer than " + std::to_string(dim) +
          " positive eigenvalues (rank of the centered matrix too low)");
    }
    Eigen::VectorXd v = eig.eigenvectors().col(n - 1 - a);
    for (int i = 0; i < n; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    coords.col(a) = std::sqrt(lambda) * v;
  }
  return coords;
}

ManifoldEmbedding ManifoldEmbedding::build(const HeartMesh& mesh, int k) {
  const std::vector<int> ids = mesh.endocardial_vertices();
  std::vector<Eigen::Vector3d> points;
  points.reserve(ids.size());
  for (int v : ids) points.push_back(mesh.vertices[v]);
  const NeighborGraph g = knn_graph(points, k);
  const Eigen::MatrixXd D = geodesic_distances(g);
  return from_latent(ids, isomap_embed(D, 2));
}

ManifoldEmbedding ManifoldEmbedding::from_latent(std::vector<int> vertex_ids,
                                                 const Eigen::MatrixXd& latent) {
  if (latent.cols() != 2 ||
      latent.rows() != static_cast<Eigen::Index>(vertex_ids.size()) ||
      vertex_ids.empty()) {
    throw std::invalid_argument(
        "embedding needs one 2D latent row per vertex id");
  }
  ManifoldEmbedding emb;
  emb.vertex_ids_ = std::move(vertex_ids);
  emb.latent_ = latent;
  emb.lo_ = latent.colwise().minCoeff();
  emb.hi_ = latent.colwise().maxCoeff();
  std::vector<Eigen::Vector2d> pts(latent.rows());
  for (Eigen::Index i = 0; i < latent.rows(); ++i) {
    pts[i] = latent.row(i);
  }
  emb.index_ = KdTree<2>(std::move(pts));
  return emb;
}

Eigen::Vector2d ManifoldEmbedding::clamp(const Eigen::Vector2d& z) const {
  return z.cwiseMax(lo_).cwiseMin(hi_);
}

int ManifoldEmbedding::nearest_node(const Eigen::Vector2d& z) const {
  return vertex_ids_[index_.nearest(clamp(z))];
}

Eigen::Vector2d ManifoldEmbedding::latent_of_vertex(int mesh_vertex) const {
  const auto it =
      std::find(vertex_ids_.begin(), vertex_ids_.end(), mesh_vertex);
  if (it == vertex_ids_.end()) {
    throw std::invalid_argument("vertex " + std::to_string(mesh_vertex) +
                                " is not part of the embedding");
  }
  return latent_.row(it - vertex_ids_.begin());
}

ReconstructionStats reconstruction_error(const ManifoldEmbedding& emb,
                                         const HeartMesh& mesh) {
  ReconstructionStats stats;
  const int n = emb.size();
  for (int i = 0; i < n; ++i) {
    const int expected = emb.vertex_ids()[i];
    const int got = emb.nearest_node(emb.latent().row(i));
    if (got == expected) {
      stats.identity_fraction += 1.0;
    } else {
      stats.mean_error_mm +=
          (mesh.vertices[got] - mesh.vertices[expected]).norm();
    }
  }
  stats.mean_error_mm /= n;
  stats.identity_fraction /= n;
  return stats;
}

std::string embedding_csv(const ManifoldEmbedding& emb) {
  std::string out = "vertex_id,z1,z2\n";
  char buf[96];
  for (int i = 0; i < emb.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", emb.vertex_ids()[i],
                  emb.latent()(i, 0), emb.latent()(i, 1));
    out += buf;
  }
  return out;
}

}  // namespace cardioinfer
