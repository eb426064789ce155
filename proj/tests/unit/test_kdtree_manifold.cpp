#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "cardioinfer/kdtree.hpp"
#include "cardioinfer/manifold.hpp"
#include "cardioinfer/mesh.hpp"
#include "cardioinfer/rng.hpp"

using namespace cardioinfer;

namespace {

std::vector<Eigen::Vector3d> random_cloud(int n, std::uint64_t seed,
                                          double scale = 1.0) {
  Rng rng(seed);
  std::vector<Eigen::Vector3d> pts(n);
  for (auto& p : pts) {
    p = {rng.uniform(-scale, scale), rng.uniform(-scale, scale),
         rng.uniform(-scale, scale)};
  }
  return pts;
}

// ascending linear scan with the lowest-index tie rule
template <int Dim>
int exhaustive_nearest(const std::vector<Eigen::Matrix<double, Dim, 1>>& pts,
                       const Eigen::Matrix<double, Dim, 1>& q) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

// independent mutual-or kNN edge set, ties by lower index
std::set<std::pair<int, int>> brute_knn_edges(
    const std::vector<Eigen::Vector3d>& pts, int k) {
  const int n = static_cast<int>(pts.size());
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> by_dist;
    for (int j = 0; j < n; ++j) {
      if (j != i) by_dist.push_back({(pts[i] - pts[j]).norm(), j});
    }
    std::sort(by_dist.begin(), by_dist.end());
    for (int r = 0; r < k; ++r) {
      const int j = by_dist[r].second;
      edges.insert({std::min(i, j), std::max(i, j)});
    }
  }
  return edges;
}

std::set<std::pair<int, int>> graph_edges(const NeighborGraph& g) {
  std::set<std::pair<int, int>> edges;
  for (int i = 0; i < g.n_vertices(); ++i) {
    for (const auto& arc : g.adj[i]) {
      edges.insert({std::min(i, arc.to), std::max(i, arc.to)});
    }
  }
  return edges;
}

// Floyd-Warshall over the neighbor graph
Eigen::MatrixXd floyd_warshall(const NeighborGraph& g) {
  const int n = g.n_vertices();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(
      n, n, std::numeric_limits<double>::infinity());
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (int i = 0; i < n; ++i) {
    for (const auto& arc : g.adj[i]) {
      d(i, arc.to) = std::min(d(i, arc.to), arc.w);
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
      }
    }
  }
  return d;
}

std::vector<Eigen::Vector3d> collinear_points() {
  return {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
}

}  // namespace

TEST_CASE("kd-tree equals exhaustive search, ties included") {
  auto pts = random_cloud(200, 42);
  // force exact duplicates and near-ties
  pts[50] = pts[10];
  pts[120] = pts[3];
  std::vector<Eigen::Vector2d> pts2;
  for (const auto& p : pts) pts2.push_back(p.head<2>());
  const KdTree<2> tree(pts2);

  Rng rng(7);
  for (int q = 0; q < 1000; ++q) {
    const Eigen::Vector2d z(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
    CHECK(tree.nearest(z) == exhaustive_nearest<2>(pts2, z));
  }
  // querying a duplicated point must return the lower index
  CHECK(tree.nearest(pts2[50]) == 10);
}

TEST_CASE("knn_graph: collinear and complete cases") {
  const auto pts = collinear_points();
  const NeighborGraph g1 = knn_graph(pts, 1);
  CHECK(graph_edges(g1) ==
        std::set<std::pair<int, int>>{{0, 1}, {1, 2}});

  const NeighborGraph g2 = knn_graph(pts, 2);  // k = n-1 -> complete
  CHECK(graph_edges(g2) ==
        std::set<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("knn_graph: matches brute-force neighbor search") {
  const auto pts = random_cloud(20, 13);
  const NeighborGraph g = knn_graph(pts, 4);
  CHECK(graph_edges(g) == brute_knn_edges(pts, 4));
  // weights are euclidean distances
  for (int i = 0; i < g.n_vertices(); ++i) {
    for (const auto& arc : g.adj[i]) {
      CHECK(arc.w == doctest::Approx((pts[i] - pts[arc.to]).norm())
                         .epsilon(1e-12));
    }
  }
}

TEST_CASE("knn_graph: disconnection error lists component sizes") {
  // two tight pairs far apart, k=1 keeps them separate
  std::vector<Eigen::Vector3d> pts = {
      {0, 0, 0}, {0.1, 0, 0}, {100, 0, 0}, {100.1, 0, 0}};
  CHECK_THROWS_WITH_AS(knn_graph(pts, 1), doctest::Contains("2"),
                       ValidationError);
  CHECK_THROWS_AS(knn_graph(pts, 0), std::invalid_argument);
  CHECK_THROWS_AS(knn_graph(pts, 4), std::invalid_argument);  // k >= n
}

TEST_CASE("geodesic_distances: path graph and metric properties") {
  const NeighborGraph g = knn_graph(collinear_points(), 1);
  const Eigen::MatrixXd d = geodesic_distances(g);
  CHECK(d(0, 2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(d(0, 0) == 0.0);
  CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("geodesic_distances: matches Floyd-Warshall") {
  const auto pts = random_cloud(15, 99);
  const NeighborGraph g = knn_graph(pts, 4);
  const Eigen::MatrixXd got = geodesic_distances(g);
  const Eigen::MatrixXd want = floyd_warshall(g);
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
  // triangle inequality on sampled triples
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const int i = rng.below(15), j = rng.below(15), k = rng.below(15);
    CHECK(got(i, j) <= got(i, k) + got(k, j) + 1e-9);
  }
}

TEST_CASE("isomap_embed: collinear points give (-1, 0, 1) up to sign") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  const Eigen::MatrixXd z = isomap_embed(d, 1);
  REQUIRE(z.rows() == 3);
  REQUIRE(z.cols() == 1);
  const double sign = z(0, 0) < 0 ? 1.0 : -1.0;
  CHECK(sign * z(0, 0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sign * z(1, 0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sign * z(2, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isomap_embed: exact for euclidean planar input") {
  Rng rng(17);
  const int n = 24;
  Eigen::MatrixXd pts(n, 2);
  for (int i = 0; i < n; ++i) {
    pts(i, 0) = rng.uniform(-3, 3);
    pts(i, 1) = rng.uniform(-3, 3);
  }
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      d(i, j) = (pts.row(i) - pts.row(j)).norm();
    }
  }
  const Eigen::MatrixXd z = isomap_embed(d, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      CHECK((z.row(i) - z.row(j)).norm() ==
            doctest::Approx(d(i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("isomap_embed: rank error when dim exceeds positive spectrum") {
  Eigen::MatrixXd d(3, 3);  // 1D configuration has one positive eigenvalue
  d << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  CHECK_THROWS_AS(isomap_embed(d, 2), NumericalError);
  CHECK_THROWS_AS(isomap_embed(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(isomap_embed(d, 3), std::invalid_argument);
  Eigen::MatrixXd bad(2, 3);
  bad.setZero();
  CHECK_THROWS_AS(isomap_embed(bad, 1), std::invalid_argument);
}

TEST_CASE("isomap pipeline: latent distances invariant to rigid motion") {
  const HeartMesh mesh =
      generate_ellipsoid_shell(8, 8, {20, 20, 40}, 6, 2, 21);
  const ManifoldEmbedding a = ManifoldEmbedding::build(mesh, 8);

  // rotate + translate every vertex, rebuild, compare pairwise distances
  const double ang = 0.7;
  Eigen::Matrix3d rot;
  rot << std::cos(ang), -std::sin(ang), 0, std::sin(ang), std::cos(ang), 0, 0,
      0, 1;
  HeartMesh moved = mesh;
  for (auto& v : moved.vertices) v = rot * v + Eigen::Vector3d(5, -3, 2);
  const ManifoldEmbedding b = ManifoldEmbedding::build(moved, 8);

  REQUIRE(a.size() == b.size());
  const Eigen::MatrixXd& za = a.latent();
  const Eigen::MatrixXd& zb = b.latent();
  for (int i = 0; i < a.size(); ++i) {
    for (int j = i + 1; j < a.size(); ++j) {
      CHECK((za.row(i) - za.row(j)).norm() ==
            doctest::Approx((zb.row(i) - zb.row(j)).norm()).epsilon(1e-6));
    }
  }
}

TEST_CASE("nearest_node: stored points, clamping, exhaustive agreement") {
  const HeartMesh mesh =
      generate_ellipsoid_shell(10, 10, {20, 20, 40}, 6, 2, 33);
  const ManifoldEmbedding emb = ManifoldEmbedding::build(mesh, 8);
  REQUIRE(emb.size() == 100);

  // a stored latent point returns its own vertex
  for (int r = 0; r < emb.size(); r += 7) {
    CHECK(emb.nearest_node(emb.latent().row(r).transpose()) ==
          emb.vertex_ids()[r]);
  }

  // far outside the bounds: same answer as the clamped query
  const Eigen::Vector2d far(1e6, -1e6);
  CHECK(emb.nearest_node(far) == emb.nearest_node(emb.clamp(far)));

  // 1000 random queries against an exhaustive scan over latent rows
  std::vector<Eigen::Vector2d> latent_pts;
  for (int r = 0; r < emb.size(); ++r) {
    latent_pts.push_back(emb.latent().row(r).transpose());
  }
  Rng rng(3);
  const Eigen::Vector2d lo = emb.latent_lo(), hi = emb.latent_hi();
  for (int q = 0; q < 1000; ++q) {
    Eigen::Vector2d z(rng.uniform(lo[0], hi[0]), rng.uniform(lo[1], hi[1]));
    const int row = exhaustive_nearest<2>(latent_pts, z);
    CHECK(emb.nearest_node(z) == emb.vertex_ids()[row]);
  }
}

TEST_CASE("reconstruction_error: identity round trip on the shell") {
  const HeartMesh mesh =
      generate_ellipsoid_shell(10, 10, {20, 20, 40}, 6, 2, 1);
  const ManifoldEmbedding emb = ManifoldEmbedding::build(mesh, 16);
  const ReconstructionStats stats = reconstruction_error(emb, mesh);
  CHECK(stats.identity_fraction == 1.0);
  CHECK(stats.mean_error_mm == 0.0);
}

TEST_CASE("reconstruction_error: duplicated latent points degrade gracefully") {
  const HeartMesh mesh =
      generate_ellipsoid_shell(8, 8, {20, 20, 40}, 6, 2, 2);
  const auto endo = mesh.endocardial_vertices();
  Eigen::MatrixXd latent(endo.size(), 2);
  Rng rng(9);
  for (int i = 0; i < latent.rows(); ++i) {
    latent(i, 0) = rng.uniform(0, 1);
    latent(i, 1) = rng.uniform(0, 1);
  }
  latent.row(5) = latent.row(2);  // duplicate -> vertex 5 cannot round-trip
  const ManifoldEmbedding emb = ManifoldEmbedding::from_latent(endo, latent);
  const ReconstructionStats stats = reconstruction_error(emb, mesh);
  CHECK(stats.identity_fraction < 1.0);
  CHECK(stats.mean_error_mm > 0.0);
}

TEST_CASE("embedding_csv: header plus one row per vertex") {
  const HeartMesh mesh = generate_ellipsoid_shell(6, 6, {20, 20, 40}, 6, 2, 4);
  const ManifoldEmbedding emb = ManifoldEmbedding::build(mesh, 6);
  const std::string csv = embedding_csv(emb);
  CHECK(csv.rfind("vertex_id,z1,z2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == emb.size() + 1);
}
