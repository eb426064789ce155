#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cardioinfer/common.hpp"

namespace cardioinfer {

enum class Layer { Endo, Myo, Epi };

/// Direction class of an edge, used to select the anisotropic conduction
/// velocity: circumferential edges follow the muscle fibers, longitudinal
/// edges the sheet direction, transmural edges the sheet normal.
enum class FiberAxis { Fiber, Sheet, Normal };

const char* to_string(Layer l);
const char* to_string(FiberAxis a);

struct MeshEdge {
  int a = 0;
  int b = 0;
  FiberAxis axis = FiberAxis::Fiber;
};

/// Anatomical prior: vertex positions in mm, layer label per vertex and a
/// wireframe of labeled edges. Immutable after construction.
struct HeartMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<MeshEdge> edges;
  std::vector<Layer> layer;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  bool is_endo(int v) const { return layer[v] == Layer::Endo; }

  /// Endocardial vertex indices in ascending order.
  std::vector<int> endocardial_vertices() const;

  double edge_length(const MeshEdge& e) const {
    return (vertices[e.a] - vertices[e.b]).norm();
  }
};

/// Checks all HeartMesh invariants: indices in range, connected graph,
/// non-empty endocardium, strictly positive edge lengths.
/// Throws ValidationError.
void validate(const HeartMesh& mesh);

/// Conduction velocities in mm/ms.
///
/// The endocardial layer (the Purkinje system stand-in) carries two
/// velocities, one for circumferential (fiber-class) and one for
/// longitudinal (sheet/normal-class) edges; the wall carries the ordered
/// anisotropic triple (v_fiber >= v_sheet >= v_normal).
struct Conductivities {
  Eigen::Vector2d endo{2.0, 2.0};       // circumferential, longitudinal
  Eigen::Vector3d aniso{0.6, 0.4, 0.3};  // fiber, sheet, normal

  /// Throws ValidationError unless all velocities are positive,
  /// the aniso triple is ordered, and both endo velocities dominate
  /// v_fiber.
  void validate() const;
};

/// Weighted adjacency: per-edge traversal time in ms.
struct ConductionGraph {
  struct Arc {
    int to;
    double time_ms;
  };
  std::vector<std::vector<Arc>> adj;

  int n_vertices() const { return static_cast<int>(adj.size()); }
};

/// Generates a truncated (open-top) ellipsoidal shell. Layer 0 is the
/// endocardium, the outermost layer the epicardium. Vertices get a small
/// seeded jitter (about 2% of the circumferential spacing) so the mesh is
/// generic rather than perfectly symmetric; topology and counts are
/// unaffected. Vertex count is n_theta * n_phi * n_layers.
HeartMesh generate_ellipsoid_shell(int n_theta, int n_phi,
                                   const Eigen::Vector3d& inner_radii_mm,
                                   double wall_thickness_mm, int n_layers,
                                   std::uint64_t seed);

/// Parses the line-oriented mesh format (see serialize_mesh). Throws
/// ParseError with a line number for malformed input and ValidationError
/// for structurally valid but disconnected/degenerate meshes.
HeartMesh load_mesh(const std::string& text);

/// Text form: header "cardiomesh 1", one "v x y z layer" line per vertex
/// (coordinates in mm, 6 decimal places), one "e i j axis" line per edge.
/// load_mesh(serialize_mesh(m)) reproduces m exactly at that precision.
std::string serialize_mesh(const HeartMesh& mesh);

/// Edge traversal time = euclidean length / velocity. Both endpoints
/// endocardial selects the endo velocity for the edge's axis class
/// (Fiber -> endo[0], otherwise endo[1]); any other edge selects the
/// aniso component for its class.
ConductionGraph build_conduction_graph(const HeartMesh& mesh,
                                       const Conductivities& c);

}  // namespace cardioinfer
