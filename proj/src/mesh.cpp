#include "cardioinfer/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "cardioinfer/rng.hpp"

namespace cardioinfer {

const char* to_string(Layer l) {
  switch (l) {
    case Layer::Endo: return "endo";
    case Layer::Myo: return "myo";
    case Layer::Epi: return "epi";
  }
  return "?";
}

const char* to_string(FiberAxis a) {
  switch (a) {
    case FiberAxis::Fiber: return "fiber";
    case FiberAxis::Sheet: return "sheet";
    case FiberAxis::Normal: return "normal";
  }
  return "?";
}

std::vector<int> HeartMesh::endocardial_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < n_vertices(); ++v) {
    if (layer[v] == Layer::Endo) out.push_back(v);
  }
  return out;
}

void validate(const HeartMesh& mesh) {
  const int n = mesh.n_vertices();
  if (n == 0) throw ValidationError("mesh has no vertices");
  if (static_cast<int>(mesh.layer.size()) != n) {
    throw ValidationError("mesh layer labels do not match vertex count");
  }
  for (int v = 0; v < n; ++v) {
    if (!mesh.vertices[v].allFinite()) {
      throw ValidationError("vertex " + std::to_string(v) +
                            " has a non-finite coordinate");
    }
  }
  std::vector<std::vector<int>> adj(n);
  for (std::size_t k = 0; k < mesh.edges.size(); ++k) {
    const MeshEdge& e = mesh.edges[k];
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) {
      throw ValidationError("edge " + std::to_string(k) +
                            " references a vertex out of range");
    }
    if (e.a == e.b) {
      throw ValidationError("edge " + std::to_string(k) + " is a self-loop");
    }
    if (!(mesh.edge_length(e) > 0.0)) {
      throw ValidationError("edge " + std::to_string(k) +
                            " has non-positive length");
    }
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  if (mesh.endocardial_vertices().empty()) {
    throw ValidationError("mesh has no endocardial vertices");
  }

  std::vector<char> seen(n, 0);
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  if (reached != n) {
    throw ValidationError("mesh is disconnected: " + std::to_string(reached) +
                          " of " + std::to_string(n) +
                          " vertices reachable from vertex 0");
  }
}

void Conductivities::validate() const {
  if (!(endo[0] > 0.0) || !(endo[1] > 0.0) || !(aniso[0] > 0.0) ||
      !(aniso[1] > 0.0) || !(aniso[2] > 0.0)) {
    throw ValidationError("conduction velocities must be strictly positive");
  }
  if (!(aniso[0] >= aniso[1] && aniso[1] >= aniso[2])) {
    throw ValidationError(
        "anisotropic velocities must satisfy v_fiber >= v_sheet >= v_normal");
  }
  if (!(endo.minCoeff() >= aniso[0])) {
    throw ValidationError(
        "endocardial velocities must dominate the fiber velocity");
  }
}

HeartMesh generate_ellipsoid_shell(int n_theta, int n_phi,
                                   const Eigen::Vector3d& inner_radii_mm,
                                   double wall_thickness_mm, int n_layers,
                                   std::uint64_t seed) {
  if (n_theta < 4 || n_phi < 4 || n_layers < 2) {
    throw std::invalid_argument(
        "ellipsoid shell needs n_theta >= 4, n_phi >= 4, n_layers >= 2");
  }
  if (!(inner_radii_mm.minCoeff() > 0.0) || !(wall_thickness_mm > 0.0)) {
    throw std::invalid_argument(
        "ellipsoid shell needs positive radii and wall thickness");
  }

  // Open top: the polar angle runs from the truncation ring down to just
  // short of the apex so no ring degenerates to a point.
  const double theta_lo = 0.35 * M_PI;
  const double theta_hi = 0.95 * M_PI;

  HeartMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n_theta) * n_phi * n_layers);
  mesh.layer.reserve(mesh.vertices.capacity());

  Rng rng(seed);
  const double circ_spacing =
      2.0 * M_PI * inner_radii_mm.head<2>().minCoeff() * std::sin(theta_lo) /
      n_phi;
  const double jitter = 0.02 * circ_spacing;

  for (int l = 0; l < n_layers; ++l) {
    const double t = static_cast<double>(l) / (n_layers - 1);
    const Eigen::Vector3d radii =
        inner_radii_mm + Eigen::Vector3d::Constant(t * wall_thickness_mm);
    for (int i = 0; i < n_theta; ++i) {
      const double theta =
          theta_lo + (i + 0.5) * (theta_hi - theta_lo) / n_theta;
      for (int j = 0; j < n_phi; ++j) {
        const double phi = 2.0 * M_PI * j / n_phi;
        Eigen::Vector3d p(radii[0] * std::sin(theta) * std::cos(phi),
                          radii[1] * std::sin(theta) * std::sin(phi),
                          radii[2] * std::cos(theta));
        for (int d = 0; d < 3; ++d) p[d] += rng.uniform(-jitter, jitter);
        mesh.vertices.push_back(p);
        mesh.layer.push_back(l == 0 ? Layer::Endo
                             : l == n_layers - 1 ? Layer::Epi
                                                 : Layer::Myo);
      }
    }
  }

  const auto id = [&](int l, int i, int j) {
    return (l * n_theta + i) * n_phi + j;
  };
  for (int l = 0; l < n_layers; ++l) {
    for (int i = 0; i < n_theta; ++i) {
      for (int j = 0; j < n_phi; ++j) {
        mesh.edges.push_back(
            {id(l, i, j), id(l, i, (j + 1) % n_phi), FiberAxis::Fiber});
        if (i + 1 < n_theta) {
          mesh.edges.push_back(
              {id(l, i, j), id(l, i + 1, j), FiberAxis::Sheet});
        }
        if (l + 1 < n_layers) {
          mesh.edges.push_back(
              {id(l, i, j), id(l + 1, i, j), FiberAxis::Normal});
        }
      }
    }
  }

  validate(mesh);
  return mesh;
}

namespace {

// Strips a trailing comment and surrounding whitespace.
std::string clean_line(const std::string& line) {
  std::string s = line;
  const auto hash = s.find('#');
  if (hash != std::string::npos) s.erase(hash);
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw ParseError("mesh line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

HeartMesh load_mesh(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  HeartMesh mesh;
  std::vector<std::pair<int, int>> edge_lines;  // (edge index, line number)

  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = clean_line(line);
    if (s.empty()) continue;
    if (!header_seen) {
      if (s != "cardiomesh 1") parse_fail(line_no, "expected 'cardiomesh 1'");
      header_seen = true;
      continue;
    }
    std::istringstream ls(s);
    std::string kind;
    ls >> kind;
    if (kind == "v") {
      double x, y, z;
      std::string label;
      if (!(ls >> x >> y >> z >> label)) {
        parse_fail(line_no, "expected 'v x y z layer'");
      }
      Layer layer;
      if (label == "endo") layer = Layer::Endo;
      else if (label == "myo") layer = Layer::Myo;
      else if (label == "epi") layer = Layer::Epi;
      else parse_fail(line_no, "unknown layer label '" + label + "'");
      mesh.vertices.emplace_back(x, y, z);
      mesh.layer.push_back(layer);
    } else if (kind == "e") {
      int a, b;
      std::string axis_label;
      if (!(ls >> a >> b >> axis_label)) {
        parse_fail(line_no, "expected 'e i j axis'");
      }
      FiberAxis axis;
      if (axis_label == "fiber") axis = FiberAxis::Fiber;
      else if (axis_label == "sheet") axis = FiberAxis::Sheet;
      else if (axis_label == "normal") axis = FiberAxis::Normal;
      else parse_fail(line_no, "unknown axis label '" + axis_label + "'");
      mesh.edges.push_back({a, b, axis});
      edge_lines.emplace_back(static_cast<int>(mesh.edges.size()) - 1,
                              line_no);
    } else {
      parse_fail(line_no, "unknown record '" + kind + "'");
    }
    std::string extra;
    if (ls >> extra) parse_fail(line_no, "trailing tokens");
  }
  if (!header_seen) throw ParseError("mesh line 1: missing header");

  const int n = mesh.n_vertices();
  for (const auto& [k, at_line] : edge_lines) {
    const MeshEdge& e = mesh.edges[k];
    if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n) {
      parse_fail(at_line, "edge index out of range (mesh has " +
                              std::to_string(n) + " vertices)");
    }
  }

  validate(mesh);
  return mesh;
}

std::string serialize_mesh(const HeartMesh& mesh) {
  std::string out = "cardiomesh 1\n";
  char buf[160];
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Eigen::Vector3d& p = mesh.vertices[v];
    std::snprintf(buf, sizeof(buf), "v %.6f %.6f %.6f %s\n", p[0], p[1], p[2],
                  to_string(mesh.layer[v]));
    out += buf;
  }
  for (const MeshEdge& e : mesh.edges) {
    std::snprintf(buf, sizeof(buf), "e %d %d %s\n", e.a, e.b,
                  to_string(e.axis));
    out += buf;
  }
  return out;
}

ConductionGraph build_conduction_graph(const HeartMesh& mesh,
                                       const Conductivities& c) {
  c.validate();
  ConductionGraph g;
  g.adj.resize(mesh.n_vertices());
  for (const MeshEdge& e : mesh.edges) {
    double velocity;
    if (mesh.is_endo(e.a) && mesh.is_endo(e.b)) {
      velocity = e.axis == FiberAxis::Fiber ? c.endo[0] : c.endo[1];
    } else {
      velocity = c.aniso[static_cast<int>(e.axis)];
    }
    const double time_ms = mesh.edge_length(e) / velocity;
    g.adj[e.a].push_back({e.b, time_ms});
    g.adj[e.b].push_back({e.a, time_ms});
  }
  return g;
}

}  // namespace cardioinfer
