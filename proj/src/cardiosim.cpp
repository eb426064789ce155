#include "cardioinfer/cardiosim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <stdexcept>

#include "cardioinfer/csv.hpp"

namespace cardioinfer {

const std::array<const char*, kNumLeads> kLeadNames = {
    "I", "II", "III", "aVR", "aVL", "aVF",
    "V1", "V2", "V3", "V4", "V5", "V6"};

const std::array<const char*, kNumElectrodes> kElectrodeNames = {
    "RA", "LA", "LL", "V1", "V2", "V3", "V4", "V5", "V6"};

std::pair<double, double> ParameterSpace::bounds(int d) const {
  if (d < 0 || d >= dim()) {
    throw std::invalid_argument("parameter dimension out of range");
  }
  if (d < 2) return {0.5 * endo_reference[d], 1.5 * endo_reference[d]};
  if (d < 5) return {0.5 * aniso_reference, 1.5 * aniso_reference};
  const int axis = (d - 5) % 2;
  return {latent_lo[axis], latent_hi[axis]};
}

ParameterSpace ParameterSpace::for_embedding(const ManifoldEmbedding& emb,
                                             int n_stimuli) {
  ParameterSpace space;
  space.n_stimuli = n_stimuli;
  space.latent_lo = emb.latent_lo();
  space.latent_hi = emb.latent_hi();
  space.validate();
  return space;
}

void ParameterSpace::validate() const {
  if (n_stimuli < 1) {
    throw ValidationError("parameter space needs at least one stimulus");
  }
  if (!(endo_reference.minCoeff() > 0.0) || !(aniso_reference > 0.0)) {
    throw ValidationError("reference velocities must be positive");
  }
  for (int a = 0; a < 2; ++a) {
    if (!(latent_lo[a] < latent_hi[a])) {
      throw ValidationError("latent bounds must satisfy lo < hi");
    }
  }
}

Conductivities conductivities_from_theta(const ParameterSpace& space,
                                         const Eigen::VectorXd& theta) {
  if (theta.size() != space.dim()) {
    throw std::invalid_argument("theta dimension mismatch");
  }
  Conductivities c;
  c.endo = theta.segment<2>(0);
  c.aniso = theta.segment<3>(2);
  return c;
}

std::vector<int> stimulus_vertices(const ParameterSpace& space,
                                   const Eigen::VectorXd& theta,
                                   const ManifoldEmbedding& emb) {
  if (theta.size() != space.dim()) {
    throw std::invalid_argument("theta dimension mismatch");
  }
  std::vector<int> out(space.n_stimuli);
  for (int s = 0; s < space.n_stimuli; ++s) {
    out[s] = emb.nearest_node(theta.segment<2>(5 + 2 * s));
  }
  return out;
}

ActivationMap activation_times(const ConductionGraph& graph,
                               const std::vector<int>& stimuli) {
  const int n = graph.n_vertices();
  if (stimuli.empty()) {
    throw std::invalid_argument("activation_times needs at least one stimulus");
  }
  for (int s : stimuli) {
    if (s < 0 || s >= n) {
      throw std::invalid_argument("stimulus vertex out of range");
    }
  }

  ActivationMap act;
  act.tau_ms =
      Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : stimuli) {
    if (act.tau_ms[s] > 0.0) {
      act.tau_ms[s] = 0.0;
      heap.emplace(0.0, s);
    }
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > act.tau_ms[v]) continue;
    for (const auto& arc : graph.adj[v]) {
      const double nd = d + arc.time_ms;
      if (nd < act.tau_ms[arc.to]) {
        act.tau_ms[arc.to] = nd;
        heap.emplace(nd, arc.to);
      }
    }
  }
  return act;
}

LeadConfig LeadConfig::default_torso() {
  LeadConfig cfg;
  cfg.electrodes = {
      Eigen::Vector3d{-140.0, 60.0, 100.0},  // RA
      Eigen::Vector3d{140.0, 60.0, 100.0},   // LA
      Eigen::Vector3d{30.0, 40.0, -220.0},   // LL
      Eigen::Vector3d{-30.0, 90.0, 10.0},    // V1
      Eigen::Vector3d{10.0, 95.0, 5.0},      // V2
      Eigen::Vector3d{40.0, 90.0, -10.0},    // V3
      Eigen::Vector3d{70.0, 80.0, -25.0},    // V4
      Eigen::Vector3d{95.0, 60.0, -30.0},    // V5
      Eigen::Vector3d{110.0, 30.0, -35.0},   // V6
  };
  return cfg;
}

EcgTrace synthesize_ecg(const HeartMesh& mesh, const ActivationMap& act,
                        const LeadConfig& cfg) {
  const int n = mesh.n_vertices();
  if (act.tau_ms.size() != n) {
    throw std::invalid_argument("activation map does not match mesh");
  }
  if (!act.tau_ms.allFinite() || act.tau_ms.minCoeff() < 0.0) {
    throw ValidationError("activation map must be finite and non-negative");
  }
  const double sigma = cfg.template_sigma_ms;
  const int T = cfg.n_samples();
  if (T < 1 || cfg.dt_ms <= 0.0 || sigma <= 0.0) {
    throw ConfigError("ECG window needs positive duration, dt and sigma");
  }
  const double needed = act.tau_ms.maxCoeff() + 4.0 * sigma;
  if (cfg.duration_ms < needed) {
    throw ConfigError("ECG window of " + std::to_string(cfg.duration_ms) +
                      " ms is shorter than the activation span of " +
                      std::to_string(needed) + " ms");
  }

  // Electrode potentials phi_e(t) = sum_v w(e,v) s(t - tau_v).
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(kNumElectrodes, T);
  const double inv_s2 = 1.0 / (sigma * sigma);
  for (int e = 0; e < kNumElectrodes; ++e) {
    const Eigen::Vector3d& xe = cfg.electrodes[e];
    for (int v = 0; v < n; ++v) {
      const double d2 = (xe - mesh.vertices[v]).squaredNorm();
      const double w = 1.0 / std::max(d2, cfg.weight_floor_mm2);
      const double tau = act.tau_ms[v];
      for (int k = 0; k < T; ++k) {
        const double t = k * cfg.dt_ms - tau;
        phi(e, k) += w * t * inv_s2 * std::exp(-0.5 * t * t * inv_s2);
      }
    }
  }

  const auto ra = phi.row(0), la = phi.row(1), ll = phi.row(2);
  EcgTrace trace;
  trace.dt_ms = cfg.dt_ms;
  trace.leads.resize(kNumLeads, T);
  trace.leads.row(0) = la - ra;                    // I
  trace.leads.row(1) = ll - ra;                    // II
  trace.leads.row(2) = ll - la;                    // III
  trace.leads.row(3) = ra - (la + ll) / 2.0;       // aVR
  trace.leads.row(4) = la - (ra + ll) / 2.0;       // aVL
  trace.leads.row(5) = ll - (ra + la) / 2.0;       // aVF
  const Eigen::RowVectorXd wct = (ra + la + ll) / 3.0;
  for (int i = 0; i < 6; ++i) {
    trace.leads.row(6 + i) = phi.row(3 + i) - wct;
  }
  return trace;
}

EcgTrace simulate(const Eigen::VectorXd& theta, const HeartMesh& mesh,
                  const ManifoldEmbedding& emb, const ParameterSpace& space,
                  const LeadConfig& cfg, bool* clamped) {
  if (theta.size() != space.dim()) {
    throw std::invalid_argument("theta dimension mismatch");
  }
  Eigen::VectorXd t = theta;
  bool any_clamped = false;
  for (int d = 0; d < space.dim(); ++d) {
    const auto [lo, hi] = space.bounds(d);
    const double c = std::clamp(t[d], lo, hi);
    if (c != t[d]) {
      t[d] = c;
      any_clamped = true;
    }
  }
  if (clamped != nullptr) *clamped = any_clamped;

  const Conductivities c = conductivities_from_theta(space, t);
  const std::vector<int> stimuli = stimulus_vertices(space, t, emb);
  const ConductionGraph graph = build_conduction_graph(mesh, c);
  const ActivationMap act = activation_times(graph, stimuli);
  return synthesize_ecg(mesh, act, cfg);
}

double ecg_mse(const EcgTrace& a, const EcgTrace& b) {
  if (a.leads.rows() != b.leads.rows() || a.leads.cols() != b.leads.cols() ||
      a.dt_ms != b.dt_ms) {
    throw std::invalid_argument("ECG traces have mismatched shapes");
  }
  return (a.leads - b.leads).array().square().mean();
}

double ecg_peak_to_peak(const EcgTrace& trace) {
  return trace.leads.maxCoeff() - trace.leads.minCoeff();
}

std::string ecg_csv(const EcgTrace& trace) {
  std::string out = "t_ms";
  for (const char* name : kLeadNames) {
    out += ",";
    out += name;
  }
  out += "\n";
  char buf[48];
  for (int k = 0; k < trace.n_samples(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9g", k * trace.dt_ms);
    out += buf;
    for (int l = 0; l < kNumLeads; ++l) {
      std::snprintf(buf, sizeof(buf), ",%.12g", trace.leads(l, k));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

EcgTrace ecg_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  if (table.n_cols() != kNumLeads + 1 || table.header[0] != "t_ms") {
    throw ParseError("ECG CSV must have columns t_ms plus the 12 leads");
  }
  for (int l = 0; l < kNumLeads; ++l) {
    if (table.header[l + 1] != kLeadNames[l]) {
      throw ParseError("ECG CSV lead order must be " +
                       std::string("I,II,III,aVR,aVL,aVF,V1..V6"));
    }
  }
  if (table.n_rows() < 1) throw ParseError("ECG CSV has no samples");
  EcgTrace trace;
  trace.dt_ms =
      table.n_rows() > 1 ? table.rows[1][0] - table.rows[0][0] : 1.0;
  trace.leads.resize(kNumLeads, table.n_rows());
  for (int k = 0; k < table.n_rows(); ++k) {
    for (int l = 0; l < kNumLeads; ++l) {
      trace.leads(l, k) = table.rows[k][l + 1];
    }
  }
  return trace;
}

}  // namespace cardioinfer
