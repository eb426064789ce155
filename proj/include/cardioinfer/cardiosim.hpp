#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "cardioinfer/manifold.hpp"
#include "cardioinfer/mesh.hpp"

namespace cardioinfer {

/// Search space of the simulator parameters theta.
///
/// Layout (constrained space, dimension 5 + 2 * n_stimuli):
///   [0]   endocardial velocity, circumferential (mm/ms)
///   [1]   endocardial velocity, longitudinal (mm/ms)
///   [2-4] anisotropic wall velocities v_fiber >= v_sheet >= v_normal,
///         sharing one range so the ordering constraint bites
///   then per stimulus site: (z1, z2) latent coordinates, with the z1
///   sequence ordered across sites.
///
/// Velocity bounds are reference * [0.5, 1.5]; latent bounds come from
/// the embedding. The default n_stimuli = 6 gives a 17-dimensional space.
struct ParameterSpace {
  int n_stimuli = 6;
  Eigen::Vector2d endo_reference{2.0, 2.0};
  double aniso_reference = 0.6;
  Eigen::Vector2d latent_lo{0, 0};
  Eigen::Vector2d latent_hi{1, 1};

  int dim() const { return 5 + 2 * n_stimuli; }

  /// (lo, hi) of constrained dimension d.
  std::pair<double, double> bounds(int d) const;

  static ParameterSpace for_embedding(const ManifoldEmbedding& emb,
                                      int n_stimuli = 6);

  void validate() const;
};

/// Slice theta into conduction velocities.
Conductivities conductivities_from_theta(const ParameterSpace& space,
                                         const Eigen::VectorXd& theta);

/// Map the latent stimulus coordinates of theta to mesh vertices through
/// the embedding lookup.
std::vector<int> stimulus_vertices(const ParameterSpace& space,
                                   const Eigen::VectorXd& theta,
                                   const ManifoldEmbedding& emb);

/// Per-vertex activation time in ms.
struct ActivationMap {
  Eigen::VectorXd tau_ms;
};

/// Multi-source Dijkstra over the conduction graph: tau(v) is the
/// earliest arrival from any stimulus. Duplicate stimuli are idempotent.
/// Throws std::invalid_argument for an empty stimulus set or an index out
/// of range.
ActivationMap activation_times(const ConductionGraph& graph,
                               const std::vector<int>& stimuli);

constexpr int kNumLeads = 12;
constexpr int kNumElectrodes = 9;  // RA, LA, LL, V1..V6

extern const std::array<const char*, kNumLeads> kLeadNames;
extern const std::array<const char*, kNumElectrodes> kElectrodeNames;

/// Electrode geometry and trace discretization.
struct LeadConfig {
  std::array<Eigen::Vector3d, kNumElectrodes> electrodes;
  double duration_ms = 200.0;
  double dt_ms = 1.0;
  double template_sigma_ms = 5.0;  // action-potential upstroke width
  double weight_floor_mm2 = 1.0;   // epsilon in w = 1 / max(d^2, epsilon)

  int n_samples() const {
    return static_cast<int>(duration_ms / dt_ms);
  }

  /// Nine electrodes on a synthetic torso around a heart at the origin.
  static LeadConfig default_torso();
};

/// 12 named leads by n_samples potentials (arbitrary units).
struct EcgTrace {
  Eigen::MatrixXd leads;  // kNumLeads x T, row order = kLeadNames
  double dt_ms = 1.0;

  int n_samples() const { return static_cast<int>(leads.cols()); }
};

/// Electrode potentials phi_e(t) = sum_v w(e,v) s(t - tau_v) with
/// inverse-square weights w(e,v) = 1 / max(|x_e - x_v|^2, epsilon) and
/// the Gaussian-derivative upstroke s(t) = (t/sigma^2) exp(-t^2/(2 sigma^2)).
/// Limb leads follow Einthoven, augmented leads Goldberger, and V1-V6 are
/// referenced to the Wilson central terminal, so the lead identities
/// I + III = II and aVR + aVL + aVF = 0 hold exactly.
/// Throws ConfigError when duration_ms < max(tau) + 4 sigma.
EcgTrace synthesize_ecg(const HeartMesh& mesh, const ActivationMap& act,
                        const LeadConfig& cfg);

/// Full forward model f(theta): latent stimulus coords -> nearest mesh
/// vertices -> conduction graph -> activation times -> ECG. Deterministic;
/// theta components outside bounds are clamped (sets *clamped when given).
EcgTrace simulate(const Eigen::VectorXd& theta, const HeartMesh& mesh,
                  const ManifoldEmbedding& emb, const ParameterSpace& space,
                  const LeadConfig& cfg, bool* clamped = nullptr);

/// Mean squared difference over all 12 * T samples.
/// Throws std::invalid_argument on shape mismatch.
double ecg_mse(const EcgTrace& a, const EcgTrace& b);

/// Peak-to-peak amplitude over all leads.
double ecg_peak_to_peak(const EcgTrace& trace);

/// CSV export "t_ms,I,II,III,aVR,aVL,aVF,V1,...,V6" with header.
std::string ecg_csv(const EcgTrace& trace);

/// Inverse of ecg_csv. Throws ParseError.
EcgTrace ecg_from_csv(const std::string& text);

}  // namespace cardioinfer
