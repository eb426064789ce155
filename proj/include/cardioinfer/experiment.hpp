#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "cardioinfer/bayesopt.hpp"
#include "cardioinfer/cardiosim.hpp"
#include "cardioinfer/vi.hpp"

namespace cardioinfer {

struct SyntheticMeshSpec {
  int n_theta = 13;
  int n_phi = 13;
  Eigen::Vector3d inner_radii{20.0, 20.0, 40.0};
  double wall_thickness = 6.0;
  int n_layers = 3;
  std::uint64_t seed = 1;
};

/// One reproducible experiment: mesh source, electrode geometry, parameter
/// space, per-stage BO budgets and the output directory. The seed is
/// mandatory; every derived random stream is pinned by it.
struct RunConfig {
  std::string mesh_file;  // empty -> synthetic shell
  SyntheticMeshSpec synthetic;
  std::array<Eigen::Vector3d, kNumElectrodes> electrodes;

  int n_stimuli = 6;
  Eigen::Vector2d endo_reference{2.0, 2.0};
  double aniso_reference = 0.6;

  double duration_ms = 200.0;
  double dt_ms = 1.0;
  double template_sigma_ms = 5.0;

  int isomap_k = 16;
  double noise_std = 0.0;  // <= 0 -> 5% of the observed peak-to-peak
  double observation_noise_std = 0.0;
  int n_mc = 8;

  BoConfig stage1;  // budget 0 -> 10 p, n_init 0 -> 2 p
  BoConfig stage2;

  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out_dir;

  RunConfig();

  /// Parses a JSON config; unknown keys are rejected, a missing seed is a
  /// ConfigError. See README for the schema.
  static RunConfig from_json_text(const std::string& text);

  /// Canonical JSON of the effective config (defaults resolved); hashed
  /// into the run manifest.
  std::string canonical_json() const;
};

HeartMesh make_mesh(const RunConfig& cfg);
LeadConfig make_lead_config(const RunConfig& cfg);

struct RecoveryReport {
  double prior_mean_mse = 0.0;
  double final_mse = 0.0;
  Eigen::VectorXd theta_star;  // constrained ground truth
  Eigen::VectorXd theta_fit;   // constrained stage-1 result
  Eigen::VectorXd abs_error;   // |theta_fit - theta_star| per dimension
  Eigen::VectorXd mu_raw;
  GaussianPosterior posterior;
  double wall_clock_s = 0.0;  // written to timing.txt, not the manifest
};

/// Self-consistency recovery: samples a ground truth theta* from the
/// prior, simulates the observation (plus optional Gaussian noise), runs
/// the two-stage fit and writes traces, ECGs, posterior summary, report
/// and manifest into cfg.out_dir.
RecoveryReport run_recovery(const RunConfig& cfg);

struct ComparisonResult {
  BoTrace manifold;
  BoTrace cartesian;
};

/// Runs stage 1 twice at equal budget and seed: stimulus positions on the
/// 2D manifold versus raw 3D Cartesian coordinates snapped to the nearest
/// endocardial vertex. Writes both cost curves and the embedding scatter.
ComparisonResult run_manifold_comparison(const RunConfig& cfg);

/// `embed` verb: writes embedding.csv into cfg.out_dir.
void write_embedding(const RunConfig& cfg);

/// `simulate` verb: forward-simulates theta (constrained space; prior
/// mean when absent) and writes simulated_ecg.csv.
void write_simulation(const RunConfig& cfg,
                      const std::optional<Eigen::VectorXd>& theta);

/// Renders the SVG figures for a finished run directory: cost curve
/// (log-y best-so-far), embedding scatter, 12-panel ECG overlay. A pure
/// function of the CSVs: unchanged inputs give byte-identical SVGs.
/// Throws ConfigError naming the first missing/empty required CSV.
void emit_plots(const std::string& run_dir);

}  // namespace cardioinfer
