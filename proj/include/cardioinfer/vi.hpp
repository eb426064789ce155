#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "cardioinfer/bayesopt.hpp"
#include "cardioinfer/cardiosim.hpp"

namespace cardioinfer {

/// Diagonal-Gaussian variational posterior over the raw (pre-transform)
/// box coordinates.
struct GaussianPosterior {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;  // strictly positive

  void validate() const;
};

/// Independent Gaussian prior per raw dimension.
struct PriorSpec {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  /// Box-center prior on the unit box: mean 0.5, std 0.25 (= range / 4).
  static PriorSpec unit_box(int dim);

  void validate() const;
};

/// KL(q || p) of diagonal Gaussians, closed form; >= 0, zero iff q == p.
double kl_diag_gaussians(const GaussianPosterior& q, const PriorSpec& p);

/// iid Gaussian log-likelihood over all 12 * T samples:
/// -d/2 log(2 pi noise^2) - |obs - sim|^2 / (2 noise^2).
double log_likelihood(const EcgTrace& obs, const EcgTrace& sim,
                      double noise_std);

/// Simulator viewed from the raw box: callers bake ordered_transform and
/// the forward model into this.
using RawSimulator = std::function<EcgTrace(const Eigen::VectorXd& raw)>;

/// Monte Carlo ELBO: -KL(q, prior) + mean over n_mc draws from q
/// (truncated to the unit box by per-dimension redraw, clamped after 100
/// attempts) of log_likelihood(obs, sim(draw)). Deterministic per seed.
double elbo_estimate(const GaussianPosterior& q, const PriorSpec& prior,
                     const RawSimulator& sim, const EcgTrace& obs,
                     double noise_std, int n_mc, std::uint64_t seed);

struct MeanStageResult {
  Eigen::VectorXd mu;  // best raw point
  BoTrace trace;
};

/// Stage 1 of the two-stage fit: BO over the raw box minimizing
/// ecg_mse(obs, sim(raw)).
MeanStageResult fit_mean_stage(const EcgTrace& obs, const RawSimulator& sim,
                               const ParameterSpace& space,
                               const BoConfig& cfg);

struct VarianceStageResult {
  GaussianPosterior posterior;
  BoTrace trace;  // over log-sigma coordinates
};

/// Stage 2: mu fixed, BO over per-dimension log sigma in
/// [log 1e-3, log(range/2)] maximizing the ELBO (MC seed fixed per run so
/// the objective is deterministic).
VarianceStageResult fit_variance_stage(const Eigen::VectorXd& mu,
                                       const EcgTrace& obs,
                                       const PriorSpec& prior,
                                       const RawSimulator& sim,
                                       const ParameterSpace& space,
                                       const BoConfig& cfg, int n_mc,
                                       double noise_std);

}  // namespace cardioinfer
