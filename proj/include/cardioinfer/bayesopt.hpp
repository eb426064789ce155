#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cardioinfer/cardiosim.hpp"
#include "cardioinfer/gp.hpp"
#include "cardioinfer/rng.hpp"

namespace cardioinfer {

enum class AcquisitionKind { EI, AugmentedEI };

struct BoConfig {
  int budget = 0;
  int n_init = 0;
  AcquisitionKind acquisition = AcquisitionKind::AugmentedEI;
  // Exploration offset in objective units. Nonzero values put an absolute
  // floor on the improvements EI can see, which stalls late-stage polishing
  // once best-so-far drops below xi; the offset is kept configurable for
  // noisy objectives but defaults to plain EI behaviour.
  double xi = 0.0;
  int n_acq_starts = 6;  // refined acquisition starts
  std::uint64_t seed = 0;
  // The surrogate is refit every iteration; its hyperparameters are
  // re-searched only every hyper_refit_period iterations (warm-started),
  // which keeps large budgets affordable.
  int hyper_refit_period = 5;
  HyperFitConfig hyper{.n_restarts = 2, .max_sweeps = 2, .golden_iters = 8};

  /// n_init >= 2 and n_init <= budget (equality degenerates to pure LHS).
  void validate(int dim) const;
};

struct BoRecord {
  Eigen::VectorXd raw;    // point in the unconstrained box
  Eigen::VectorXd theta;  // transformed (constrained) point
  double objective = 0.0;
  double best_so_far = 0.0;
};

struct BoTrace {
  std::vector<BoRecord> iterations;
  Eigen::VectorXd best_raw;
  Eigen::VectorXd best_theta;
  double best_value = 0.0;

  /// CSV export "iter,objective,best_so_far,theta_0..theta_{p-1}".
  std::string csv() const;
};

/// Latin hypercube design: per dimension exactly one uniform sample in
/// each of the n equal strata, strata permuted independently.
/// bounds is p x 2 (lo, hi per row). Deterministic per seed.
Eigen::MatrixXd latin_hypercube(int n, const Eigen::MatrixX2d& bounds,
                                std::uint64_t seed);

/// Maps a point of the unit box onto the constrained parameter space:
/// affine for the free dimensions, cumulative-decreasing construction for
/// the aniso triple (guarantees v_fiber >= v_sheet >= v_normal) and
/// sorted-stick construction for the per-stimulus first latent
/// coordinates (guarantees z1_1 <= ... <= z1_m). Surjective onto the
/// constrained set.
Eigen::VectorXd ordered_transform(const Eigen::VectorXd& raw,
                                  const ParameterSpace& space);

/// Right inverse of ordered_transform: ordered_transform(ordered_encode(t))
/// reproduces any constrained t.
Eigen::VectorXd ordered_encode(const Eigen::VectorXd& theta,
                               const ParameterSpace& space);

/// Expected improvement under minimization with incumbent `best`:
/// I = best - mu - xi, z = I/s, EI = I Phi(z) + s phi(z); max(I, 0) at
/// s = 0.
double expected_improvement(const GpModel& m, const Eigen::VectorXd& x,
                            double best, double xi);

/// EI against the effective incumbent u** = min_i(mu(x_i) + s(x_i)),
/// deflated by 1 - sigma_eps / sqrt(s^2(x) + sigma_eps^2). When the fitted
/// noise variance is below 1e-6 (standardized units) it reduces exactly to
/// EI with best = min observed target.
double augmented_ei(const GpModel& m, const Eigen::VectorXd& x, double xi);

/// Argmax of the acquisition over the box: a seeded uniform probe pool is
/// ranked and the best n_acq_starts candidates are refined by
/// coordinate-wise golden-section ascent. Deterministic per seed.
Eigen::VectorXd maximize_acquisition(
    const GpModel& m, const Eigen::MatrixX2d& bounds, const BoConfig& cfg,
    double best_observed, std::uint64_t seed);

/// Generic sequential BO driver on a box: LHS design, then
/// fit-hyperparams / fit / maximize-acquisition / evaluate until budget.
/// Non-finite objective values are recorded as penalized values (10x the
/// worst finite seen) and the run continues. The returned trace stores
/// raw == theta.
BoTrace bo_minimize_box(const std::function<double(const Eigen::VectorXd&)>& objective,
                        const Eigen::MatrixX2d& bounds, const BoConfig& cfg);

/// BO over the unit raw box of a ParameterSpace; every objective call
/// goes through ordered_transform, so all evaluated thetas satisfy the
/// ordering constraints. objective receives the constrained theta.
BoTrace bo_minimize(const std::function<double(const Eigen::VectorXd&)>& objective,
                    const ParameterSpace& space, const BoConfig& cfg);

}  // namespace cardioinfer
