#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "cardioinfer/common.hpp"

namespace cardioinfer {

/// Square-exponential kernel hyperparameters with per-dimension (ARD)
/// lengthscales. Targets are standardized inside GpModel, so signal_var
/// and noise_var are dimensionless.
struct Hyperparams {
  double signal_var = 1.0;
  Eigen::VectorXd lengthscales;  // one per input dimension, > 0
  double noise_var = 1e-6;

  void validate(int dim) const;
};

/// k(x, x') = signal_var * exp(-1/2 sum_d ((x_d - x'_d) / l_d)^2).
double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 const Hyperparams& h);

/// Gaussian-process regressor: Cholesky of K + noise_var I + jitter I on
/// standardized targets. Immutable after fit; predict is safe for
/// concurrent callers.
class GpModel {
 public:
  /// Factorizes the kernel matrix, escalating jitter x10 from 1e-8 up to
  /// 1e-2 until the Cholesky succeeds. Throws NumericalError if it still
  /// fails at the maximum.
  static GpModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Hyperparams& h);

  /// Posterior mean and variance at x, de-standardized. Variance is the
  /// latent-function variance (no observation noise) clamped at zero.
  std::pair<double, double> predict(const Eigen::VectorXd& x) const;

  /// -1/2 y'a - sum log diag(L) - n/2 log 2pi on the standardized targets.
  double log_marginal_likelihood() const;

  /// min over training inputs of mu(x_i) + c * s(x_i), de-standardized;
  /// the incumbent used by augmented EI. Lazy, cached for c = 0 and c = 1.
  double effective_best(double c = 1.0) const;

  const Eigen::MatrixXd& inputs() const { return X_; }
  const Eigen::VectorXd& targets() const { return y_raw_; }
  const Hyperparams& hyper() const { return hyper_; }
  int size() const { return static_cast<int>(X_.rows()); }
  int dim() const { return static_cast<int>(X_.cols()); }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  double jitter() const { return jitter_; }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_raw_;
  Eigen::VectorXd y_std_;  // standardized targets
  Hyperparams hyper_;
  Eigen::MatrixXd chol_;   // lower triangular L
  Eigen::VectorXd alpha_;  // (K + noise + jitter)^-1 y_std
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double jitter_ = 0.0;
  mutable std::optional<double> effective_best_c0_;
  mutable std::optional<double> effective_best_c1_;
};

/// Controls for the marginal-likelihood hyperparameter search.
struct HyperFitConfig {
  int n_restarts = 5;     // start 0 is the median-distance heuristic
  int max_sweeps = 10;    // coordinate sweeps per start
  int golden_iters = 10;  // golden-section iterations per coordinate
  double bracket_halfwidth = 2.0;  // log-space line-search bracket
  std::uint64_t seed = 0;
  std::vector<Hyperparams> extra_starts;  // e.g. warm starts

  // A start stops early only on a sweep with no accepted move, so a
  // converged result re-fit as the single start comes back unchanged.
};

/// Lengthscale initialization from per-dimension median pairwise
/// distances; also the fallback when every search start fails.
Hyperparams median_heuristic_hyperparams(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y);

/// Maximizes the log marginal likelihood over log-hyperparameters by
/// seeded multi-start coordinate search with golden-section line steps.
/// Box: l_d in [1e-2, 1e2] * range(X_d), signal_var in [1e-4, 1e2] and
/// noise_var in [1e-8, 1] times the standardized target variance.
/// Deterministic for a given config. Requires n >= 3.
Hyperparams fit_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const HyperFitConfig& cfg = {});

}  // namespace cardioinfer
