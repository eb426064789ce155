#include "cardioinfer/vi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cardioinfer/rng.hpp"

namespace cardioinfer {

void GaussianPosterior::validate() const {
  if (mu.size() != sigma.size() || mu.size() == 0) {
    throw std::invalid_argument("posterior mu/sigma sizes must match");
  }
  for (int d = 0; d < sigma.size(); ++d) {
    if (!(sigma[d] > 0.0)) {
      throw std::invalid_argument("posterior sigma must be strictly positive");
    }
  }
}

PriorSpec PriorSpec::unit_box(int dim) {
  PriorSpec prior;
  prior.mean = Eigen::VectorXd::Constant(dim, 0.5);
  prior.std = Eigen::VectorXd::Constant(dim, 0.25);
  return prior;
}

void PriorSpec::validate() const {
  if (mean.size() != std.size() || mean.size() == 0) {
    throw std::invalid_argument("prior mean/std sizes must match");
  }
  for (int d = 0; d < std.size(); ++d) {
    if (!(std[d] > 0.0)) {
      throw std::invalid_argument("prior std must be strictly positive");
    }
  }
}

double kl_diag_gaussians(const GaussianPosterior& q, const PriorSpec& p) {
  q.validate();
  p.validate();
  if (q.mu.size() != p.mean.size()) {
    throw std::invalid_argument("KL dimension mismatch");
  }
  double kl = 0.0;
  for (int d = 0; d < q.mu.size(); ++d) {
    const double vq = q.sigma[d] * q.sigma[d];
    const double vp = p.std[d] * p.std[d];
    const double dm = q.mu[d] - p.mean[d];
    kl += std::log(p.std[d] / q.sigma[d]) + (vq + dm * dm) / (2.0 * vp) - 0.5;
  }
  return kl;
}

double log_likelihood(const EcgTrace& obs, const EcgTrace& sim,
                      double noise_std) {
  if (obs.leads.rows() != sim.leads.rows() ||
      obs.leads.cols() != sim.leads.cols() || obs.dt_ms != sim.dt_ms) {
    throw std::invalid_argument("log_likelihood trace shape mismatch");
  }
  if (!(noise_std > 0.0)) {
    throw std::invalid_argument("log_likelihood needs noise_std > 0");
  }
  const double d = static_cast<double>(obs.leads.size());
  const double ss = (obs.leads - sim.leads).squaredNorm();
  return -0.5 * d * std::log(2.0 * M_PI * noise_std * noise_std) -
         ss / (2.0 * noise_std * noise_std);
}

double elbo_estimate(const GaussianPosterior& q, const PriorSpec& prior,
                     const RawSimulator& sim, const EcgTrace& obs,
                     double noise_std, int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw std::invalid_argument("elbo_estimate needs n_mc >= 1");
  const double kl = kl_diag_gaussians(q, prior);
  const int p = static_cast<int>(q.mu.size());

  Rng rng(derive_seed(seed, /*tag=*/0x656c626fu));
  double acc = 0.0;
  Eigen::VectorXd draw(p);
  for (int k = 0; k < n_mc; ++k) {
    for (int d = 0; d < p; ++d) {
      double v = q.mu[d] + q.sigma[d] * rng.gaussian();
      for (int attempt = 0; attempt < 100 && (v < 0.0 || v > 1.0);
           ++attempt) {
        v = q.mu[d] + q.sigma[d] * rng.gaussian();
      }
      draw[d] = std::clamp(v, 0.0, 1.0);
    }
    acc += log_likelihood(obs, sim(draw), noise_std);
  }
  return acc / n_mc - kl;
}

MeanStageResult fit_mean_stage(const EcgTrace& obs, const RawSimulator& sim,
                               const ParameterSpace& space,
                               const BoConfig& cfg) {
  const int p = space.dim();
  Eigen::MatrixX2d unit(p, 2);
  unit.col(0).setZero();
  unit.col(1).setOnes();

  MeanStageResult result;
  result.trace = bo_minimize_box(
      [&](const Eigen::VectorXd& raw) { return ecg_mse(obs, sim(raw)); },
      unit, cfg);
  for (BoRecord& rec : result.trace.iterations) {
    rec.theta = ordered_transform(rec.raw, space);
  }
  result.trace.best_theta = ordered_transform(result.trace.best_raw, space);
  result.mu = result.trace.best_raw;
  return result;
}

VarianceStageResult fit_variance_stage(const Eigen::VectorXd& mu,
                                       const EcgTrace& obs,
                                       const PriorSpec& prior,
                                       const RawSimulator& sim,
                                       const ParameterSpace& space,
                                       const BoConfig& cfg, int n_mc,
                                       double noise_std) {
  const int p = space.dim();
  if (mu.size() != p) {
    throw std::invalid_argument("fit_variance_stage mu dimension mismatch");
  }
  // Raw coordinates live on the unit box, so sigma is searched in
  // [1e-3, range / 2] = [1e-3, 0.5], log-scaled.
  Eigen::MatrixX2d bounds(p, 2);
  bounds.col(0).setConstant(std::log(1e-3));
  bounds.col(1).setConstant(std::log(0.5));

  const std::uint64_t mc_seed = derive_seed(cfg.seed, /*tag=*/0x6d63u);
  const auto objective = [&](const Eigen::VectorXd& log_sigma) {
    GaussianPosterior q{mu, log_sigma.array().exp()};
    return -elbo_estimate(q, prior, sim, obs, noise_std, n_mc, mc_seed);
  };

  VarianceStageResult result;
  result.trace = bo_minimize_box(objective, bounds, cfg);
  for (BoRecord& rec : result.trace.iterations) {
    rec.theta = rec.raw.array().exp();
  }
  result.trace.best_theta = result.trace.best_raw.array().exp();
  result.posterior = {mu, result.trace.best_raw.array().exp()};
  return result;
}

}  // namespace cardioinfer
