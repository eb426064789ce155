#include "cardioinfer/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "cardioinfer/common.hpp"
#include "cardioinfer/coordinate_search.hpp"

namespace cardioinfer {

namespace {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Penalty for a non-finite objective value: strictly worse than the worst
// finite value seen so far (which may be negative), or a large constant
// when nothing finite exists yet.
double penalized_value(bool any_finite, double worst_finite) {
  if (!any_finite) return 1e9;
  if (worst_finite > 0.0) return 10.0 * worst_finite;
  return worst_finite + 9.0 * std::abs(worst_finite) + 1.0;
}

}  // namespace

void BoConfig::validate(int dim) const {
  if (dim < 1) throw ConfigError("BO needs at least one dimension");
  if (budget < 1) throw ConfigError("BO budget must be at least 1");
  if (n_init < 2) throw ConfigError("BO n_init must be at least 2");
  if (n_init > budget) {
    throw ConfigError("BO n_init must not exceed the budget");
  }
  if (!(xi >= 0.0)) throw ConfigError("BO xi must be non-negative");
  if (n_acq_starts < 1) throw ConfigError("BO needs n_acq_starts >= 1");
  if (hyper_refit_period < 1) {
    throw ConfigError("BO hyper_refit_period must be at least 1");
  }
}

std::string BoTrace::csv() const {
  const int p =
      iterations.empty() ? 0 : static_cast<int>(iterations[0].theta.size());
  std::string out = "iter,objective,best_so_far";
  for (int d = 0; d < p; ++d) out += ",theta_" + std::to_string(d);
  out += "\n";
  char buf[48];
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const BoRecord& rec = iterations[i];
    std::snprintf(buf, sizeof(buf), "%zu", i);
    out += buf;
    std::snprintf(buf, sizeof(buf), ",%.9g,%.9g", rec.objective,
                  rec.best_so_far);
    out += buf;
    for (int d = 0; d < p; ++d) {
      std::snprintf(buf, sizeof(buf), ",%.9g", rec.theta[d]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

Eigen::MatrixXd latin_hypercube(int n, const Eigen::MatrixX2d& bounds,
                                std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("latin_hypercube needs n >= 1");
  const int p = static_cast<int>(bounds.rows());
  for (int d = 0; d < p; ++d) {
    if (!(bounds(d, 0) < bounds(d, 1))) {
      throw std::invalid_argument("latin_hypercube needs lo < hi per row");
    }
  }
  Rng rng(derive_seed(seed, /*tag=*/0x6c6873u));
  Eigen::MatrixXd X(n, p);
  std::vector<int> strata(n);
  for (int d = 0; d < p; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    for (int i = 0; i < n; ++i) {
      const double u = (strata[i] + rng.uniform()) / n;
      X(i, d) = bounds(d, 0) + u * (bounds(d, 1) - bounds(d, 0));
    }
  }
  return X;
}

Eigen::VectorXd ordered_transform(const Eigen::VectorXd& raw,
                                  const ParameterSpace& space) {
  const int p = space.dim();
  if (raw.size() != p) {
    throw std::invalid_argument("raw point dimension mismatch");
  }
  Eigen::VectorXd theta(p);

  for (int d = 0; d < 2; ++d) {
    const auto [lo, hi] = space.bounds(d);
    theta[d] = lo + raw[d] * (hi - lo);
  }

  // Cumulative decreasing construction on the shared range: each velocity
  // interpolates between the range floor and its predecessor.
  {
    const auto [lo, hi] = space.bounds(2);
    theta[2] = lo + raw[2] * (hi - lo);
    theta[3] = lo + raw[3] * (theta[2] - lo);
    theta[4] = lo + raw[4] * (theta[3] - lo);
  }

  // Sorted-stick construction for the first latent coordinates: each
  // fraction advances from its predecessor toward the upper bound.
  double q = 0.0;
  for (int s = 0; s < space.n_stimuli; ++s) {
    const auto [z1_lo, z1_hi] = space.bounds(5 + 2 * s);
    const auto [z2_lo, z2_hi] = space.bounds(5 + 2 * s + 1);
    q += (1.0 - q) * raw[5 + 2 * s];
    theta[5 + 2 * s] = z1_lo + q * (z1_hi - z1_lo);
    theta[5 + 2 * s + 1] = z2_lo + raw[5 + 2 * s + 1] * (z2_hi - z2_lo);
  }
  return theta;
}

Eigen::VectorXd ordered_encode(const Eigen::VectorXd& theta,
                               const ParameterSpace& space) {
  const int p = space.dim();
  if (theta.size() != p) {
    throw std::invalid_argument("theta dimension mismatch");
  }
  const auto fraction = [](double value, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  };
  Eigen::VectorXd raw(p);

  for (int d = 0; d < 2; ++d) {
    const auto [lo, hi] = space.bounds(d);
    raw[d] = fraction(theta[d], lo, hi);
  }
  {
    const auto [lo, hi] = space.bounds(2);
    raw[2] = fraction(theta[2], lo, hi);
    raw[3] = fraction(theta[3], lo, theta[2]);
    raw[4] = fraction(theta[4], lo, theta[3]);
  }
  double q_prev = 0.0;
  for (int s = 0; s < space.n_stimuli; ++s) {
    const auto [z1_lo, z1_hi] = space.bounds(5 + 2 * s);
    const auto [z2_lo, z2_hi] = space.bounds(5 + 2 * s + 1);
    const double q = fraction(theta[5 + 2 * s], z1_lo, z1_hi);
    raw[5 + 2 * s] = q_prev < 1.0
                         ? std::clamp((q - q_prev) / (1.0 - q_prev), 0.0, 1.0)
                         : 0.0;
    q_prev = std::max(q_prev, q);
    raw[5 + 2 * s + 1] = fraction(theta[5 + 2 * s + 1], z2_lo, z2_hi);
  }
  return raw;
}

double expected_improvement(const GpModel& m, const Eigen::VectorXd& x,
                            double best, double xi) {
  const auto [mean, var] = m.predict(x);
  const double s = std::sqrt(var);
  const double improve = best - mean - xi;
  if (s <= 0.0) return std::max(improve, 0.0);
  const double z = improve / s;
  return std::max(improve * normal_cdf(z) + s * normal_pdf(z), 0.0);
}

double augmented_ei(const GpModel& m, const Eigen::VectorXd& x, double xi) {
  const double noise_var = m.hyper().noise_var;
  if (noise_var < 1e-6) {
    // Noiseless regime: the GP interpolates, so the effective best
    // collapses onto the best observed target and the deflation factor
    // is 1. Delegating keeps AEI and EI runs identical here.
    return expected_improvement(m, x, m.targets().minCoeff(), xi);
  }
  const double u_star = m.effective_best(1.0);
  const auto [mean, var] = m.predict(x);
  const double s = std::sqrt(var);
  const double sigma_eps = m.target_scale() * std::sqrt(noise_var);
  const double improve = u_star - mean - xi;
  double ei;
  if (s <= 0.0) {
    ei = std::max(improve, 0.0);
  } else {
    const double z = improve / s;
    ei = std::max(improve * normal_cdf(z) + s * normal_pdf(z), 0.0);
  }
  const double deflate =
      1.0 - sigma_eps / std::sqrt(s * s + sigma_eps * sigma_eps);
  return ei * deflate;
}

namespace {

double acquisition_value(const GpModel& m, const BoConfig& cfg,
                         const Eigen::VectorXd& x, double best_observed) {
  return cfg.acquisition == AcquisitionKind::EI
             ? expected_improvement(m, x, best_observed, cfg.xi)
             : augmented_ei(m, x, cfg.xi);
}

}  // namespace

Eigen::VectorXd maximize_acquisition(const GpModel& m,
                                     const Eigen::MatrixX2d& bounds,
                                     const BoConfig& cfg, double best_observed,
                                     std::uint64_t seed) {
  const int p = static_cast<int>(bounds.rows());
  const auto acq = [&](const Eigen::VectorXd& x) {
    return acquisition_value(m, cfg, x, best_observed);
  };

  const int n_probes = 128 + 32 * p;
  const Eigen::MatrixXd probes =
      latin_hypercube(n_probes, bounds, derive_seed(seed, /*tag=*/0x616371u));
  std::vector<std::pair<double, int>> ranked(n_probes);
  for (int i = 0; i < n_probes; ++i) {
    ranked[i] = {acq(probes.row(i).transpose()), i};
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  CoordinateSearchConfig search;
  search.max_sweeps = 2;
  search.golden_iters = 8;
  search.shrink = 4.0;
  search.move_tol = 1e-4;

  Eigen::VectorXd best_x = probes.row(ranked[0].second).transpose();
  double best_v = ranked[0].first;
  const int n_starts = std::min(cfg.n_acq_starts, n_probes);
  for (int s = 0; s < n_starts; ++s) {
    double v = 0.0;
    const Eigen::VectorXd x =
        coordinate_ascent(acq, probes.row(ranked[s].second).transpose(),
                          bounds.col(0), bounds.col(1), search, &v);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return best_x;
}

BoTrace bo_minimize_box(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::MatrixX2d& bounds, const BoConfig& cfg) {
  const int p = static_cast<int>(bounds.rows());
  cfg.validate(p);

  BoTrace trace;
  trace.iterations.reserve(cfg.budget);
  bool any_finite = false;
  double worst_finite = 0.0;
  double best = std::numeric_limits<double>::infinity();

  const auto record = [&](const Eigen::VectorXd& x) {
    double value = objective(x);
    if (std::isfinite(value)) {
      worst_finite = any_finite ? std::max(worst_finite, value) : value;
      any_finite = true;
    } else {
      value = penalized_value(any_finite, worst_finite);
    }
    if (value < best) {
      best = value;
      trace.best_raw = x;
      trace.best_theta = x;
      trace.best_value = value;
    }
    trace.iterations.push_back({x, x, value, best});
  };

  const int n_init = std::min(cfg.n_init, cfg.budget);
  const Eigen::MatrixXd design =
      latin_hypercube(n_init, bounds, derive_seed(cfg.seed, /*tag=*/0x696e69u));
  for (int i = 0; i < n_init; ++i) record(design.row(i).transpose());

  Eigen::MatrixXd X(cfg.budget, p);
  Eigen::VectorXd y(cfg.budget);
  Hyperparams hypers;
  bool have_hypers = false;
  for (int t = n_init; t < cfg.budget; ++t) {
    for (int i = 0; i < t; ++i) {
      X.row(i) = trace.iterations[i].raw;
      y[i] = trace.iterations[i].objective;
    }
    if (!have_hypers || (t - n_init) % cfg.hyper_refit_period == 0) {
      HyperFitConfig hcfg = cfg.hyper;
      hcfg.seed = derive_seed(cfg.seed, /*tag=*/0x687970u, t);
      if (have_hypers) hcfg.extra_starts.push_back(hypers);
      hypers = fit_hyperparams(X.topRows(t), y.head(t), hcfg);
      have_hypers = true;
    }
    const GpModel model = GpModel::fit(X.topRows(t), y.head(t), hypers);
    const Eigen::VectorXd x_next = maximize_acquisition(
        model, bounds, cfg, best, derive_seed(cfg.seed, /*tag=*/0x6e7874u, t));
    record(x_next);
  }
  return trace;
}

BoTrace bo_minimize(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const ParameterSpace& space, const BoConfig& cfg) {
  const int p = space.dim();
  Eigen::MatrixX2d unit(p, 2);
  unit.col(0).setZero();
  unit.col(1).setOnes();

  BoTrace trace = bo_minimize_box(
      [&](const Eigen::VectorXd& raw) {
        return objective(ordered_transform(raw, space));
      },
      unit, cfg);
  for (BoRecord& rec : trace.iterations) {
    rec.theta = ordered_transform(rec.raw, space);
  }
  trace.best_theta = ordered_transform(trace.best_raw, space);
  return trace;
}

}  // namespace cardioinfer
