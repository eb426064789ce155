#include "cardioinfer/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cardioinfer/coordinate_search.hpp"
#include "cardioinfer/rng.hpp"

namespace cardioinfer {

void Hyperparams::validate(int dim) const {
  if (!(signal_var > 0.0) || !std::isfinite(signal_var)) {
    throw std::invalid_argument("signal_var must be positive and finite");
  }
  if (!(noise_var >= 0.0) || !std::isfinite(noise_var)) {
    throw std::invalid_argument("noise_var must be non-negative and finite");
  }
  if (lengthscales.size() != dim) {
    throw std::invalid_argument("lengthscale count must match dimension");
  }
  for (int d = 0; d < dim; ++d) {
    if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d])) {
      throw std::invalid_argument("lengthscales must be positive and finite");
    }
  }
}

double se_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                 const Hyperparams& h) {
  if (x.size() != y.size() || x.size() != h.lengthscales.size()) {
    throw std::invalid_argument("se_kernel dimension mismatch");
  }
  const double q =
      ((x - y).array() / h.lengthscales.array()).square().sum();
  return h.signal_var * std::exp(-0.5 * q);
}

GpModel GpModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                     const Hyperparams& h) {
  const int n = static_cast<int>(X.rows());
  if (n < 1 || y.size() != n) {
    throw std::invalid_argument("gp fit needs n >= 1 rows and matching y");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("gp fit needs finite data");
  }
  h.validate(static_cast<int>(X.cols()));

  GpModel m;
  m.X_ = X;
  m.y_raw_ = y;
  m.hyper_ = h;
  m.y_mean_ = y.mean();
  if (n > 1) {
    const double var = (y.array() - m.y_mean_).square().sum() / (n - 1);
    m.y_scale_ = std::sqrt(var);
  }
  if (!(m.y_scale_ > 1e-12)) m.y_scale_ = 1.0;
  m.y_std_ = (y.array() - m.y_mean_) / m.y_scale_;

  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = h.signal_var;
    for (int j = i + 1; j < n; ++j) {
      K(i, j) = K(j, i) =
          se_kernel(X.row(i).transpose(), X.row(j).transpose(), h);
    }
  }

  double jitter = 0.0;
  while (true) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += h.noise_var + jitter;
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      m.chol_ = llt.matrixL();
      m.alpha_ = llt.solve(m.y_std_);
      m.jitter_ = jitter;
      return m;
    }
    if (jitter == 0.0) {
      jitter = 1e-8;
    } else if (jitter < 1e-2) {
      jitter *= 10.0;
    } else {
      throw NumericalError(
          "gp fit: Cholesky failed at the maximum jitter of 1e-2");
    }
  }
}

std::pair<double, double> GpModel::predict(const Eigen::VectorXd& x) const {
  const int n = size();
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    k[i] = se_kernel(x, X_.row(i).transpose(), hyper_);
  }
  const double mean_std = k.dot(alpha_);
  const Eigen::VectorXd v =
      chol_.triangularView<Eigen::Lower>().solve(k);
  const double var_std = std::max(hyper_.signal_var - v.squaredNorm(), 0.0);
  return {y_mean_ + y_scale_ * mean_std, y_scale_ * y_scale_ * var_std};
}

double GpModel::log_marginal_likelihood() const {
  const int n = size();
  return -0.5 * y_std_.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * M_PI);
}

double GpModel::effective_best(double c) const {
  if (c == 0.0 && effective_best_c0_.has_value()) return *effective_best_c0_;
  if (c == 1.0 && effective_best_c1_.has_value()) return *effective_best_c1_;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    const auto [mean, var] = predict(X_.row(i).transpose());
    best = std::min(best, mean + c * std::sqrt(var));
  }
  if (c == 0.0) effective_best_c0_ = best;
  if (c == 1.0) effective_best_c1_ = best;
  return best;
}

Hyperparams median_heuristic_hyperparams(const Eigen::MatrixXd& X,
                                         const Eigen::VectorXd& y) {
  (void)y;
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  Hyperparams h;
  h.signal_var = 1.0;
  h.noise_var = 1e-4;
  h.lengthscales.resize(p);
  std::vector<double> gaps;
  gaps.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int d = 0; d < p; ++d) {
    gaps.clear();
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        gaps.push_back(std::abs(X(i, d) - X(j, d)));
      }
    }
    double scale = 1.0;
    if (!gaps.empty()) {
      const auto mid = gaps.begin() + gaps.size() / 2;
      std::nth_element(gaps.begin(), mid, gaps.end());
      scale = *mid;
    }
    h.lengthscales[d] = scale > 1e-9 ? scale : 1.0;
  }
  return h;
}

namespace {

struct LogBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Search layout: [log l_1 .. log l_p, log signal_var, log noise_var].
LogBox hyper_log_box(const Eigen::MatrixXd& X) {
  const int p = static_cast<int>(X.cols());
  LogBox box;
  box.lo.resize(p + 2);
  box.hi.resize(p + 2);
  for (int d = 0; d < p; ++d) {
    double range = X.col(d).maxCoeff() - X.col(d).minCoeff();
    if (!(range > 1e-12)) range = 1.0;
    box.lo[d] = std::log(1e-2 * range);
    box.hi[d] = std::log(1e2 * range);
  }
  // Targets are standardized inside GpModel, so the variance bounds are
  // relative to var = 1.
  box.lo[p] = std::log(1e-4);
  box.hi[p] = std::log(1e2);
  box.lo[p + 1] = std::log(1e-8);
  box.hi[p + 1] = std::log(1.0);
  return box;
}

Eigen::VectorXd encode_log(const Hyperparams& h) {
  const int p = static_cast<int>(h.lengthscales.size());
  Eigen::VectorXd x(p + 2);
  x.head(p) = h.lengthscales.array().log();
  x[p] = std::log(h.signal_var);
  x[p + 1] = std::log(std::max(h.noise_var, 1e-300));
  return x;
}

Hyperparams decode_log(const Eigen::VectorXd& x) {
  const int p = static_cast<int>(x.size()) - 2;
  Hyperparams h;
  h.lengthscales = x.head(p).array().exp();
  h.signal_var = std::exp(x[p]);
  h.noise_var = std::exp(x[p + 1]);
  return h;
}

}  // namespace

Hyperparams fit_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const HyperFitConfig& cfg) {
  const int n = static_cast<int>(X.rows());
  if (n < 3) throw std::invalid_argument("fit_hyperparams needs n >= 3");

  const LogBox box = hyper_log_box(X);
  const auto objective = [&](const Eigen::VectorXd& lx) {
    try {
      const double lml =
          GpModel::fit(X, y, decode_log(lx)).log_marginal_likelihood();
      return std::isfinite(lml)
                 ? lml
                 : -std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Eigen::VectorXd> starts;
  const Hyperparams fallback = median_heuristic_hyperparams(X, y);
  if (cfg.n_restarts > 0) starts.push_back(encode_log(fallback));
  Rng rng(derive_seed(cfg.seed, /*tag=*/0x68797065u));
  for (int r = 1; r < cfg.n_restarts; ++r) {
    Eigen::VectorXd x(box.lo.size());
    for (int d = 0; d < x.size(); ++d) {
      x[d] = rng.uniform(box.lo[d], box.hi[d]);
    }
    starts.push_back(x);
  }
  for (const Hyperparams& h : cfg.extra_starts) {
    starts.push_back(encode_log(h));
  }

  CoordinateSearchConfig search;
  search.max_sweeps = cfg.max_sweeps;
  search.golden_iters = cfg.golden_iters;
  search.bracket_halfwidth = cfg.bracket_halfwidth;
  search.shrink = 1.0;
  search.move_tol = 0.0;

  double best_f = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (const Eigen::VectorXd& start : starts) {
    double f = 0.0;
    const Eigen::VectorXd x =
        coordinate_ascent(objective, start, box.lo, box.hi, search, &f);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  if (!std::isfinite(best_f)) return fallback;
  return decode_log(best_x);
}

}  // namespace cardioinfer
