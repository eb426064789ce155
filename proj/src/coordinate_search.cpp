#include "cardioinfer/coordinate_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cardioinfer {

namespace {

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2

struct Probe {
  double x = 0.0;
  double f = -std::numeric_limits<double>::infinity();
};

// Golden-section max of f on [a, b] tracking the best probed abscissa,
// endpoints included.
Probe golden_probe(const std::function<double(double)>& f, double a, double b,
                   int iters) {
  Probe best{a, f(a)};
  const double fb = f(b);
  if (fb > best.f) best = {b, fb};

  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  if (f1 > best.f) best = {x1, f1};
  if (f2 > best.f) best = {x2, f2};
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
      if (f2 > best.f) best = {x2, f2};
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
      if (f1 > best.f) best = {x1, f1};
    }
  }
  return best;
}

}  // namespace

double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, int iters) {
  return golden_probe(f, a, b, iters).x;
}

Eigen::VectorXd coordinate_ascent(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
    const Eigen::VectorXd& hi, const CoordinateSearchConfig& cfg,
    double* best_f) {
  const int p = static_cast<int>(x0.size());
  Eigen::VectorXd x = x0.cwiseMax(lo).cwiseMin(hi);
  double fx = f(x);

  Eigen::VectorXd hw(p);
  for (int d = 0; d < p; ++d) {
    hw[d] = cfg.bracket_halfwidth > 0.0 ? cfg.bracket_halfwidth
                                        : (hi[d] - lo[d]) / 4.0;
  }

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    bool moved = false;
    double max_move = 0.0;
    for (int d = 0; d < p; ++d) {
      const double a = std::max(lo[d], x[d] - hw[d]);
      const double b = std::min(hi[d], x[d] + hw[d]);
      if (!(b > a)) continue;
      const Probe probe = golden_probe(
          [&](double t) {
            Eigen::VectorXd y = x;
            y[d] = t;
            return f(y);
          },
          a, b, cfg.golden_iters);
      if (probe.f > fx + 1e-12 * (1.0 + std::abs(fx))) {
        max_move = std::max(max_move, std::abs(probe.x - x[d]));
        x[d] = probe.x;
        fx = probe.f;
        moved = true;
      }
    }
    if (!moved || (cfg.move_tol > 0.0 && max_move < cfg.move_tol)) break;
    if (cfg.shrink > 1.0) hw /= cfg.shrink;
  }
  if (best_f != nullptr) *best_f = fx;
  return x;
}

}  // namespace cardioinfer
