#pragma once

#include <Eigen/Dense>
#include <functional>

namespace cardioinfer {

/// Golden-section maximization of f on [a, b]; returns the best abscissa
/// probed (endpoints included). Deterministic.
double golden_section_max(const std::function<double(double)>& f, double a,
                          double b, int iters);

struct CoordinateSearchConfig {
  int max_sweeps = 6;
  int golden_iters = 10;
  double bracket_halfwidth = 0.0;  // 0 -> quarter of each dimension's range
  double shrink = 4.0;             // bracket divisor per sweep
  double move_tol = 1e-3;          // stop when no coordinate moved further
};

/// Coordinate-wise ascent: per sweep, each coordinate is line-searched on
/// a bracket centered at the current value (clipped to the box) and a move
/// is accepted only on strict improvement, which makes converged points
/// exact fixed points. Returns the best point; best_f receives its value.
Eigen::VectorXd coordinate_ascent(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
    const Eigen::VectorXd& hi, const CoordinateSearchConfig& cfg,
    double* best_f = nullptr);

}  // namespace cardioinfer
