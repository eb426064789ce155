#pragma once

#include <string>
#include <vector>

#include "cardioinfer/cardiosim.hpp"

namespace cardioinfer {

struct TraceSeries {
  std::string label;
  std::vector<double> best_so_far;  // per iteration, starting at 0
};

/// Iteration versus best-so-far on a log y axis, one polyline per series.
/// Throws std::invalid_argument for an empty series.
std::string cost_curve_svg(const std::vector<TraceSeries>& series);

/// Latent scatter of an embedding, points colored by angle around the
/// latent centroid so the chart shows the wrap structure.
std::string embedding_scatter_svg(const std::vector<double>& z1,
                                  const std::vector<double>& z2);

/// 12 small multiples (one per lead), observed / baseline / fitted
/// overlaid per panel.
std::string ecg_overlay_svg(const EcgTrace& observed, const EcgTrace& baseline,
                            const EcgTrace& fitted);

}  // namespace cardioinfer
