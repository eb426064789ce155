#include "cardioinfer/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace cardioinfer {

namespace {

const char* kSeriesColors[] = {"#1f6fb2", "#d1495b", "#3a7d44", "#8e5fa8"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string svg_open(int w, int h) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                w, h, w, h);
  return std::string(buf) +
         "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

std::string text_at(double x, double y, const std::string& s, int size,
                    const char* anchor = "start") {
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"%d\" "
                "font-family=\"sans-serif\" text-anchor=\"%s\">",
                x, y, size, anchor);
  return std::string(buf) + s + "</text>\n";
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

struct Frame {
  double x0, y0, x1, y1;  // pixel corners, y0 = top
  double lo_x, hi_x, lo_y, hi_y;

  double px(double x) const {
    return x0 + (x - lo_x) / (hi_x - lo_x) * (x1 - x0);
  }
  double py(double y) const {
    return y1 - (y - lo_y) / (hi_y - lo_y) * (y1 - y0);
  }
};

std::string polyline(const Frame& f, const std::vector<double>& xs,
                     const std::vector<double>& ys, const char* color,
                     double width) {
  std::string out = "<polyline fill=\"none\" stroke=\"";
  out += color;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "\" stroke-width=\"%.2f\" points=\"", width);
  out += buf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += " ";
    out += fmt(f.px(xs[i])) + "," + fmt(f.py(ys[i]));
  }
  out += "\"/>\n";
  return out;
}

std::string frame_box(const Frame& f) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                "fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n",
                f.x0, f.y0, f.x1 - f.x0, f.y1 - f.y0);
  return buf;
}

}  // namespace

std::string cost_curve_svg(const std::vector<TraceSeries>& series) {
  if (series.empty()) {
    throw std::invalid_argument("cost curve needs at least one series");
  }
  for (const TraceSeries& s : series) {
    if (s.best_so_far.empty()) {
      throw std::invalid_argument("cost curve series '" + s.label +
                                  "' is empty");
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  int max_len = 0;
  for (const TraceSeries& s : series) {
    for (double v : s.best_so_far) {
      if (v > 0.0) lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    max_len = std::max(max_len, static_cast<int>(s.best_so_far.size()));
  }
  if (!std::isfinite(lo)) lo = 1e-12;  // all values non-positive
  if (!(hi > 0.0)) hi = 1.0;
  const double log_lo = std::floor(std::log10(lo));
  const double log_hi = std::ceil(std::log10(hi) + 1e-9);

  const int W = 720, H = 440;
  Frame f{70, 40, W - 30, H - 50, 0,
          static_cast<double>(std::max(max_len - 1, 1)),
          log_lo, std::max(log_hi, log_lo + 1)};

  std::string svg = svg_open(W, H);
  svg += text_at(W / 2.0, 24, "Best objective so far", 15, "middle");
  svg += frame_box(f);
  for (double e = f.lo_y; e <= f.hi_y + 1e-9; e += 1.0) {
    const double y = f.py(e);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
                  f.x0, y, f.x1, y);
    svg += buf;
    svg += text_at(f.x0 - 6, y + 4, "1e" + tick_label(e), 11, "end");
  }
  const int x_step = std::max(1, max_len / 8);
  for (int i = 0; i < max_len; i += x_step) {
    svg += text_at(f.px(i), f.y1 + 16, tick_label(i), 11, "middle");
  }
  svg += text_at((f.x0 + f.x1) / 2, H - 14, "iteration", 12, "middle");

  for (std::size_t k = 0; k < series.size(); ++k) {
    const TraceSeries& s = series[k];
    std::vector<double> xs(s.best_so_far.size()), ys(s.best_so_far.size());
    for (std::size_t i = 0; i < s.best_so_far.size(); ++i) {
      xs[i] = static_cast<double>(i);
      ys[i] = std::log10(std::max(s.best_so_far[i], lo));
    }
    const char* color = kSeriesColors[k % 4];
    svg += polyline(f, xs, ys, color, 1.8);
    const double ly = f.y0 + 18 + 16 * k;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                  "stroke=\"%s\" stroke-width=\"2\"/>\n",
                  f.x0 + 12, ly - 4, f.x0 + 36, ly - 4, color);
    svg += buf;
    svg += text_at(f.x0 + 42, ly, s.label, 12);
  }
  svg += "</svg>\n";
  return svg;
}

std::string embedding_scatter_svg(const std::vector<double>& z1,
                                  const std::vector<double>& z2) {
  if (z1.empty() || z1.size() != z2.size()) {
    throw std::invalid_argument("embedding scatter needs matching z1/z2");
  }
  const auto [lo1, hi1] = std::minmax_element(z1.begin(), z1.end());
  const auto [lo2, hi2] = std::minmax_element(z2.begin(), z2.end());
  const double pad1 = std::max((*hi1 - *lo1) * 0.06, 1e-9);
  const double pad2 = std::max((*hi2 - *lo2) * 0.06, 1e-9);

  const int W = 560, H = 520;
  Frame f{60, 40, W - 30, H - 50, *lo1 - pad1, *hi1 + pad1, *lo2 - pad2,
          *hi2 + pad2};

  double c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < z1.size(); ++i) {
    c1 += z1[i];
    c2 += z2[i];
  }
  c1 /= z1.size();
  c2 /= z2.size();

  std::string svg = svg_open(W, H);
  svg += text_at(W / 2.0, 24, "Endocardial isomap embedding", 15, "middle");
  svg += frame_box(f);
  svg += text_at((f.x0 + f.x1) / 2, H - 14, "z1", 12, "middle");
  svg += text_at(18, (f.y0 + f.y1) / 2, "z2", 12, "middle");
  for (std::size_t i = 0; i < z1.size(); ++i) {
    const double angle = std::atan2(z2[i] - c2, z1[i] - c1);
    const int hue = static_cast<int>(180.0 * (angle / M_PI + 1.0)) % 360;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" "
                  "fill=\"hsl(%d,60%%,45%%)\"/>\n",
                  f.px(z1[i]), f.py(z2[i]), hue);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

std::string ecg_overlay_svg(const EcgTrace& observed, const EcgTrace& baseline,
                            const EcgTrace& fitted) {
  if (observed.leads.cols() != baseline.leads.cols() ||
      observed.leads.cols() != fitted.leads.cols()) {
    throw std::invalid_argument("ECG overlay needs equal-length traces");
  }
  const int T = observed.n_samples();
  const int W = 960, H = 720;
  const int cols = 4, rows = 3;
  const double cell_w = (W - 60.0) / cols;
  const double cell_h = (H - 70.0) / rows;

  std::string svg = svg_open(W, H);
  svg += text_at(W / 2.0, 24,
                 "12-lead ECG: observed, prior baseline, fitted", 15,
                 "middle");
  const EcgTrace* traces[3] = {&observed, &baseline, &fitted};
  const char* labels[3] = {"observed", "baseline", "fitted"};
  for (int k = 0; k < 3; ++k) {
    char buf[200];
    const double lx = 40 + 180.0 * k;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%.2f\" y1=\"34\" x2=\"%.2f\" y2=\"34\" "
                  "stroke=\"%s\" stroke-width=\"2\"/>\n",
                  lx, lx + 24, kSeriesColors[k % 4]);
    svg += buf;
    svg += text_at(lx + 30, 38, labels[k], 12);
  }

  std::vector<double> xs(T);
  for (int t = 0; t < T; ++t) xs[t] = t;
  for (int lead = 0; lead < kNumLeads; ++lead) {
    const int r = lead / cols, c = lead % cols;
    Frame f{40 + c * cell_w + 8, 50 + r * cell_h + 14,
            40 + (c + 1) * cell_w - 8, 50 + (r + 1) * cell_h - 10,
            0, static_cast<double>(std::max(T - 1, 1)), 0, 1};
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const EcgTrace* tr : traces) {
      lo = std::min(lo, tr->leads.row(lead).minCoeff());
      hi = std::max(hi, tr->leads.row(lead).maxCoeff());
    }
    if (!(hi > lo)) hi = lo + 1.0;
    const double pad = (hi - lo) * 0.08;
    f.lo_y = lo - pad;
    f.hi_y = hi + pad;

    svg += frame_box(f);
    svg += text_at(f.x0 + 4, f.y0 - 3, kLeadNames[lead], 11);
    for (int k = 0; k < 3; ++k) {
      std::vector<double> ys(T);
      for (int t = 0; t < T; ++t) ys[t] = traces[k]->leads(lead, t);
      svg += polyline(f, xs, ys, kSeriesColors[k % 4], k == 0 ? 1.6 : 1.1);
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace cardioinfer
