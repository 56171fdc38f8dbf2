#include "sofsyn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace sofsyn {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6g", v);
  return buffer;
}

}  // namespace

void write_trajectory_svg(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory_svg: cannot open " + path);

  const int steps = trajectory.steps_recorded();
  const int n = steps > 0 ? static_cast<int>(trajectory.x[0].size()) : 0;

  const double width = 800, height = 480;
  const double left = 60, right = 20, top = 20, bottom = 45;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < steps; ++k)
    for (int i = 0; i < n; ++i) {
      lo = std::min(lo, trajectory.x[k][i]);
      hi = std::max(hi, trajectory.x[k][i]);
    }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  auto sx = [&](double k) {
    return left + plot_w * (steps > 1 ? k / (steps - 1) : 0.0);
  };
  auto sy = [&](double v) { return top + plot_h * (1.0 - (v - lo) / (hi - lo)); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\""
      << width << "\" height=\"" << height << "\" viewBox=\"0 0 " << width
      << " " << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes with min/max ticks and a zero line when it is in range.
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  if (lo < 0.0 && hi > 0.0)
    out << "<line x1=\"" << left << "\" y1=\"" << sy(0.0) << "\" x2=\""
        << left + plot_w << "\" y2=\"" << sy(0.0)
        << "\" stroke=\"#cccccc\" stroke-dasharray=\"4 3\"/>\n";
  out << "<text x=\"" << left - 8 << "\" y=\"" << sy(hi) + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(hi) << "</text>\n";
  out << "<text x=\"" << left - 8 << "\" y=\"" << sy(lo) + 4
      << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(lo) << "</text>\n";
  out << "<text x=\"" << left << "\" y=\"" << height - 12
      << "\" font-size=\"12\">0</text>\n";
  out << "<text x=\"" << left + plot_w << "\" y=\"" << height - 12
      << "\" text-anchor=\"end\" font-size=\"12\">" << steps - 1 << "</text>\n";
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">k</text>\n";

  for (int i = 0; i < n; ++i) {
    out << "<polyline fill=\"none\" stroke=\""
        << kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))]
        << "\" stroke-width=\"1.5\" points=\"";
    for (int k = 0; k < steps; ++k)
      out << fmt(sx(k)) << "," << fmt(sy(trajectory.x[k][i])) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << left + plot_w - 4 << "\" y=\"" << top + 16 + 14 * i
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\""
        << kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))] << "\">x"
        << i + 1 << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace sofsyn
