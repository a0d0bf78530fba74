#include "extruder/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace extruder {
namespace {

constexpr int kLeft = 80, kRight = 170, kTop = 34, kBottom = 46;
constexpr std::size_t kMaxPoints = 2000;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Roughly n ticks at 1, 2 or 5 times a power of ten.
std::vector<double> ticks(double lo, double hi, int n = 5) {
  const double span = hi - lo;
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double step = (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::fabs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

void range(const PlotPanel& p, double& x0, double& x1, double& y0, double& y1) {
  x0 = y0 = std::numeric_limits<double>::infinity();
  x1 = y1 = -std::numeric_limits<double>::infinity();
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (std::isfinite(p.hline)) {
    y0 = std::min(y0, p.hline);
    y1 = std::max(y1, p.hline);
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0;
  if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) {
    const double pad = std::max(1e-9, std::fabs(y0) * 0.05);
    y0 -= pad;
    y1 += pad;
  } else {
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
  }
}

void panel(std::ostringstream& os, const PlotPanel& p, int width, int height, int y_off) {
  double x0, x1, y0, y1;
  range(p, x0, x1, y0, y1);
  const double w = width - kLeft - kRight;
  const double h = height - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return y_off + kTop + (y1 - y) / (y1 - y0) * h; };

  os << "<text x='" << width / 2 << "' y='" << y_off + 20
     << "' text-anchor='middle' font-size='15'>" << esc(p.title) << "</text>\n";
  os << "<rect x='" << kLeft << "' y='" << y_off + kTop << "' width='" << w << "' height='" << h
     << "' fill='none' stroke='#333'/>\n";
  for (double t : ticks(x0, x1)) {
    os << "<line x1='" << px(t) << "' y1='" << y_off + kTop + h << "' x2='" << px(t) << "' y2='"
       << y_off + kTop + h + 5 << "' stroke='#333'/>";
    os << "<text x='" << px(t) << "' y='" << y_off + kTop + h + 18
       << "' text-anchor='middle' font-size='11'>" << num(t) << "</text>\n";
  }
  for (double t : ticks(y0, y1)) {
    os << "<line x1='" << kLeft - 5 << "' y1='" << py(t) << "' x2='" << kLeft << "' y2='" << py(t)
       << "' stroke='#333'/>";
    os << "<line x1='" << kLeft << "' y1='" << py(t) << "' x2='" << kLeft + w << "' y2='" << py(t)
       << "' stroke='#ddd'/>";
    os << "<text x='" << kLeft - 8 << "' y='" << py(t) + 4
       << "' text-anchor='end' font-size='11'>" << num(t) << "</text>\n";
  }
  os << "<text x='" << kLeft + w / 2 << "' y='" << y_off + height - 8
     << "' text-anchor='middle' font-size='12'>" << esc(p.xlabel) << "</text>\n";
  os << "<text transform='translate(16," << y_off + kTop + h / 2
     << ") rotate(-90)' text-anchor='middle' font-size='12'>" << esc(p.ylabel) << "</text>\n";

  if (std::isfinite(p.hline)) {
    os << "<line x1='" << kLeft << "' y1='" << py(p.hline) << "' x2='" << kLeft + w << "' y2='"
       << py(p.hline) << "' stroke='#c00' stroke-dasharray='2,3'/>\n";
  }
  int legend_y = y_off + kTop + 12;
  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.6'"
       << (s.dashed ? " stroke-dasharray='6,4'" : "") << " points='";
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.y[n - 1])) {
      os << px(s.x[n - 1]) << ',' << py(s.y[n - 1]);
    }
    os << "'/>\n";
    if (!s.label.empty()) {
      const int lx = kLeft + static_cast<int>(w) + 10;
      os << "<line x1='" << lx << "' y1='" << legend_y - 4 << "' x2='" << lx + 22 << "' y2='"
         << legend_y - 4 << "' stroke='" << s.color << "' stroke-width='2'"
         << (s.dashed ? " stroke-dasharray='6,4'" : "") << "/>";
      os << "<text x='" << lx + 28 << "' y='" << legend_y << "' font-size='11'>" << esc(s.label)
         << "</text>\n";
      legend_y += 16;
    }
  }
  if (std::isfinite(p.hline) && !p.hline_label.empty()) {
    const int lx = kLeft + static_cast<int>(w) + 10;
    os << "<line x1='" << lx << "' y1='" << legend_y - 4 << "' x2='" << lx + 22 << "' y2='"
       << legend_y - 4 << "' stroke='#c00' stroke-dasharray='2,3'/>";
    os << "<text x='" << lx + 28 << "' y='" << legend_y << "' font-size='11'>"
       << esc(p.hline_label) << "</text>\n";
  }
}

}  // namespace

const char* plot_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

std::string render_svg(const std::vector<PlotPanel>& panels, int width, int panel_height) {
  std::ostringstream os;
  os.precision(6);
  const int height = panel_height * static_cast<int>(std::max<std::size_t>(1, panels.size()));
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
     << "' viewBox='0 0 " << width << ' ' << height << "' font-family='sans-serif'>\n";
  os << "<rect width='100%' height='100%' fill='white'/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    panel(os, panels[i], width, panel_height, static_cast<int>(i) * panel_height);
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace extruder
