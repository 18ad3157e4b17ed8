#include "sgf/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sgf/errors.hpp"

namespace sgf::plot {

namespace {

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
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
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo{std::numeric_limits<double>::infinity()};
  double hi{-std::numeric_limits<double>::infinity()};
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void settle() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string render_svg(const LinePlot& plot) {
  const double left = 70, right = 20, top = 40, bottom = 50;
  const double w = plot.width - left - right;
  const double h = plot.height - top - bottom;
  Range xr, yr;
  for (const auto& s : plot.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  xr.settle();
  yr.settle();
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double y) { return top + h - (y - yr.lo) / (yr.hi - yr.lo) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\"" << plot.height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << plot.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(plot.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"#444\"/>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / kTicks;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / kTicks;
    os << "<line x1=\"" << px(fx) << "\" y1=\"" << top << "\" x2=\"" << px(fx) << "\" y2=\"" << top + h
       << "\" stroke=\"#eee\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << py(fy) << "\" x2=\"" << left + w << "\" y2=\"" << py(fy)
       << "\" stroke=\"#eee\"/>\n";
    os << "<text x=\"" << px(fx) << "\" y=\"" << top + h + 16 << "\" text-anchor=\"middle\">" << num(fx)
       << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << num(fy) << "</text>\n";
  }
  os << "<text x=\"" << left + w / 2 << "\" y=\"" << plot.height - 12 << "\" text-anchor=\"middle\">"
     << escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << top + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(plot.y_label) << "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = kColors[si % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    os << "\"/>\n";
    const double ly = top + 14 + 16.0 * static_cast<double>(si);
    os << "<line x1=\"" << left + w - 150 << "\" y1=\"" << ly << "\" x2=\"" << left + w - 130 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + w - 125 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const LinePlot& plot, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write plot '" + path + "'");
  out << render_svg(plot);
}

std::vector<double> moving_average(const std::vector<double>& y, std::size_t window) {
  std::vector<double> out(y.size());
  window = std::max<std::size_t>(window, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    acc += y[i];
    if (i >= window) acc -= y[i - window];
    out[i] = acc / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

}  // namespace sgf::plot
