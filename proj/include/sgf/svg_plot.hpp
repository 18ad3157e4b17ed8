#pragma once

#include <string>
#include <vector>

namespace sgf::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  int width{720};
  int height{420};
};

// Standalone SVG document with axes, ticks and a legend.
std::string render_svg(const LinePlot& plot);
void write_svg(const LinePlot& plot, const std::string& path);

// Trailing moving average; the first points average over what is available.
std::vector<double> moving_average(const std::vector<double>& y, std::size_t window);

}  // namespace sgf::plot
