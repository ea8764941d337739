#pragma once

#include <string>
#include <vector>

namespace mongeampere::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::string annotation;  // drawn in red under the title when nonempty
};

// Line plot with axes, ticks and a legend. Points that cannot be drawn
// (non-finite, or nonpositive on a log axis) are skipped.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);
void write_line_plot(const std::string& path, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace mongeampere::cli
