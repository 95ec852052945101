#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gig/types.hpp"

namespace gig::tools {

/// Diverging ramp: -1 -> #2166ac (blue), 0 -> #f7f7f7, +1 -> #b2182b (red).
/// Values are clamped to [-1, 1]. Returns "#rrggbb".
std::string diverging_color(double t);

/// Scatter of `points` coloured per panel by `values[panel][i] / scale`, with
/// scale = max |value| over all panels. One panel per entry of `titles`.
void write_heatmap_svg(const std::filesystem::path& file, const std::string& title,
                       const Points& points, const std::vector<std::vector<double>>& values,
                       const std::vector<std::string>& titles);

struct Series {
  std::string label;
  std::vector<double> y;
  std::vector<double> err;
};

/// Line chart with error bars over a shared x grid.
void write_line_chart_svg(const std::filesystem::path& file, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<double>& x, const std::vector<Series>& series);

}  // namespace gig::tools
