#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace projfinsler::cli {

/// Named columns of numeric samples.
struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

enum class PlotKind {
  Ball,     ///< boundary samples in order (x1, x2, ...): one closed path
  Curves,   ///< (curve, x1, x2, ...): one polyline per curve id, legend in order of appearance
  Heatmap,  ///< (x1, x2, value) on a regular grid, min/max annotated
};

struct PlotStyle {
  int width = 480;
  int height = 480;
  std::string title;
  std::vector<std::string> labels;  ///< legend labels for Curves
  /// Coordinate columns to draw when the data has more than two.
  std::optional<std::pair<int, int>> slice;
  int precision = 3;
};

/// Deterministic SVG text: fixed viewport, fixed number formatting, elements in
/// input order. Throws PreconditionError on an empty dataset or on data of
/// dimension > 2 for Ball/Heatmap without a slice.
std::string render_svg(const Dataset& data, PlotKind kind, const PlotStyle& style = {});

}  // namespace projfinsler::cli
