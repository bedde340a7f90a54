#include "projfinsler/cli/svg.hpp"

#include "projfinsler/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace projfinsler::cli {

namespace {

struct Frame {
  double x0, x1, y0, y1;
  double left, top, size_x, size_y;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * size_x; }
  double py(double y) const { return top + (y1 - y) / (y1 - y0) * size_y; }
};

std::string num(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) s = s.substr(s[0] == '-' ? 1 : 0);
  return s;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

// Axis-aligned bounds padded by 5%; equal scaling keeps balls round.
Frame make_frame(const std::vector<std::pair<double, double>>& pts, const PlotStyle& style, bool equal_aspect, int legend_width) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double margin = 40.0;
  const double size_x = style.width - 2 * margin - legend_width, size_y = style.height - 2 * margin;
  if (equal_aspect) {
    const double scale = std::max((x1 - x0) / size_x, (y1 - y0) / size_y);
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    x0 = cx - 0.5 * scale * size_x;
    x1 = cx + 0.5 * scale * size_x;
    y0 = cy - 0.5 * scale * size_y;
    y1 = cy + 0.5 * scale * size_y;
  }
  const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
  return {x0 - px, x1 + px, y0 - py, y1 + py, margin, margin, size_x, size_y};
}

std::string header(const PlotStyle& style) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
                  std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
                  std::to_string(style.height) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(style.width) + "\" height=\"" + std::to_string(style.height) +
       "\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    s += "<text x=\"" + std::to_string(style.width / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         escape(style.title) + "</text>\n";
  }
  return s;
}

std::string frame_box(const Frame& f, int precision) {
  return "<rect x=\"" + num(f.left, precision) + "\" y=\"" + num(f.top, precision) + "\" width=\"" + num(f.size_x, precision) +
         "\" height=\"" + num(f.size_y, precision) + "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"0.5\"/>\n";
}

std::pair<int, int> coordinate_columns(const Dataset& data, int first, bool allow_projection, const PlotStyle& style,
                                       const char* kind) {
  const int coords = static_cast<int>(data.columns.size()) - first;
  if (style.slice) {
    const auto [a, b] = *style.slice;
    if (a < 0 || b < 0 || a >= coords || b >= coords || a == b) throw PreconditionError(std::string(kind) + ": invalid slice");
    return {first + a, first + b};
  }
  if (coords < 2) throw PreconditionError(std::string(kind) + ": need two coordinate columns");
  if (coords > 2 && !allow_projection) {
    throw PreconditionError(std::string(kind) + ": data of dimension " + std::to_string(coords) + " needs a declared slice");
  }
  return {first, first + 1};
}

// Blue to red through white.
std::string color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double s = t / 0.5;
    r = static_cast<int>(std::lround(49 + s * (255 - 49)));
    g = static_cast<int>(std::lround(54 + s * (255 - 54)));
    b = static_cast<int>(std::lround(149 + s * (255 - 149)));
  } else {
    const double s = (t - 0.5) / 0.5;
    r = static_cast<int>(std::lround(255 - s * (255 - 165)));
    g = static_cast<int>(std::lround(255 - s * 255));
    b = static_cast<int>(std::lround(255 - s * (255 - 38)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string render_svg(const Dataset& data, PlotKind kind, const PlotStyle& style) {
  if (data.rows.empty()) throw PreconditionError("render_svg: empty dataset");
  for (const auto& row : data.rows) {
    if (row.size() != data.columns.size()) throw PreconditionError("render_svg: row width does not match the columns");
  }
  const int prec = style.precision;
  std::string svg = header(style);

  if (kind == PlotKind::Ball) {
    const auto [cx, cy] = coordinate_columns(data, 0, false, style, "ball");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : data.rows) pts.emplace_back(row[cx], row[cy]);
    const Frame f = make_frame(pts, style, true, 0);
    svg += frame_box(f, prec);
    std::string d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d += (i ? " L " : "M ") + num(f.px(pts[i].first), prec) + " " + num(f.py(pts[i].second), prec);
    }
    svg += "<path d=\"" + d + " Z\" fill=\"#dde6f5\" stroke=\"#1f3a93\" stroke-width=\"1.5\"/>\n";
  } else if (kind == PlotKind::Curves) {
    const auto [cx, cy] = coordinate_columns(data, 1, true, style, "curves");
    std::vector<double> ids;
    std::map<double, std::vector<std::pair<double, double>>> curves;
    std::vector<std::pair<double, double>> all;
    for (const auto& row : data.rows) {
      if (!curves.count(row[0])) ids.push_back(row[0]);
      curves[row[0]].emplace_back(row[cx], row[cy]);
      all.emplace_back(row[cx], row[cy]);
    }
    const int legend_width = 120;
    const Frame f = make_frame(all, style, true, legend_width);
    svg += frame_box(f, prec);
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    for (std::size_t k = 0; k < ids.size(); ++k) {
      std::string pts;
      for (const auto& [x, y] : curves[ids[k]]) pts += (pts.empty() ? "" : " ") + num(f.px(x), prec) + "," + num(f.py(y), prec);
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + palette[k % 8] + "\" stroke-width=\"1.5\"/>\n";
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::string label = k < style.labels.size() ? style.labels[k] : "curve " + std::to_string(k + 1);
      const double y = f.top + 14.0 + 18.0 * k;
      const double x = f.left + f.size_x + 12.0;
      svg += "<g class=\"legend\"><line x1=\"" + num(x, prec) + "\" y1=\"" + num(y, prec) + "\" x2=\"" + num(x + 18, prec) +
             "\" y2=\"" + num(y, prec) + "\" stroke=\"" + palette[k % 8] + "\" stroke-width=\"2\"/><text x=\"" + num(x + 24, prec) +
             "\" y=\"" + num(y + 4, prec) + "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(label) + "</text></g>\n";
    }
  } else {
    if (data.columns.size() < 3) throw PreconditionError("heatmap: need (x1, x2, value) columns");
    const int value_col = static_cast<int>(data.columns.size()) - 1;
    Dataset coords_only{std::vector<std::string>(data.columns.begin(), data.columns.end() - 1), {}};
    const auto [cx, cy] = coordinate_columns(coords_only, 0, false, style, "heatmap");
    std::vector<double> xs, ys;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<std::pair<double, double>> all;
    for (const auto& row : data.rows) {
      xs.push_back(row[cx]);
      ys.push_back(row[cy]);
      lo = std::min(lo, row[value_col]);
      hi = std::max(hi, row[value_col]);
      all.emplace_back(row[cx], row[cy]);
    }
    auto unique_sorted = [](std::vector<double> v) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    xs = unique_sorted(xs);
    ys = unique_sorted(ys);
    const double dx = xs.size() > 1 ? (xs.back() - xs.front()) / (xs.size() - 1) : 1.0;
    const double dy = ys.size() > 1 ? (ys.back() - ys.front()) / (ys.size() - 1) : 1.0;
    // Cells are centered on the samples.
    all.emplace_back(xs.front() - 0.5 * dx, ys.front() - 0.5 * dy);
    all.emplace_back(xs.back() + 0.5 * dx, ys.back() + 0.5 * dy);
    PlotStyle frame_style = style;
    frame_style.height = style.height - 30;
    Frame f = make_frame(all, frame_style, false, 0);
    f.x0 = xs.front() - 0.5 * dx;
    f.x1 = xs.back() + 0.5 * dx;
    f.y0 = ys.front() - 0.5 * dy;
    f.y1 = ys.back() + 0.5 * dy;
    const double w = f.size_x * dx / (f.x1 - f.x0), h = f.size_y * dy / (f.y1 - f.y0);
    for (const auto& row : data.rows) {
      const double t = hi > lo ? (row[value_col] - lo) / (hi - lo) : 0.5;
      svg += "<rect x=\"" + num(f.px(row[cx] - 0.5 * dx), prec) + "\" y=\"" + num(f.py(row[cy] + 0.5 * dy), prec) +
             "\" width=\"" + num(w, prec) + "\" height=\"" + num(h, prec) + "\" fill=\"" + color(t) + "\"/>\n";
    }
    svg += frame_box(f, prec);
    const double ty = f.top + f.size_y + 24.0;
    svg += "<text class=\"min\" x=\"" + num(f.left, prec) + "\" y=\"" + num(ty, prec) +
           "\" font-family=\"sans-serif\" font-size=\"11\">min = " + sci(lo) + "</text>\n";
    svg += "<text class=\"max\" x=\"" + num(f.left + f.size_x, prec) + "\" y=\"" + num(ty, prec) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">max = " + sci(hi) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace projfinsler::cli
