#pragma once

#include "projfinsler/grassmannian.hpp"
#include "projfinsler/metric_core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace projfinsler::cli {

/// Invalid or unreadable configuration; maps to exit status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct MetricSpec {
  std::string catalog;  ///< catalog name, or empty when expr is set
  Params params;
  std::string expr;     ///< DSL source in x and v
  bool reversible = false;
  bool smooth = false;  ///< asserts smoothness of abs-containing expressions
};

struct MeasureSpec {
  std::string expr;  ///< DSL source in u and p
  bool symmetric = true;
};

struct GeodesicSpec {
  std::string label;
  Vec x0;
  Vec v0;
};

struct SupportBox {
  Vec lo;
  Vec hi;
};

/// A job description. Zero-valued numeric fields mean "command default".
struct JobConfig {
  int dimension = 2;
  std::optional<MetricSpec> metric;
  std::optional<MeasureSpec> measure;
  std::optional<Mat> lattice;
  int grid = 0;
  double tol = 0.0;
  std::optional<std::uint64_t> seed;
  int samples = 0;
  std::vector<Vec> points;
  std::optional<Vec> point;
  std::optional<SupportBox> support;
  std::vector<GeodesicSpec> geodesics;
  double duration = 1.0;
  int steps = 1000;
  /// Coordinate plane (0-based indices) for plots of 3D data.
  std::optional<std::pair<int, int>> slice;
  std::string output = "out";
};

/// JSON configuration. Syntax errors report line and column; schema errors
/// report the JSON pointer of the offending field.
JobConfig parse_config(const std::string& text);
JobConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError when the job has no metric, or the definition is invalid.
OneDensity build_metric(const JobConfig& job);
HyperplaneMeasure build_measure(const JobConfig& job);

}  // namespace projfinsler::cli
