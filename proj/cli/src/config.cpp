#include "projfinsler/cli/config.hpp"

#include "projfinsler/metric_dsl.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace projfinsler::cli {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema_error(const std::string& pointer, const std::string& message) {
  throw ConfigError(pointer + ": " + message);
}

void allow_keys(const json& obj, const std::string& pointer, const std::set<std::string>& keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!keys.count(it.key())) schema_error(pointer + "/" + it.key(), "unknown field");
  }
}

const json& require_object(const json& j, const std::string& pointer) {
  if (!j.is_object()) schema_error(pointer, "expected an object");
  return j;
}

double get_number(const json& j, const std::string& pointer) {
  if (!j.is_number()) schema_error(pointer, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& pointer) {
  if (!j.is_number_integer()) schema_error(pointer, "expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& pointer) {
  if (!j.is_boolean()) schema_error(pointer, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& pointer) {
  if (!j.is_string()) schema_error(pointer, "expected a string");
  return j.get<std::string>();
}

Vec get_vector(const json& j, const std::string& pointer, int dim) {
  if (!j.is_array()) schema_error(pointer, "expected an array of numbers");
  if (dim > 0 && static_cast<int>(j.size()) != dim) {
    schema_error(pointer, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], pointer + "/" + std::to_string(i));
  return v;
}

Mat get_matrix(const json& j, const std::string& pointer, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) schema_error(pointer, "expected " + std::to_string(dim) + " rows");
  Mat m(dim, dim);
  for (int r = 0; r < dim; ++r) m.row(r) = get_vector(j[r], pointer + "/" + std::to_string(r), dim).transpose();
  return m;
}

MetricSpec parse_metric(const json& j, int dim) {
  const std::string ptr = "/metric";
  require_object(j, ptr);
  allow_keys(j, ptr, {"catalog", "params", "expr", "reversible", "smooth"});
  MetricSpec spec;
  const bool has_catalog = j.contains("catalog"), has_expr = j.contains("expr");
  if (has_catalog == has_expr) schema_error(ptr, "give exactly one of 'catalog' and 'expr'");
  if (has_catalog) {
    spec.catalog = get_string(j["catalog"], ptr + "/catalog");
    try {
      catalog_info(spec.catalog);
    } catch (const PreconditionError&) {
      schema_error(ptr + "/catalog", "unknown catalog entry '" + spec.catalog + "'");
    }
  }
  if (has_expr) spec.expr = get_string(j["expr"], ptr + "/expr");
  if (j.contains("params")) {
    const json& p = require_object(j["params"], ptr + "/params");
    for (auto it = p.begin(); it != p.end(); ++it) {
      const std::string key = ptr + "/params/" + it.key();
      if (it->is_number()) {
        spec.params.scalars[it.key()] = it->get<double>();
      } else {
        spec.params.matrices[it.key()] = get_matrix(*it, key, dim);
      }
    }
  }
  if (j.contains("reversible")) spec.reversible = get_bool(j["reversible"], ptr + "/reversible");
  if (j.contains("smooth")) spec.smooth = get_bool(j["smooth"], ptr + "/smooth");
  return spec;
}

MeasureSpec parse_measure(const json& j) {
  const std::string ptr = "/measure";
  require_object(j, ptr);
  allow_keys(j, ptr, {"expr", "symmetric"});
  if (!j.contains("expr")) schema_error(ptr, "missing field 'expr'");
  MeasureSpec spec;
  spec.expr = get_string(j["expr"], ptr + "/expr");
  if (j.contains("symmetric")) spec.symmetric = get_bool(j["symmetric"], ptr + "/symmetric");
  return spec;
}

// Line and column of a byte offset, 1-based.
std::pair<int, int> locate(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

JobConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      (pos == std::string::npos ? what : what.substr(pos)));
  }
  require_object(root, "");
  allow_keys(root, "", {"dimension", "metric", "measure", "lattice", "grid", "tol", "seed", "samples", "points", "point",
                        "support", "geodesics", "duration", "steps", "output", "slice"});

  JobConfig job;
  if (!root.contains("dimension")) schema_error("/dimension", "missing required field");
  job.dimension = get_int(root["dimension"], "/dimension");
  if (job.dimension < 2 || job.dimension > 3) schema_error("/dimension", "must be 2 or 3");
  const int n = job.dimension;

  if (root.contains("metric")) job.metric = parse_metric(root["metric"], n);
  if (root.contains("measure")) job.measure = parse_measure(root["measure"]);
  if (root.contains("lattice")) job.lattice = get_matrix(root["lattice"], "/lattice", n);
  if (root.contains("grid")) {
    job.grid = get_int(root["grid"], "/grid");
    if (job.grid < 4) schema_error("/grid", "must be at least 4");
  }
  if (root.contains("tol")) {
    job.tol = get_number(root["tol"], "/tol");
    if (!(job.tol > 0.0)) schema_error("/tol", "must be positive");
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) schema_error("/seed", "expected a nonnegative integer");
    job.seed = root["seed"].get<std::uint64_t>();
  }
  if (root.contains("samples")) {
    job.samples = get_int(root["samples"], "/samples");
    if (job.samples < 1) schema_error("/samples", "must be positive");
  }
  if (root.contains("points")) {
    if (!root["points"].is_array()) schema_error("/points", "expected an array of points");
    for (std::size_t i = 0; i < root["points"].size(); ++i) {
      job.points.push_back(get_vector(root["points"][i], "/points/" + std::to_string(i), n));
    }
  }
  if (root.contains("point")) job.point = get_vector(root["point"], "/point", n);
  if (root.contains("support")) {
    const json& s = require_object(root["support"], "/support");
    allow_keys(s, "/support", {"lo", "hi"});
    if (!s.contains("lo") || !s.contains("hi")) schema_error("/support", "needs 'lo' and 'hi'");
    job.support = SupportBox{get_vector(s["lo"], "/support/lo", n), get_vector(s["hi"], "/support/hi", n)};
    if (((job.support->hi - job.support->lo).array() <= 0.0).any()) schema_error("/support", "needs lo < hi");
  }
  if (root.contains("geodesics")) {
    if (!root["geodesics"].is_array()) schema_error("/geodesics", "expected an array");
    for (std::size_t i = 0; i < root["geodesics"].size(); ++i) {
      const std::string ptr = "/geodesics/" + std::to_string(i);
      const json& g = require_object(root["geodesics"][i], ptr);
      allow_keys(g, ptr, {"label", "x0", "v0"});
      if (!g.contains("x0") || !g.contains("v0")) schema_error(ptr, "needs 'x0' and 'v0'");
      GeodesicSpec spec{g.contains("label") ? get_string(g["label"], ptr + "/label") : "curve " + std::to_string(i + 1),
                        get_vector(g["x0"], ptr + "/x0", n), get_vector(g["v0"], ptr + "/v0", n)};
      job.geodesics.push_back(std::move(spec));
    }
  }
  if (root.contains("duration")) {
    job.duration = get_number(root["duration"], "/duration");
    if (!(job.duration > 0.0)) schema_error("/duration", "must be positive");
  }
  if (root.contains("steps")) {
    job.steps = get_int(root["steps"], "/steps");
    if (job.steps < 1) schema_error("/steps", "must be positive");
  }
  if (root.contains("slice")) {
    const json& s = root["slice"];
    if (!s.is_array() || s.size() != 2) schema_error("/slice", "expected two coordinate indices");
    const int a = get_int(s[0], "/slice/0"), b = get_int(s[1], "/slice/1");
    if (a < 1 || b < 1 || a > n || b > n || a == b) schema_error("/slice", "indices must be distinct and within 1..dimension");
    job.slice = std::make_pair(a - 1, b - 1);
  }
  if (root.contains("output")) job.output = get_string(root["output"], "/output");
  return job;
}

JobConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

OneDensity build_metric(const JobConfig& job) {
  if (!job.metric) throw ConfigError("/metric: this command needs a metric definition");
  const MetricSpec& spec = *job.metric;
  if (!spec.catalog.empty()) {
    try {
      OneDensity F = catalog_metric(spec.catalog, job.dimension, spec.params);
      if (job.lattice) {
        DensityTraits t = F.traits();
        t.lattice = Lattice(*job.lattice);
        F = F.with_traits(t);
      }
      return F;
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("/metric: ") + e.what());
    }
  }
  try {
    const MetricExpr expr = parse(spec.expr, job.dimension);
    DensityTraits t;
    t.reversible = spec.reversible;
    if (job.lattice) t.lattice = Lattice(*job.lattice);
    return as_one_density(expr, t, spec.smooth);
  } catch (const Error& e) {
    throw ConfigError(std::string("/metric/expr: ") + e.what());
  }
}

HyperplaneMeasure build_measure(const JobConfig& job) {
  if (!job.measure) throw ConfigError("/measure: this command needs a measure definition");
  try {
    const MetricExpr expr = parse(job.measure->expr, job.dimension);
    std::optional<Lattice> lattice;
    if (job.lattice) lattice = Lattice(*job.lattice);
    return HyperplaneMeasure(job.dimension, as_measure_density(expr), job.measure->symmetric, lattice);
  } catch (const Error& e) {
    throw ConfigError(std::string("/measure/expr: ") + e.what());
  }
}

}  // namespace projfinsler::cli
