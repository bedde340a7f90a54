#include "projfinsler/cli/commands.hpp"

#include "projfinsler/cli/config.hpp"
#include "projfinsler/convex_core.hpp"
#include "projfinsler/decomposition.hpp"
#include "projfinsler/geodesics.hpp"
#include "projfinsler/grassmannian.hpp"
#include "projfinsler/hamel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace projfinsler::cli {

namespace {

namespace fs = std::filesystem;

/// Everything a command needs: resolved config plus output helpers.
struct Job {
  JobConfig config;
  fs::path out_dir;
  bool quiet = false;
  std::ostream& out;

  int dim() const { return config.dimension; }
  double tol(double fallback) const { return config.tol > 0.0 ? config.tol : fallback; }
  int grid(int fallback) const { return config.grid > 0 ? config.grid : fallback; }
  int samples(int fallback) const { return config.samples > 0 ? config.samples : fallback; }

  Rng rng(const char* command) const {
    if (!config.seed) throw ConfigError(std::string("/seed: ") + command + " samples randomly and needs a seed");
    return Rng(*config.seed);
  }

  fs::path file(const std::string& name) const {
    fs::create_directories(out_dir);
    return out_dir / name;
  }

  void say(const std::string& line) const {
    if (!quiet) out << line << '\n';
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string vec_str(const Vec& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v(i));
    s += (i ? ", " : "") + std::string(buf);
  }
  return s + ")";
}

std::vector<std::string> names(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<double> row_of(std::initializer_list<const Vec*> vecs, std::initializer_list<double> tail) {
  std::vector<double> row;
  for (const Vec* v : vecs) row.insert(row.end(), v->data(), v->data() + v->size());
  row.insert(row.end(), tail);
  return row;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

int verdict(const Job& job, bool pass, const std::string& stage, std::ostream& err) {
  job.say(pass ? "PASS" : "FAIL");
  if (!pass) err << "failed stage: " << stage << '\n';
  return pass ? kExitPass : kExitMathFailure;
}

Vec cell_point(const OneDensity& F, Rng& rng) {
  const int n = F.dim();
  const Vec s = random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
  return F.lattice() ? F.lattice()->from_cell_coords(s) : s;
}

// ---------------------------------------------------------------------------

int verify_projective(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const double tol = job.tol(1e-5);
  const ResidualGrid grid = make_residual_grid(F, job.grid(8), 16);
  const HamelReport r = projectivity_report(F, grid, tol);
  Dataset csv{concat(concat(names("x", F.dim()), names("v", F.dim())), {"residual"}), {}};
  for (const auto& s : r.samples) csv.rows.push_back(row_of({&s.x, &s.v}, {s.residual}));
  write_csv(job.file("residuals.csv"), csv);
  job.say("grid: " + r.grid_description);
  job.say("max Hamel residual " + fmt(r.max_residual) + " at x = " + vec_str(r.worst_x) + ", v = " + vec_str(r.worst_v) +
          " (entry " + std::to_string(r.worst_i + 1) + std::to_string(r.worst_j + 1) + "), tol " + fmt(tol) +
          ", noise floor " + fmt(r.noise_floor));
  return verdict(job, r.pass(), "projectivity", err);
}

int crofton(const Job& job, std::ostream& err) {
  const HyperplaneMeasure mu = build_measure(job.config);
  const double tol = job.tol(1e-5);
  Rng rng = job.rng("crofton");
  const int n = job.dim();
  const FinslerMetric F = crofton_finsler(mu);
  const DistanceFn d = crofton_distance(mu);

  Dataset table{concat(concat(names("x", n), names("y", n)), {"d", "reverse_d"}), {}};
  double asymmetry = 0.0;
  for (int k = 0; k < job.samples(20); ++k) {
    const Vec x = random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
    const Vec y = random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
    const double dxy = d(x, y), dyx = d(y, x);
    asymmetry = std::max(asymmetry, std::abs(dxy - dyx));
    table.rows.push_back(row_of({&x, &y}, {dxy, dyx}));
  }
  write_csv(job.file("distances.csv"), table);
  job.say("distance table: " + std::to_string(table.rows.size()) + " pairs, max |d(x,y) - d(y,x)| = " + fmt(asymmetry));
  bool pass = asymmetry <= tol;

  if (job.config.metric) {
    const OneDensity G = build_metric(job.config);
    Dataset cmp{concat(concat(names("x", n), names("v", n)), {"crofton", "metric", "abs_diff"}), {}};
    double worst = 0.0;
    for (int k = 0; k < job.samples(20); ++k) {
      const Vec x = random_in_box(rng, Vec::Zero(n), Vec::Ones(n));
      const Vec v = random_unit_vector(rng, n);
      const double a = F(x, v), b = G(x, v);
      worst = std::max(worst, std::abs(a - b));
      cmp.rows.push_back(row_of({&x, &v}, {a, b, std::abs(a - b)}));
    }
    write_csv(job.file("comparison.csv"), cmp);
    job.say("Crofton metric vs configured metric: max difference " + fmt(worst) + ", tol " + fmt(tol));
    pass = pass && worst <= tol;
  }
  return verdict(job, pass, "crofton", err);
}

int decompose(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const double tol = job.tol(1e-4);
  DecompositionOptions options;
  options.per_axis = job.config.grid;
  try {
    const DecompositionResult r = job.config.support
                                      ? decompose_compact_support(F, job.config.support->lo, job.config.support->hi, tol, options)
                                      : decompose_periodic_projective(F, tol, options);
    write_decomposition(job.file("decomposition"), r);
    const auto& d = r.diagnostics;
    job.say("grid " + std::to_string(r.one_form.grid.per_axis()) + "^" + std::to_string(F.dim()) + ", tol " + fmt(tol));
    job.say("hamel_residual " + fmt(d.hamel_residual) + ", linearity_defect " + fmt(d.linearity_defect) +
            ", closedness_defect " + fmt(d.closedness_defect));
    job.say("path_independence_defect " + fmt(d.path_independence_defect) + ", reconstruction_defect " +
            fmt(d.reconstruction_defect) + ", max |beta| " + fmt(d.max_beta));
    return verdict(job, d.reconstruction_defect <= tol, "reconstruction", err);
  } catch (const DecompositionError& e) {
    job.say(std::string("rejected: ") + e.what());
    return verdict(job, false, e.stage(), err);
  }
}

int randers(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const double tol = job.tol(1e-4);
  const int n = F.dim();
  std::vector<Vec> points = job.config.points;
  if (points.empty()) {
    Rng rng = job.rng("randers");
    for (int k = 0; k < job.samples(4); ++k) points.push_back(cell_point(F, rng));
  }
  const Vec base = job.config.point.value_or(Vec::Zero(n));
  const RandersReport r = randers_test(F, base, points, tol, job.config.grid);
  Dataset csv{concat(concat(names("x", n), names("y", n)), concat({"residual"}, names("t", n))), {}};
  for (const auto& p : r.pairs) {
    std::vector<double> row = row_of({&p.x, &p.y}, {p.residual});
    row.insert(row.end(), p.translation.data(), p.translation.data() + n);
    csv.rows.push_back(std::move(row));
  }
  write_csv(job.file("randers.csv"), csv);
  job.say("co-disc pairs: " + std::to_string(r.pairs.size()) + ", max translate residual " + fmt(r.max_residual) + ", tol " + fmt(tol));
  if (r.pass()) {
    for (std::size_t k = 0; k < r.points.size(); ++k) job.say("beta" + vec_str(r.points[k]) + " = " + vec_str(r.beta[k]));
  }
  return verdict(job, r.pass(), "randers", err);
}

int axioms(const Job& job, std::ostream& err) {
  const int n = job.dim();
  const double tol = job.tol(1e-6);
  DistanceFn d;
  if (job.config.measure) {
    d = crofton_distance(build_measure(job.config));
  } else {
    const OneDensity F = build_metric(job.config);
    d = F.closed_form_distance() ? *F.closed_form_distance() : induced_distance_fn(F);
  }
  Rng rng = job.rng("axioms");
  const std::vector<PointTriple> triples = sample_triples(rng, n, job.samples(200));
  const AxiomReport r = metric_axioms_check(d, triples, tol);
  Dataset table{concat(concat(names("x", n), names("y", n)), {"d", "reverse_d"}), {}};
  for (const auto& t : triples) table.rows.push_back(row_of({&t.x, &t.z}, {d(t.x, t.z), d(t.z, t.x)}));
  write_csv(job.file("distances.csv"), table);
  job.say(std::to_string(r.n_triples) + " triples: nonnegativity " + fmt(r.nonnegativity) + ", identity " + fmt(r.identity) +
          ", min separation " + fmt(r.min_separation) + ", triangle " + fmt(r.triangle) + ", additivity " + fmt(r.additivity) +
          ", tol " + fmt(tol));
  return verdict(job, r.pass(), "axioms", err);
}

// Plane of the plot: the configured slice, or the only plane in 2D.
std::pair<int, int> plot_plane(const Job& job, const char* command) {
  if (job.config.slice) return *job.config.slice;
  if (job.dim() > 2) throw ConfigError(std::string("/slice: ") + command + " on 3D data needs a declared slice");
  return {0, 1};
}

int plot_ball(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const int n = F.dim();
  const auto [a, b] = plot_plane(job, "plot-ball");
  const Vec x = job.config.point.value_or(Vec::Zero(n));
  const int count = job.grid(256);
  const OneDensity G = restrict_to_plane(F, x, Vec::Unit(n, a), Vec::Unit(n, b));
  const SphereGrid circle = SphereGrid::circle(count);
  // Unit ball from the radial function, co-disc from the dual norm.
  const ConvexBody ball = body_from_norm(G, Vec::Zero(2), circle);
  Dataset unit{{"v1", "v2"}, {}}, codisc{{"xi1", "xi2"}, {}};
  for (int k = 0; k < circle.size(); ++k) {
    const Vec& u = circle.direction(k);
    const double r = 1.0 / G(Vec::Zero(2), u);
    unit.rows.push_back({r * u(0), r * u(1)});
    const double rho = 1.0 / ball.values()[k];
    codisc.rows.push_back({rho * u(0), rho * u(1)});
  }
  write_csv(job.file("ball.csv"), unit);
  write_csv(job.file("codisc.csv"), codisc);
  PlotStyle style;
  style.title = "unit ball at " + vec_str(x);
  write_text(job.file("ball.svg"), render_svg(unit, PlotKind::Ball, style));
  style.title = "co-disc at " + vec_str(x);
  write_text(job.file("codisc.svg"), render_svg(codisc, PlotKind::Ball, style));
  job.say("unit ball and co-disc at " + vec_str(x) + ": " + std::to_string(count) + " boundary samples");
  return verdict(job, true, "plot-ball", err);
}

int plot_geodesics(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const int n = F.dim();
  std::vector<GeodesicSpec> specs = job.config.geodesics;
  if (specs.empty()) {
    const Vec x0 = job.config.point.value_or(Vec::Constant(n, 0.5));
    const std::vector<Vec> dirs = sphere_directions(n, 8);
    for (std::size_t k = 0; k < dirs.size(); ++k) specs.push_back({"curve " + std::to_string(k + 1), x0, 0.3 * dirs[k]});
  }
  Dataset csv{concat({"curve", "t"}, names("x", n)), {}};
  Dataset plot{concat({"curve"}, names("x", n)), {}};
  PlotStyle style;
  style.title = "geodesics";
  if (job.config.slice) style.slice = job.config.slice;
  double worst = 0.0;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto trace = geodesic_shoot(F, specs[k].x0, specs[k].v0, job.config.duration, job.config.steps);
    const double dev = chord_deviation(trace);
    worst = std::max(worst, dev);
    job.say(specs[k].label + ": chord deviation " + fmt(dev));
    style.labels.push_back(specs[k].label);
    for (const auto& s : trace) {
      std::vector<double> row{static_cast<double>(k + 1), s.t};
      row.insert(row.end(), s.x.data(), s.x.data() + n);
      csv.rows.push_back(row);
      row.erase(row.begin() + 1);
      plot.rows.push_back(std::move(row));
    }
  }
  write_csv(job.file("geodesics.csv"), csv);
  write_text(job.file("geodesics.svg"), render_svg(plot, PlotKind::Curves, style));
  if (job.config.tol > 0.0) {
    job.say("max chord deviation " + fmt(worst) + ", tol " + fmt(job.config.tol));
    return verdict(job, worst <= job.config.tol, "straightness", err);
  }
  return verdict(job, true, "plot-geodesics", err);
}

int plot_residuals(const Job& job, std::ostream& err) {
  const OneDensity F = build_metric(job.config);
  const int n = F.dim();
  const auto [a, b] = plot_plane(job, "plot-residuals");
  const int N = job.grid(64);
  const Mat B = F.lattice() ? F.lattice()->basis() : Mat::Identity(n, n);
  const Vec origin = job.config.point.value_or(Vec::Zero(n));
  const std::vector<Vec> dirs = sphere_directions(n, n == 2 ? 8 : 16);
  Dataset csv{concat(concat(names("x", n), names("v", n)), {"residual"}), {}};
  Dataset heat{{"x" + std::to_string(a + 1), "x" + std::to_string(b + 1), "residual"}, {}};
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const Vec x = origin + B.col(a) * ((i + 0.5) / N) + B.col(b) * ((j + 0.5) / N);
      double worst = -1.0;
      Vec worst_v = dirs.front();
      for (const Vec& v : dirs) {
        const double r = hamel_residual(F, x, v).cwiseAbs().maxCoeff();
        if (r > worst) {
          worst = r;
          worst_v = v;
        }
      }
      csv.rows.push_back(row_of({&x, &worst_v}, {worst}));
      heat.rows.push_back({x(a), x(b), worst});
    }
  }
  write_csv(job.file("residuals.csv"), csv);
  PlotStyle style;
  style.title = "Hamel residual";
  write_text(job.file("residuals.svg"), render_svg(heat, PlotKind::Heatmap, style));
  job.say("residual heatmap on a " + std::to_string(N) + "x" + std::to_string(N) + " grid");
  return verdict(job, true, "plot-residuals", err);
}

using CommandFn = std::function<int(const Job&, std::ostream&)>;

const std::map<std::string, CommandFn>& commands() {
  static const std::map<std::string, CommandFn> table{
      {"verify-projective", verify_projective}, {"crofton", crofton},         {"decompose", decompose},
      {"randers", randers},                     {"axioms", axioms},           {"plot-ball", plot_ball},
      {"plot-geodesics", plot_geodesics},       {"plot-residuals", plot_residuals}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"verify-projective", "crofton",   "decompose",      "randers",
                                              "axioms",            "plot-ball", "plot-geodesics", "plot-residuals"};
  return names;
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::string text;
  for (std::size_t i = 0; i < data.columns.size(); ++i) text += (i ? "," : "") + data.columns[i];
  text += '\n';
  char buf[40];
  for (const auto& row : data.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g", row[i]);
      text += (i ? "," : "") + std::string(buf);
    }
    text += '\n';
  }
  write_text(path, text);
}

int run(const std::string& command, const RunOptions& options, std::ostream& out, std::ostream& err) {
  const auto it = commands().find(command);
  if (it == commands().end()) {
    err << "unknown command '" << command << "'\n";
    return kExitConfigError;
  }
  try {
    JobConfig config = load_config(options.config);
    if (options.tol) {
      if (!(*options.tol > 0.0)) throw ConfigError("--tol must be positive");
      config.tol = *options.tol;
    }
    if (options.grid) {
      if (*options.grid < 4) throw ConfigError("--grid must be at least 4");
      config.grid = *options.grid;
    }
    if (options.seed) config.seed = *options.seed;
    const fs::path out_dir = options.out ? *options.out : fs::path(config.output);
    const Job job{std::move(config), out_dir, options.quiet, out};
    return it->second(job, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << command << " failed: " << e.what() << '\n';
    return kExitMathFailure;
  }
}

}  // namespace projfinsler::cli
