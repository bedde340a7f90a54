#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "projfinsler/cli/commands.hpp"
#include "projfinsler/cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace projfinsler;
using namespace projfinsler::cli;

namespace {

namespace fs = std::filesystem;

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A config file in a scratch directory, removed with the fixture.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("projfinsler_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path config(const std::string& text) const {
    const fs::path p = dir / "job.json";
    std::ofstream(p) << text;
    return p;
  }

  int run(const std::string& command, const std::string& text, std::string* err_text = nullptr) const {
    RunOptions o;
    o.config = config(text);
    o.out = dir / "out";
    o.quiet = true;
    std::ostringstream out, err;
    const int code = cli::run(command, o, out, err);
    if (err_text) *err_text = err.str();
    return code;
  }
};

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const JobConfig j = parse_config(R"({"dimension": 3, "metric": {"catalog": "randers_exact", "params": {"amplitude": 0.02}},
                                       "seed": 4, "slice": [1, 3], "points": [[0, 0, 1]]})");
  CHECK(j.dimension == 3);
  CHECK(j.metric->params.scalars.at("amplitude") == 0.02);
  CHECK(*j.seed == 4u);
  CHECK(j.slice->first == 0);
  CHECK(j.slice->second == 2);
  CHECK(j.points.size() == 1);

  CHECK(error_of("{\n  \"dimension\": 2,\n  \"metric\": }").rfind("line 3, column 13", 0) == 0);
  CHECK(error_of(R"({"metric": {"catalog": "euclidean"}})").rfind("/dimension", 0) == 0);
  CHECK(error_of(R"({"dimension": 2, "metric": {"catalog": "bogus"}})").rfind("/metric/catalog", 0) == 0);
  CHECK(error_of(R"({"dimension": 2, "points": [[0, 1], [2]]})").rfind("/points/1", 0) == 0);
  CHECK(error_of(R"({"dimension": 2, "tol": -1})").rfind("/tol", 0) == 0);
  CHECK(error_of(R"({"dimension": 2, "colour": 1})").rfind("/colour", 0) == 0);
  CHECK(error_of(R"j({"dimension": 2, "metric": {"catalog": "euclidean", "expr": "norm2(v)"}})j").rfind("/metric", 0) == 0);
}

TEST_CASE("metrics from configs") {
  const OneDensity F = build_metric(parse_config(R"({"dimension": 2, "metric": {"expr": "norm2(v) + 0.1*v1"}})"));
  CHECK(F((Vec(2) << 0, 0).finished(), (Vec(2) << 3, 4).finished()) == doctest::Approx(5.3));
  CHECK_THROWS_AS(build_metric(parse_config(R"({"dimension": 2, "metric": {"expr": "v1^2"}})")), ConfigError);
  CHECK_THROWS_AS(build_metric(parse_config(R"({"dimension": 2, "metric": {"expr": "v3"}})")), ConfigError);
  CHECK_THROWS_AS(build_metric(parse_config(R"({"dimension": 2})")), ConfigError);
  const OneDensity L = build_metric(parse_config(R"({"dimension": 2, "metric": {"catalog": "ellipse_norm"},
                                                     "lattice": [[2, 0], [0, 1]]})"));
  REQUIRE(L.lattice());
  CHECK(L.lattice()->basis()(0, 0) == 2.0);
}

TEST_CASE("svg rendering") {
  Dataset circle{{"v1", "v2"}, {}};
  for (int k = 0; k < 256; ++k) circle.rows.push_back({std::cos(2 * kPi * k / 256), std::sin(2 * kPi * k / 256)});
  const std::string ball = render_svg(circle, PlotKind::Ball);
  CHECK(count(ball, "<path") == 1);
  CHECK(count(ball, " Z\"") == 1);
  CHECK(count(ball, " L ") == 255);

  Dataset curves{{"curve", "x1", "x2"}, {{1, 0, 0}, {1, 1, 1}, {2, 0, 1}, {2, 1, 0}}};
  PlotStyle style;
  style.labels = {"first", "second"};
  const std::string two = render_svg(curves, PlotKind::Curves, style);
  CHECK(count(two, "<polyline") == 2);
  CHECK(count(two, "class=\"legend\"") == 2);
  CHECK(two.find(">first<") < two.find(">second<"));

  Dataset heat{{"x1", "x2", "r"}, {}};
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) heat.rows.push_back({i / 64.0, j / 64.0, std::sin(i * 0.1) * std::cos(j * 0.2)});
  double lo = 1e300, hi = -1e300;
  for (const auto& r : heat.rows) lo = std::min(lo, r[2]), hi = std::max(hi, r[2]);
  const std::string map = render_svg(heat, PlotKind::Heatmap);
  char buf[64];
  std::snprintf(buf, sizeof buf, "min = %.3e", lo);
  CHECK(map.find(buf) != std::string::npos);
  std::snprintf(buf, sizeof buf, "max = %.3e", hi);
  CHECK(map.find(buf) != std::string::npos);
  CHECK(count(map, "<rect") == 64 * 64 + 2);

  CHECK(render_svg(heat, PlotKind::Heatmap) == map);
  CHECK_THROWS_AS(render_svg(Dataset{{"a", "b"}, {}}, PlotKind::Ball), PreconditionError);
  CHECK_THROWS_AS(render_svg(Dataset{{"x1", "x2", "x3"}, {{0, 0, 0}}}, PlotKind::Ball), PreconditionError);
}

TEST_CASE("exit-code contract") {
  Scratch s("exit");
  CHECK(s.run("verify-projective", R"({"dimension": 2, "metric": {"catalog": "randers_exact"}})") == kExitPass);
  const std::string residuals = slurp(s.dir / "out" / "residuals.csv");
  CHECK(residuals.rfind("x1,x2,v1,v2,residual\n", 0) == 0);

  std::string err;
  CHECK(s.run("verify-projective", R"({"dimension": 2, "metric": {"catalog": "conformal_nonprojective"}})", &err) ==
        kExitMathFailure);
  CHECK(err.find("projectivity") != std::string::npos);

  CHECK(s.run("verify-projective", R"({"dimension": 2, "metric": {"catalog": "euclidean",}})") == kExitConfigError);
  CHECK(s.run("crofton", R"({"dimension": 2, "measure": {"expr": "0.5"}})", &err) == kExitConfigError);
  CHECK(err.find("/seed") != std::string::npos);
  CHECK(s.run("no-such-command", R"({"dimension": 2})") == kExitConfigError);

  RunOptions missing;
  missing.config = s.dir / "absent.json";
  std::ostringstream out, e2;
  CHECK(run("decompose", missing, out, e2) == kExitConfigError);
}

TEST_CASE("decompose writes a zero potential for a norm") {
  Scratch s("decompose");
  REQUIRE(s.run("decompose", R"({"dimension": 2, "metric": {"catalog": "ellipse_norm"}, "grid": 16})") == kExitPass);
  std::ifstream in(s.dir / "out" / "decomposition" / "potential.txt");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    double x1, x2, f;
    fields >> x1 >> x2 >> f;
    CHECK(f == 0.0);
    ++rows;
  }
  CHECK(rows == 16 * 16);
}

TEST_CASE("outputs are deterministic") {
  Scratch a("det_a"), b("det_b");
  const std::string job = R"({"dimension": 2, "measure": {"expr": "0.5"}, "metric": {"catalog": "euclidean"}, "seed": 5, "samples": 8})";
  REQUIRE(a.run("crofton", job) == kExitPass);
  REQUIRE(b.run("crofton", job) == kExitPass);
  CHECK(slurp(a.dir / "out" / "distances.csv") == slurp(b.dir / "out" / "distances.csv"));
  CHECK(slurp(a.dir / "out" / "comparison.csv") == slurp(b.dir / "out" / "comparison.csv"));

  const std::string plot = R"({"dimension": 2, "metric": {"catalog": "randers_exact"}})";
  REQUIRE(a.run("plot-ball", plot) == kExitPass);
  REQUIRE(b.run("plot-ball", plot) == kExitPass);
  CHECK(slurp(a.dir / "out" / "ball.svg") == slurp(b.dir / "out" / "ball.svg"));
  CHECK(count(slurp(a.dir / "out" / "ball.svg"), " L ") == 255);
}

TEST_CASE("3D plots need a slice") {
  Scratch s("slice");
  CHECK(s.run("plot-residuals", R"({"dimension": 3, "metric": {"catalog": "randers_exact"}, "grid": 8})") == kExitConfigError);
  CHECK(s.run("plot-residuals", R"({"dimension": 3, "metric": {"catalog": "randers_exact"}, "grid": 8, "slice": [1, 3]})") ==
        kExitPass);
  CHECK(s.run("plot-ball", R"({"dimension": 3, "metric": {"catalog": "randers_exact"}, "slice": [2, 3]})") == kExitPass);
}
