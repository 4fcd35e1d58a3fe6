#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "balopt/objective.hpp"

using namespace balopt;

namespace {

PerformanceGrid demo_grid_2x2() {
  PerformanceGrid g;
  g.axes = {{{1.0, 4.0}, {1.0, 4.0}, {64.0}}};
  g.scores = {0.0, 1.0, 1.0, 2.0};  // (1,1)=0 (1,4)=1 (4,1)=1 (4,4)=2
  return g;
}

PerformanceGrid random_grid(std::mt19937_64& rng) {
  PerformanceGrid g;
  g.axes[0] = {1e-3, 1e-2, 0.1, 1.0, 10.0};
  g.axes[1] = {0.5, 1.0, 2.0, 4.0};
  g.axes[2] = {16.0, 64.0, 256.0};
  g.scores.resize(5 * 4 * 3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (auto& s : g.scores) s = dist(rng);
  g.metric_name = "r-map";
  g.dataset_tag = "demo";
  return g;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("interpolation is exact at every grid node") {
  std::mt19937_64 rng(41);
  const auto g = random_grid(rng);
  for (size_t i = 0; i < g.axes[0].size(); ++i)
    for (size_t j = 0; j < g.axes[1].size(); ++j)
      for (size_t k = 0; k < g.axes[2].size(); ++k) {
        const HyperConfig h{g.axes[0][i], g.axes[1][j], g.axes[2][k]};
        REQUIRE(grid_interpolate(g, h) == g.at(i, j, k));
      }
}

TEST_CASE("log-space midpoint interpolates linearly") {
  PerformanceGrid g;
  g.axes = {{{1.0, 4.0}, {1.0}, {64.0}}};
  g.scores = {0.2, 0.6};
  // log-midpoint of 1 and 4 is 2.
  CHECK(grid_interpolate(g, {2.0, 1.0, 64.0}) ==
        Catch::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("bilinear example on the 2x2x1 grid") {
  const auto g = demo_grid_2x2();
  CHECK(grid_interpolate(g, {2.0, 2.0, 64.0}) ==
        Catch::Approx(1.0).epsilon(1e-14));
  // Corners are exact.
  CHECK(grid_interpolate(g, {1.0, 1.0, 64.0}) == 0.0);
  CHECK(grid_interpolate(g, {4.0, 4.0, 64.0}) == 2.0);
}

TEST_CASE("queries outside the hull are refused, never extrapolated") {
  const auto g = demo_grid_2x2();
  CHECK_THROWS_AS(grid_interpolate(g, {8.0, 2.0, 64.0}), OutOfDomain);
  CHECK_THROWS_AS(grid_interpolate(g, {2.0, 0.5, 64.0}), OutOfDomain);
  CHECK_THROWS_AS(grid_interpolate(g, {2.0, 2.0, 65.0}), OutOfDomain);
  // Tiny roundoff at the hull is tolerated.
  CHECK(grid_interpolate(g, {2.0, 2.0, 64.0 * (1.0 + 1e-13)}) ==
        Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("interpolation is monotone between adjacent nodes") {
  PerformanceGrid g;
  g.axes = {{{1.0, 2.0, 8.0}, {1.0}, {64.0}}};
  g.scores = {0.1, 0.5, 0.7};
  double prev = -1.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const double x = std::exp(std::log(1.0) + t * (std::log(8.0) - 0.0));
    const double v = grid_interpolate(g, {x, 1.0, 64.0});
    REQUIRE(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("grid CSV round-trips exactly") {
  std::mt19937_64 rng(43);
  const auto g = random_grid(rng);
  const auto path = temp_path("balopt_grid_roundtrip.csv");
  grid_save(g, path);
  const auto loaded = grid_load(path);
  std::filesystem::remove(path);
  REQUIRE(loaded.axes == g.axes);
  REQUIRE(loaded.scores == g.scores);
  CHECK(loaded.metric_name == "r-map");
  CHECK(loaded.dataset_tag == "demo");
}

TEST_CASE("grid CSV accepts shuffled rows and rejects broken files") {
  const std::string header = "lambda_p,lambda_e,batch_size,score\n";
  // Rows out of order load fine.
  const auto g = parse_grid_csv(header +
                                "4,4,64,2\n"
                                "1,4,64,1\n"
                                "4,1,64,1\n"
                                "1,1,64,0\n");
  CHECK(g.at(0, 0, 0) == 0.0);
  CHECK(g.at(1, 1, 0) == 2.0);

  // Missing one combination.
  CHECK_THROWS_AS(parse_grid_csv(header + "1,1,64,0\n1,4,64,1\n4,1,64,1\n"),
                  FormatError);
  // Duplicate node.
  CHECK_THROWS_WITH(
      parse_grid_csv(header + "1,1,64,0\n1,1,64,0.5\n"),
      Catch::Matchers::ContainsSubstring("row 3") &&
          Catch::Matchers::ContainsSubstring("duplicate"));
  // Malformed cell carries its row number.
  CHECK_THROWS_WITH(parse_grid_csv(header + "1,1,64,0\n1,oops,64,1\n"),
                    Catch::Matchers::ContainsSubstring("row 3"));
  // Bad header.
  CHECK_THROWS_AS(parse_grid_csv("a,b,c,d\n1,1,64,0\n"), FormatError);
  // Nonpositive coordinates cannot be log-interpolated.
  CHECK_THROWS_AS(parse_grid_csv(header + "0,1,64,0\n"), FormatError);
}

TEST_CASE("bounding space matches the axis hull") {
  const auto g = demo_grid_2x2();
  const auto space = g.bounding_space();
  CHECK(space.dims[0].lo == 1.0);
  CHECK(space.dims[0].hi == 4.0);
  CHECK_FALSE(space.active(2));
  CHECK(contains(space, {2.0, 2.0, 64.0}));
}

TEST_CASE("synthetic landscape peaks at its optimum") {
  const auto s = synthetic_preset("ridge");
  CHECK(synthetic_eval(s, s.optimum) == Catch::Approx(0.85).epsilon(1e-14));
  std::mt19937_64 rng(47);
  auto positive = s;
  positive.curvatures = {1.0, 1.0, 1.0};
  for (int i = 0; i < 100; ++i) {
    const auto h = sample_log_uniform(default_space_3d(), rng);
    REQUIRE(synthetic_eval(positive, h) <= positive.peak_score);
  }
}

TEST_CASE("joint scaling of both rates moves only the weak ridge direction") {
  const auto s = synthetic_preset("ridge");
  for (double c : {0.5, 2.0, 4.0}) {
    const HyperConfig h{c * s.optimum.lambda_p_rate,
                        c * s.optimum.lambda_e_rate, s.optimum.batch_size};
    // Balance coordinate unchanged; joint coordinate moves by sqrt(2)*log c.
    const double expected =
        s.peak_score - s.curvatures[1] * 2.0 * std::log(c) * std::log(c);
    REQUIRE(synthetic_eval(s, h) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("doubling a curvature doubles the deficit along its direction") {
  auto s = synthetic_preset("ridge");
  auto doubled = s;
  doubled.curvatures[1] *= 2.0;
  const HyperConfig h{2.0 * s.optimum.lambda_p_rate,
                      2.0 * s.optimum.lambda_e_rate, s.optimum.batch_size};
  const double deficit = s.peak_score - synthetic_eval(s, h);
  const double deficit2 = doubled.peak_score - synthetic_eval(doubled, h);
  CHECK(deficit2 == Catch::Approx(2.0 * deficit).epsilon(1e-12));
}

TEST_CASE("unperturbed landscapes are concave in log coordinates") {
  std::mt19937_64 rng(53);
  const auto s = synthetic_preset("ridge");
  const auto space = default_space_3d();
  for (int i = 0; i < 200; ++i) {
    const auto a = sample_log_uniform(space, rng);
    const auto b = sample_log_uniform(space, rng);
    const HyperConfig mid{std::sqrt(a.lambda_p_rate * b.lambda_p_rate),
                          std::sqrt(a.lambda_e_rate * b.lambda_e_rate),
                          std::sqrt(a.batch_size * b.batch_size)};
    REQUIRE(synthetic_eval(s, mid) >=
            0.5 * (synthetic_eval(s, a) + synthetic_eval(s, b)) - 1e-12);
  }
}

TEST_CASE("perturbation is deterministic, bounded, and seed-dependent") {
  auto s = synthetic_preset("ridge");
  s.perturb_amplitude = 0.05;
  s.perturb_seed = 7;
  const auto base = synthetic_preset("ridge");
  std::mt19937_64 rng(59);
  bool seeds_differ = false;
  auto other_seed = s;
  other_seed.perturb_seed = 8;
  for (int i = 0; i < 50; ++i) {
    const auto h = sample_log_uniform(default_space_3d(), rng);
    const double v1 = synthetic_eval(s, h);
    const double v2 = synthetic_eval(s, h);
    REQUIRE(v1 == v2);
    REQUIRE(std::abs(v1 - synthetic_eval(base, h)) <= 0.05 + 1e-12);
    seeds_differ |= v1 != synthetic_eval(other_seed, h);
  }
  CHECK(seeds_differ);
}

TEST_CASE("landscape construction validates and normalizes") {
  SyntheticLandscape raw;
  raw.directions = preset_matrix("balance");  // rows not unit length
  const auto s = make_landscape(raw);
  for (const auto& row : s.directions.rows) {
    const double norm =
        std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    REQUIRE(norm == Catch::Approx(1.0).epsilon(1e-14));
  }
  SyntheticLandscape bad;
  bad.curvatures = {-1.0, 0.0, 0.0};
  CHECK_THROWS_AS(make_landscape(bad), InvalidConfig);
  CHECK_THROWS_AS(synthetic_preset("volcano"), UnknownPreset);
}

TEST_CASE("landscape JSON parsing") {
  const auto s = parse_landscape_json(R"({
    "optimum": [0.01, 1.0, 64],
    "peak": 0.9,
    "curvatures": [1.5, 0.2, 0.1],
    "matrix": "balance",
    "perturb_amplitude": 0.02,
    "perturb_seed": 3
  })");
  CHECK(s.optimum.lambda_p_rate == 0.01);
  CHECK(s.peak_score == 0.9);
  CHECK(s.perturb_seed == 3);
  CHECK(synthetic_eval(s, s.optimum) ==
        Catch::Approx(0.9).margin(0.02 + 1e-12));
  CHECK_THROWS_AS(parse_landscape_json("{"), FormatError);
  CHECK_THROWS_AS(parse_landscape_json(R"({"curvatures": [1]})"), FormatError);
}

TEST_CASE("external command evaluation") {
  ExternalCommandSpec spec;
  spec.command = "echo 0.5";
  CHECK(external_eval(spec, {1.0, 1.0, 64.0}) == 0.5);

  spec.command = "printf 'starting up\\nprogress 10%%\\n0.73\\n'";
  CHECK(external_eval(spec, {1.0, 1.0, 64.0}) == 0.73);

  spec.command = "exit 1";
  CHECK_THROWS_AS(external_eval(spec, {1.0, 1.0, 64.0}), CommandFailed);

  spec.command = "echo not-a-number";
  CHECK_THROWS_AS(external_eval(spec, {1.0, 1.0, 64.0}), ParseFailed);

  spec.command = "true";
  CHECK_THROWS_AS(external_eval(spec, {1.0, 1.0, 64.0}), ParseFailed);

  spec.command = "sleep 5; echo 1.0";
  spec.timeout_seconds = 0.2;
  CHECK_THROWS_AS(external_eval(spec, {1.0, 1.0, 64.0}), TimedOut);
}

TEST_CASE("hyperparameters reach the command environment") {
  ExternalCommandSpec spec;
  spec.command = "echo $BATCH_SIZE";
  CHECK(external_eval(spec, {1.0, 1.0, 63.2}) == 64.0);
  CHECK(external_eval(spec, {1.0, 1.0, 1.0}) == 2.0);
  CHECK(external_eval(spec, {1.0, 1.0, 2.9}) == 2.0);

  spec.command = "echo $LAMBDA_P";
  CHECK(external_eval(spec, {0.25, 1.0, 64.0}) == 0.25);

  spec.lambda_e_env = "MY_ENTROPY_RATE";
  spec.command = "echo $MY_ENTROPY_RATE";
  CHECK(external_eval(spec, {1.0, 2.5, 64.0}) == 2.5);
}

TEST_CASE("batch size rounding is even, at least 2, and idempotent") {
  CHECK(round_batch_size(63.2) == 64);
  CHECK(round_batch_size(64.0) == 64);
  CHECK(round_batch_size(65.0) == 66);
  CHECK(round_batch_size(1.0) == 2);
  CHECK(round_batch_size(0.1) == 2);
  for (double v : {3.7, 16.0, 100.49, 511.0})
    CHECK(round_batch_size(double(round_batch_size(v))) ==
          round_batch_size(v));
}

TEST_CASE("objective references resolve to backends") {
  const auto path = temp_path("balopt_objective_grid.csv");
  grid_save(demo_grid_2x2(), path);
  const auto loaded = load_objective("grid:" + path);
  std::filesystem::remove(path);
  REQUIRE(loaded.natural_space.has_value());
  CHECK(loaded.objective->evaluate({2.0, 2.0, 64.0}) ==
        Catch::Approx(1.0).epsilon(1e-14));

  const auto ridge = load_objective("synthetic:ridge");
  CHECK_FALSE(ridge.natural_space.has_value());
  CHECK(ridge.objective->evaluate({8e-3, 2.0, 64.0}) ==
        Catch::Approx(0.85).epsilon(1e-14));

  const auto cmd = load_objective("cmd:echo 0.25");
  CHECK(cmd.objective->evaluate({1.0, 1.0, 64.0}) == 0.25);

  CHECK_THROWS_AS(load_objective("nope"), FormatError);
  CHECK_THROWS_AS(load_objective("magic:x"), FormatError);
}
