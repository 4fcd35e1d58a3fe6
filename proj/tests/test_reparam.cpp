#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "balopt/reparam.hpp"

using namespace balopt;

namespace {

HyperConfig random_config(std::mt19937_64& rng) {
  return sample_log_uniform(default_space_3d(), rng);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("to_reparam maps the unit configuration to the origin") {
  const auto a = preset_matrix("balance");
  const auto r = to_reparam({1.0, 1.0, 1.0}, a);
  REQUIRE(r[0] == 0.0);
  REQUIRE(r[1] == 0.0);
  REQUIRE(r[2] == 0.0);
}

TEST_CASE("to_reparam applies the balance matrix to log coordinates") {
  const double e = std::exp(1.0);
  const auto r = to_reparam({e, e, e}, preset_matrix("balance"));
  // A * (1,1,1) = (-1+1, 1+1, 1)
  CHECK(r[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(r[1] == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(r[2] == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("identity matrix reparameterization is the componentwise log") {
  const auto r = to_reparam({2.0, 1.0, 1.0}, preset_matrix("identity"));
  CHECK(r[0] == Catch::Approx(0.6931471805599453).epsilon(1e-15));
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
}

TEST_CASE("from_reparam at the origin recovers the unit configuration") {
  for (const char* name : {"balance", "identity", "theory"}) {
    const auto h = from_reparam({0.0, 0.0, 0.0}, preset_matrix(name));
    CHECK(h.lambda_p_rate == 1.0);
    CHECK(h.lambda_e_rate == 1.0);
    CHECK(h.batch_size == 1.0);
  }
}

TEST_CASE("from_reparam inverts the balance system") {
  // Hand inversion of (-x+y, x+y, z) = (0,2,1) gives x = y = z = 1.
  const double e = std::exp(1.0);
  const auto h = from_reparam({0.0, 2.0, 1.0}, preset_matrix("balance"));
  CHECK(rel_err(h.lambda_p_rate, e) < 1e-14);
  CHECK(rel_err(h.lambda_e_rate, e) < 1e-14);
  CHECK(rel_err(h.batch_size, e) < 1e-14);
}

TEST_CASE("round-trip through the balance matrix is the identity") {
  const HyperConfig h{0.008, 2.0, 64.0};
  const auto back = to_reparam(h, preset_matrix("balance"));
  const auto h2 = from_reparam(back, preset_matrix("balance"));
  CHECK(rel_err(h2.lambda_p_rate, h.lambda_p_rate) < 1e-12);
  CHECK(rel_err(h2.lambda_e_rate, h.lambda_e_rate) < 1e-12);
  CHECK(rel_err(h2.batch_size, h.batch_size) < 1e-12);
}

TEST_CASE("preset determinants") {
  CHECK(preset_matrix("balance").determinant() == -2.0);
  CHECK(preset_matrix("theory").determinant() == -1.0);
  CHECK(preset_matrix("identity").determinant() == 1.0);
  REQUIRE_THROWS_AS(preset_matrix("orthogonal"), UnknownPreset);
}

TEST_CASE("bijectivity over random configurations and all presets") {
  std::mt19937_64 rng(7);
  for (const char* name : {"balance", "identity", "theory"}) {
    const auto a = preset_matrix(name);
    for (int i = 0; i < 1000; ++i) {
      const auto h = random_config(rng);
      const auto h2 = from_reparam(to_reparam(h, a), a);
      REQUIRE(rel_err(h2.lambda_p_rate, h.lambda_p_rate) < 1e-10);
      REQUIRE(rel_err(h2.lambda_e_rate, h.lambda_e_rate) < 1e-10);
      REQUIRE(rel_err(h2.batch_size, h.batch_size) < 1e-10);
    }
  }
}

TEST_CASE("logs turn componentwise products into sums") {
  std::mt19937_64 rng(11);
  const auto a = preset_matrix("balance");
  for (int i = 0; i < 200; ++i) {
    const auto h1 = random_config(rng);
    const auto h2 = random_config(rng);
    const HyperConfig prod{h1.lambda_p_rate * h2.lambda_p_rate,
                           h1.lambda_e_rate * h2.lambda_e_rate,
                           h1.batch_size * h2.batch_size};
    const auto lhs = to_reparam(prod, a);
    const auto r1 = to_reparam(h1, a);
    const auto r2 = to_reparam(h2, a);
    for (int k = 0; k < 3; ++k)
      REQUIRE(rel_err(lhs[k], r1[k] + r2[k]) < 1e-10);
  }
}

TEST_CASE("balance direction coordinate ignores joint scaling of both rates") {
  std::mt19937_64 rng(13);
  const auto a = preset_matrix("balance");
  for (double c : {1e-3, 0.5, 3.0, 40.0}) {
    const auto h = random_config(rng);
    const auto r = to_reparam(h, a);
    const auto scaled = to_reparam(
        {c * h.lambda_p_rate, c * h.lambda_e_rate, h.batch_size}, a);
    REQUIRE(rel_err(scaled[0], r[0]) < 1e-10);
  }
}

TEST_CASE("invalid configurations and singular matrices are rejected") {
  const auto a = preset_matrix("balance");
  CHECK_THROWS_AS(to_reparam({0.0, 1.0, 64.0}, a), InvalidConfig);
  CHECK_THROWS_AS(to_reparam({-1.0, 1.0, 64.0}, a), InvalidConfig);
  CHECK_THROWS_AS(
      to_reparam({std::numeric_limits<double>::quiet_NaN(), 1.0, 64.0}, a),
      InvalidConfig);

  ReparamMatrix crazy{{{{1e308, 1e308, 1e308}, {0, 1, 0}, {0, 0, 1}}}};
  CHECK_THROWS_AS(to_reparam({1e-6, 1e-6, 16.0}, crazy), InvalidConfig);

  ReparamMatrix singular{{{{1, 1, 0}, {1, 1, 0}, {0, 0, 1}}}};
  CHECK_THROWS_AS(from_reparam({0, 0, 0}, singular), SingularMatrix);
  CHECK_THROWS_AS(to_reparam({1, 1, 1}, singular), SingularMatrix);
}

TEST_CASE("contains honors closed bounds") {
  const auto space = default_space_3d();
  CHECK(contains(space, {1.0, 1.0, 64.0}));
  CHECK_FALSE(contains(space, {32.0, 1.0, 64.0}));
  CHECK(contains(space, {17.0, 1e-6, 16.0}));
}

TEST_CASE("search space validation") {
  SearchSpace bad{{{{1.0, 0.5}, {1e-6, 17.0}, {64.0, 64.0}}}};
  CHECK_THROWS_AS(validate(bad), InvalidConfig);
  SearchSpace nonpositive{{{{0.0, 1.0}, {1e-6, 17.0}, {64.0, 64.0}}}};
  CHECK_THROWS_AS(validate(nonpositive), InvalidConfig);

  const auto two_d = default_space_2d();
  CHECK(two_d.active(0));
  CHECK(two_d.active(1));
  CHECK_FALSE(two_d.active(2));
  CHECK(two_d.active_count() == 2);
}

TEST_CASE("search space parses from JSON and key=value text") {
  const auto from_json = parse_search_space(
      R"({"lambda_p": [1e-6, 17], "lambda_e": [1e-6, 17], "batch_size": 64})");
  CHECK(from_json.dims[0].lo == 1e-6);
  CHECK(from_json.dims[0].hi == 17.0);
  CHECK(from_json.dims[2].lo == 64.0);
  CHECK_FALSE(from_json.active(2));

  const auto from_kv = parse_search_space(
      "# tuning ranges\n"
      "lambda_p = 1e-6, 17\n"
      "lambda_e = 1e-6, 17\n"
      "batch_size = 16, 512\n");
  CHECK(from_kv.dims[2].lo == 16.0);
  CHECK(from_kv.dims[2].hi == 512.0);
  CHECK(from_kv.active_count() == 3);

  CHECK_THROWS_AS(parse_search_space("lambda_p = 1, 2\n"), FormatError);
  CHECK_THROWS_AS(
      parse_search_space(R"({"lambda_p": 1, "lambda_e": 1, "margin": 2})"),
      FormatError);
}

TEST_CASE("log-uniform sampling stays inside the space and is deterministic") {
  const auto space = default_space_2d();
  std::mt19937_64 rng_a(42), rng_b(42);
  for (int i = 0; i < 500; ++i) {
    const auto h = sample_log_uniform(space, rng_a);
    REQUIRE(contains(space, h));
    REQUIRE(h.batch_size == 64.0);
    const auto h2 = sample_log_uniform(space, rng_b);
    REQUIRE(h.lambda_p_rate == h2.lambda_p_rate);
    REQUIRE(h.lambda_e_rate == h2.lambda_e_rate);
  }
}

TEST_CASE("matrix parsing accepts presets and nine numbers") {
  const auto m = parse_matrix("1,0,0,0,2,0,0,0,4");
  CHECK(m.rows[1][1] == 2.0);
  CHECK(m.determinant() == 8.0);
  CHECK(parse_matrix("theory").determinant() == -1.0);
  CHECK_THROWS_AS(parse_matrix("1,2,3"), FormatError);
}
