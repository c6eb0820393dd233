#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "privscore/psc.hpp"
#include "privscore/rng.hpp"
#include "privscore/scm.hpp"
#include "privscore/shapley.hpp"
#include "fixtures.hpp"

using namespace privscore;

TEST_CASE("route names round-trip") {
  CHECK(route_from_string("real") == Route::real);
  CHECK(route_from_string("warped") == Route::warped);
  CHECK(to_string(Route::warped) == "warped");
  CHECK_THROWS_AS(route_from_string("sideways"), InputError);
}

TEST_CASE("shapley order and subset formulas agree on random games") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(5));
    std::vector<double> values(std::size_t{1} << k);
    for (double& v : values) v = rng.uniform() * 4.0 - 2.0;
    values[0] = 0.0;

    const std::vector<double> a = shapley_order(values, k);
    const std::vector<double> b = shapley_subset(values, k);
    REQUIRE(a.size() == static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      CHECK(std::abs(a[j] - b[j]) <= 1e-12);
      sum += a[j];
    }
    // Efficiency: shares sum to v(full) - v(empty).
    CHECK(sum == Catch::Approx(values.back()).margin(1e-12));
  }
}

TEST_CASE("shapley axioms on crafted games") {
  SECTION("dummy player gets exactly zero") {
    // Player 1 never changes the value: v depends on bit 0 only. All values
    // are dyadic, so the zero is exact, not approximate.
    std::vector<double> values{0.0, 0.75, 0.0, 0.75};
    const std::vector<double> g = shapley_order(values, 2);
    CHECK(g[0] == 0.75);
    CHECK(g[1] == 0.0);
  }
  SECTION("symmetric players split evenly") {
    // v({0}) = v({1}) = 0.25, v({0,1}) = 1: interchangeable players.
    std::vector<double> values{0.0, 0.25, 0.25, 1.0};
    const std::vector<double> g = shapley_subset(values, 2);
    CHECK(g[0] == g[1]);
    CHECK(g[0] == 0.5);
  }
  SECTION("additive games attribute their summands") {
    // v(S) = 2 per bit 0 + 3 per bit 1 + 5 per bit 2.
    std::vector<double> values(8);
    for (std::uint32_t m = 0; m < 8; ++m) {
      values[m] = 2.0 * ((m >> 0) & 1) + 3.0 * ((m >> 1) & 1) + 5.0 * ((m >> 2) & 1);
    }
    const std::vector<double> g = shapley_order(values, 3);
    CHECK(g[0] == 2.0);
    CHECK(g[1] == 3.0);
    CHECK(g[2] == 5.0);
  }
}

TEST_CASE("sampled shapley telescopes to exact efficiency") {
  // Even with few samples, every sampled permutation telescopes, so the sum
  // of shares equals v(full) - v(empty) exactly (up to fp addition order).
  const int k = 12;
  auto value_of_mask = [](std::uint32_t mask) {
    double v = 0.0;
    for (int j = 0; j < 12; ++j) {
      if ((mask >> j) & 1) v += 0.1 * (j + 1);
    }
    // A nonlinear kicker so sampling actually matters.
    return v + (mask == ((1u << 12) - 1) ? 0.5 : 0.0);
  };
  const std::vector<double> g = shapley_sampled(value_of_mask, k, 40, Rng(9));
  const double sum = std::accumulate(g.begin(), g.end(), 0.0);
  CHECK(sum == Catch::Approx(value_of_mask((1u << 12) - 1)).margin(1e-12));
}

TEST_CASE("coalition values anchor at zero for the empty set") {
  const WorldModels worlds = fixtures::worlds();
  const std::vector<double> row = fixtures::row();
  CHECK(value_v(worlds, row, Coalition::empty()) == 0.0);
  CHECK(value_vtilde(worlds, row, Coalition::empty()) == 0.0);
}

TEST_CASE("worked decomposition example, real route") {
  const WorldModels worlds = fixtures::worlds();
  const std::vector<double> row = fixtures::row();
  const PscResult r = psc(worlds, row, Route::real);

  REQUIRE(r.gamma.size() == 2);
  CHECK(r.gamma[0] == Catch::Approx(-0.25).margin(1e-12));
  CHECK(r.gamma[1] == Catch::Approx(-0.12).margin(1e-12));
  CHECK(r.delta0 == Catch::Approx(-0.30).margin(1e-12));
  CHECK(r.delta_g == Catch::Approx(0.10).margin(1e-12));
  CHECK(r.delta_xtilde == Catch::Approx(-0.40).margin(1e-12));
  CHECK(r.ps == Catch::Approx(-0.67).margin(1e-12));
  CHECK(r.route == Route::real);

  // Reconstruction identities.
  CHECK(r.gamma[0] + r.gamma[1] + r.delta0 == Catch::Approx(r.ps).margin(1e-12));
  CHECK(r.delta_g + r.delta_xtilde == Catch::Approx(r.delta0).margin(1e-12));
}

TEST_CASE("warped route reaches the same privilege score") {
  const WorldModels worlds = fixtures::worlds();
  const std::vector<double> row = fixtures::row();
  const PscResult real_route = psc(worlds, row, Route::real);
  const PscResult warped_route = psc(worlds, row, Route::warped);

  CHECK(warped_route.ps == Catch::Approx(real_route.ps).margin(1e-12));
  CHECK(warped_route.route == Route::warped);
  const double sum = warped_route.gamma[0] + warped_route.gamma[1] + warped_route.delta0;
  CHECK(sum == Catch::Approx(warped_route.ps).margin(1e-12));

  // The fixture's warped model is constant, so phi-hat cannot react to any
  // coalition: both warped-route shares are exactly zero (dummy axiom) and
  // the whole score sits in the intercept.
  CHECK(warped_route.gamma[0] == 0.0);
  CHECK(warped_route.gamma[1] == 0.0);
  CHECK(warped_route.delta0 == Catch::Approx(-0.67).margin(1e-12));
}

TEST_CASE("decomposition identities hold across random fitted pipelines") {
  Rng rng(555);
  for (int trial = 0; trial < 12; ++trial) {
    const std::uint64_t seed = rng.next_u64() % 100000;
    const PairedSample s = sample_paired({Scenario::sc, 120, seed});
    const CausalDag dag = validate(scenario_dag(), s.real_rows);
    const WorldModels worlds =
        build_worlds(s.real_rows, dag, ModelKind::logistic, TuningBudget{});

    for (std::size_t r = 0; r < 5; ++r) {
      const std::vector<double> row = s.real_rows.row(r);
      const PsEstimate e = estimate_ps(worlds, row);
      for (Route route : {Route::real, Route::warped}) {
        const PscResult p = psc(worlds, row, route);
        CHECK(std::abs(p.ps - e.delta_hat) <= 1e-12);
        const double parts = p.gamma[0] + p.gamma[1] + p.delta_g + p.delta_xtilde;
        CHECK(std::abs(parts - p.ps) <= 1e-12);
        CHECK(std::abs(p.delta_g + p.delta_xtilde - p.delta0) <= 1e-12);
        CHECK(std::abs(p.delta_g - (worlds.train_mean_real - worlds.train_mean_warped)) <=
              1e-12);
      }
    }
  }
}

TEST_CASE("interval construction per component matches the scalar builder") {
  std::vector<PscResult> reps;
  const std::vector<double> base = fixtures::replicates();
  for (std::size_t i = 0; i < base.size(); ++i) {
    PscResult r;
    r.ps = base[i];
    r.delta_g = base[i] * 0.5;
    r.delta_xtilde = base[i] * 0.25;
    r.gamma = {base[i] * 0.125, base[i] * 0.125};
    reps.push_back(r);
  }
  const PscIntervals ci = psc_intervals_from_replicates(reps, 0.05);
  CHECK(ci.ps.lower == Catch::Approx(-0.9).margin(1e-12));
  CHECK(ci.ps.upper == Catch::Approx(-0.55).margin(1e-12));
  CHECK(ci.delta_g.lower == Catch::Approx(-0.45).margin(1e-12));
  CHECK(ci.delta_g.upper == Catch::Approx(-0.275).margin(1e-12));
  REQUIRE(ci.gamma.size() == 2);
  CHECK(ci.gamma[0].lower == Catch::Approx(-0.1125).margin(1e-12));
  CHECK(ci.gamma[1].upper == Catch::Approx(-0.06875).margin(1e-12));
}

TEST_CASE("full-pipeline interval bootstrap runs end to end") {
  const PairedSample s = sample_paired({Scenario::sc, 150, 61});
  const CausalDag dag = validate(scenario_dag(), s.real_rows);
  const std::vector<double> row = s.real_rows.row(1);
  const PscIntervals ci = bootstrap_psc(s.real_rows, dag, row, 25, 0.1, 61,
                                        Route::real, ModelKind::logistic);
  CHECK(ci.ps.lower <= ci.ps.upper);
  CHECK(ci.delta_g.lower <= ci.delta_g.upper);
  REQUIRE(ci.gamma.size() == 2);
  CHECK(ci.ps.replicates.size() == 25);
  CHECK_THROWS_AS(bootstrap_psc(s.real_rows, dag, row, 10, 0.1, 61, Route::real,
                                ModelKind::logistic),
                  InputError);
}

TEST_CASE("feature-level shapley explains the score against a background") {
  const PairedSample s = sample_paired({Scenario::sc, 200, 67});
  const CausalDag dag = validate(scenario_dag(), s.real_rows);
  const WorldModels worlds =
      build_worlds(s.real_rows, dag, ModelKind::logistic, TuningBudget{});

  // Pick a disadvantaged row so the score is materially nonzero.
  std::size_t target_row = 0;
  for (std::size_t r = 0; r < s.real_rows.n_rows(); ++r) {
    if (s.real_rows.at(r, 0) == 0.0) { target_row = r; break; }
  }
  const std::vector<double> row = s.real_rows.row(target_row);
  const StandardShapleyResult res =
      standard_shapley(worlds, row, s.real_rows, 64, 5);

  REQUIRE(res.eta.size() == 4);  // A, C, X1, X2
  const double total =
      res.eta0 + std::accumulate(res.eta.begin(), res.eta.end(), 0.0);
  const PsEstimate e = estimate_ps(worlds, row);
  // Local accuracy: intercept plus shares reconstruct the score exactly
  // (4 features -> exact subset enumeration on both worlds).
  CHECK(total == Catch::Approx(e.delta_hat).margin(1e-12));
}
