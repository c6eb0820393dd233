#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "privscore/rng.hpp"
#include "privscore/scm.hpp"
#include "privscore/special.hpp"
#include "privscore/warp.hpp"
#include "fixtures.hpp"

using namespace privscore;

TEST_CASE("coalition bit operations") {
  CHECK(Coalition::empty().size() == 0);
  CHECK(Coalition::full(3).bits == 0b111);
  CHECK(Coalition::full(3).size() == 3);
  const Coalition s = Coalition::empty().with(2).with(0);
  CHECK(s.contains(0));
  CHECK_FALSE(s.contains(1));
  CHECK(s.contains(2));
  CHECK(s.size() == 2);
  CHECK(Coalition::from_mask(0b101).bits == s.bits);
}

TEST_CASE("fitted warper mirrors the dag's arrow structure") {
  const Warper w = fixtures::worlds().warper;
  CHECK(w.k() == 2);
  CHECK(w.arrows().children == std::vector<int>{2, 3});
  CHECK(w.warp_sequence() == std::vector<int>{2, 3});
  CHECK(w.feature_model(2).parent_names == std::vector<std::string>{"A", "C"});
  CHECK(w.target_model().parent_names == std::vector<std::string>{"A", "X1", "X2"});
}

TEST_CASE("binary features shift by the fitted group gap") {
  // The fixture is built so the saturated logit models give exact mean
  // shifts: X1 moves +0.6 and X2 moves +0.2 for a disadvantaged row.
  const Warper w = fixtures::worlds().warper;
  const std::vector<double> row = fixtures::row();  // A=0, X1=0, X2=0
  const std::vector<double> full = w.warp_row(row, Coalition::full(2));
  CHECK(full[0] == 0.0);  // pa itself is never warped
  CHECK(full[1] == row[1]);
  CHECK(full[2] == Catch::Approx(0.6).margin(1e-6));
  CHECK(full[3] == Catch::Approx(0.2).margin(1e-6));
  CHECK(full[4] == row[4]);
}

TEST_CASE("warping the empty coalition is the identity") {
  const Warper w = fixtures::worlds().warper;
  const std::vector<double> row = fixtures::row();
  CHECK(w.warp_row(row, Coalition::empty()) == row);
}

TEST_CASE("partial coalitions only touch their own features") {
  const Warper w = fixtures::worlds().warper;
  const std::vector<double> row = fixtures::row();
  const std::vector<double> only_x1 = w.warp_row(row, Coalition::from_mask(0b01));
  CHECK(only_x1[2] == Catch::Approx(0.6).margin(1e-6));
  CHECK(only_x1[3] == row[3]);
  const std::vector<double> only_x2 = w.warp_row(row, Coalition::from_mask(0b10));
  CHECK(only_x2[2] == row[2]);
  CHECK(only_x2[3] == Catch::Approx(0.2).margin(1e-6));
}

TEST_CASE("advantaged rows pass through bit for bit") {
  const Warper w = fixtures::worlds().warper;
  const DatasetTable t = fixtures::table();
  for (std::size_t r = 10; r < 20; ++r) {  // rows with A = 1
    const std::vector<double> row = t.row(r);
    CHECK(w.warp_row(row, Coalition::full(2)) == row);
  }
}

TEST_CASE("warping propagates through feature chains") {
  // A -> X1 -> X2 with X2 also fed by A: warping the A->X1 arrow changes the
  // parent mean X2 sees, even when X2's own arrow is outside the coalition.
  std::vector<ColumnSpec> specs{
      {"A", ColumnKind::binary, ColumnRole::pa},
      {"X1", ColumnKind::binary, ColumnRole::feature},
      {"X2", ColumnKind::binary, ColumnRole::feature},
      {"Y", ColumnKind::binary, ColumnRole::target},
  };
  DatasetTable t(specs, 40);
  for (std::size_t i = 0; i < 40; ++i) {
    const double a = i < 20 ? 0.0 : 1.0;
    // X1 tracks A loosely; X2 tracks X1.
    const double x1 = (a == 0.0) ? (i % 5 == 0 ? 1.0 : 0.0) : (i % 5 != 0 ? 1.0 : 0.0);
    const double x2 = (x1 == 1.0) ? (i % 2 == 0 ? 1.0 : 0.0) : (i % 7 == 0 ? 1.0 : 0.0);
    const double y = (i % 3 == 0) ? 1.0 : 0.0;
    const double row[] = {a, x1, x2, y};
    t.set_row(i, row);
  }
  CausalDag d;
  d.nodes = {"A", "X1", "X2", "Y"};
  d.edges = {{0, 1}, {1, 2}, {0, 3}, {1, 3}, {2, 3}};
  d.pa = 0;
  d.target = 3;
  d = validate(d, t);

  const Warper w = fit_warper(t, d);
  REQUIRE(w.k() == 1);  // only A -> X1 is a privilege arrow
  CHECK(w.warp_sequence() == std::vector<int>{1, 2});

  const std::vector<double> row{0.0, 0.0, 0.0, 0.0};
  const std::vector<double> warped = w.warp_row(row, Coalition::full(1));
  CHECK(warped[1] != row[1]);
  CHECK(warped[2] != row[2]);  // moved because its parent's mean moved
}

TEST_CASE("positive numeric features keep their conditional quantile") {
  // C ~ Gamma depends on A; warping must map a row's C to the same quantile
  // of the advantaged-level gamma fit, not mean-shift it.
  std::vector<ColumnSpec> specs{
      {"A", ColumnKind::binary, ColumnRole::pa},
      {"C", ColumnKind::numeric, ColumnRole::feature},
      {"Y", ColumnKind::binary, ColumnRole::target},
  };
  const std::size_t n = 4000;
  DatasetTable t(specs, n);
  Rng rng(13);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double scale = 2.0 * std::exp(0.1 + 0.8 * a);
    const double c = gamma_quantile(rng.uniform(), 10.0, scale);
    const double y = rng.bernoulli(0.3) ? 1.0 : 0.0;
    const double row[] = {a, c, y};
    t.set_row(i, row);
  }
  CausalDag d;
  d.nodes = {"A", "C", "Y"};
  d.edges = {{0, 1}, {0, 2}, {1, 2}};
  d.pa = 0;
  d.target = 2;
  d = validate(d, t);
  const Warper w = fit_warper(t, d);

  const std::vector<double> row{0.0, 22.0, 0.0};
  const std::vector<double> warped = w.warp_row(row, Coalition::full(1));
  // True quantile map multiplies the scale by exp(0.8) ~ 2.23; the fitted map
  // should land close with n = 4000.
  CHECK(warped[1] == Catch::Approx(22.0 * std::exp(0.8)).epsilon(0.06));
  CHECK(warped[1] > 22.0);

  // An advantaged row keeps its value exactly.
  const std::vector<double> adv{1.0, 50.0, 1.0};
  CHECK(w.warp_row(adv, Coalition::full(1)) == adv);
}

TEST_CASE("warp_training_set warps features and target for model training") {
  const Warper w = fixtures::worlds().warper;
  const DatasetTable t = fixtures::table();
  const DatasetTable warped = w.warp_training_set(t);
  REQUIRE(warped.n_rows() == t.n_rows());

  for (std::size_t r = 0; r < 10; ++r) {  // disadvantaged rows
    // Features move by the fitted shifts.
    CHECK(warped.at(r, 2) == Catch::Approx(t.at(r, 2) + 0.6).margin(1e-6));
    CHECK(warped.at(r, 3) == Catch::Approx(t.at(r, 3) + 0.2).margin(1e-6));
    // Soft labels stay inside [0,1].
    CHECK(warped.at(r, 4) >= 0.0);
    CHECK(warped.at(r, 4) <= 1.0);
  }
  for (std::size_t r = 10; r < 20; ++r) {  // advantaged rows
    CHECK(warped.row(r) == t.row(r));
  }
}

TEST_CASE("simulated-world warp narrows the group gap it aims at") {
  const PairedSample s = sample_paired({Scenario::sc, 1500, 19});
  const CausalDag d = validate(scenario_dag(), s.real_rows);
  const Warper w = fit_warper(s.real_rows, d);

  // Warped X2 means for disadvantaged rows should approach the advantaged
  // group's X2 mean (the warp's whole point).
  double adv = 0, dis_real = 0, dis_warp = 0;
  std::size_t n_adv = 0, n_dis = 0;
  for (std::size_t r = 0; r < s.real_rows.n_rows(); ++r) {
    const std::vector<double> row = s.real_rows.row(r);
    if (row[0] == 1.0) {
      adv += row[3];
      ++n_adv;
    } else {
      dis_real += row[3];
      dis_warp += w.warp_row(row, Coalition::full(2))[3];
      ++n_dis;
    }
  }
  adv /= static_cast<double>(n_adv);
  dis_real /= static_cast<double>(n_dis);
  dis_warp /= static_cast<double>(n_dis);
  CHECK(std::abs(dis_warp - adv) < std::abs(dis_real - adv));
}
