#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "privscore/dataset.hpp"
#include "fixtures.hpp"

using namespace privscore;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("/tmp/privscore_test_") + name;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("ingestion invariants reject malformed tables") {
  SECTION("empty table") {
    DatasetTable t(fixtures::columns(), 0);
    CHECK_THROWS_AS(t.check_ingestion_invariants(), InputError);
  }
  SECTION("no pa column") {
    auto specs = fixtures::columns();
    specs[0].role = ColumnRole::feature;
    DatasetTable t(specs, 1);
    t.set_row(0, std::vector<double>{0, 20, 0, 0, 1});
    CHECK_THROWS_AS(t.check_ingestion_invariants(), InputError);
  }
  SECTION("two target columns") {
    auto specs = fixtures::columns();
    specs[2].role = ColumnRole::target;
    DatasetTable t(specs, 1);
    t.set_row(0, std::vector<double>{0, 20, 0, 0, 1});
    CHECK_THROWS_AS(t.check_ingestion_invariants(), InputError);
  }
  SECTION("non 0/1 value in a binary column") {
    DatasetTable t(fixtures::columns(), 1);
    t.set_row(0, std::vector<double>{0.5, 20, 0, 0, 1});
    CHECK_THROWS_AS(t.check_ingestion_invariants(), InputError);
  }
  SECTION("the worked fixture passes") {
    CHECK_NOTHROW(fixtures::table().check_ingestion_invariants());
  }
}

TEST_CASE("column lookup and role helpers") {
  const DatasetTable t = fixtures::table();
  CHECK(t.column_index("X1") == 2);
  CHECK(t.column_index("nope") == -1);
  CHECK(t.require_column("Y") == 4);
  CHECK_THROWS_AS(t.require_column("nope"), InputError);
  CHECK(t.pa_column() == 0);
  CHECK(t.target_column() == 4);
  CHECK(t.model_feature_columns() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("model feature columns skip ignore-role columns") {
  auto specs = fixtures::columns();
  specs.push_back({"id", ColumnKind::numeric, ColumnRole::ignore});
  DatasetTable t(specs, 2);
  t.set_row(0, std::vector<double>{0, 20, 0, 0, 1, 101});
  t.set_row(1, std::vector<double>{1, 21, 1, 1, 0, 102});
  CHECK(t.model_feature_columns() == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("select_rows picks rows in the given order") {
  const DatasetTable t = fixtures::table();
  const DatasetTable s = t.select_rows({3, 0, 3});
  REQUIRE(s.n_rows() == 3);
  CHECK(s.row(0) == t.row(3));
  CHECK(s.row(1) == t.row(0));
  CHECK(s.row(2) == t.row(3));
  CHECK(s.columns().size() == t.columns().size());
}

TEST_CASE("split is a deterministic partition with clamped sizes") {
  const DatasetTable t = fixtures::table();
  const SplitIndices a = split(t, 0.8, 7);
  const SplitIndices b = split(t, 0.8, 7);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train.size() == 16);
  CHECK(a.test.size() == 4);

  std::vector<int> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (int i = 0; i < 20; ++i) CHECK(all[i] == i);

  const SplitIndices c = split(t, 0.8, 8);
  CHECK(c.train != a.train);

  // Extreme fractions still leave at least one row on each side.
  CHECK(split(t, 0.01, 1).train.size() == 1);
  CHECK(split(t, 0.99, 1).test.size() == 1);
  CHECK_THROWS_AS(split(t, 0.0, 1), InputError);
  CHECK_THROWS_AS(split(t, 1.0, 1), InputError);
}

TEST_CASE("csv round-trip preserves values and quoting") {
  std::vector<ColumnSpec> specs{
      {"a,n", ColumnKind::binary, ColumnRole::pa},
      {"note \"q\"", ColumnKind::numeric, ColumnRole::confounder},
      {"y", ColumnKind::binary, ColumnRole::target},
  };
  DatasetTable t(specs, 2);
  t.set_row(0, std::vector<double>{1, -3.125, 0});
  t.set_row(1, std::vector<double>{0, 7.5, 1});

  const std::string path = temp_path("roundtrip.csv");
  write_csv(t, path);
  const DatasetTable back = load_csv(path, specs);
  REQUIRE(back.n_rows() == 2);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.at(r, c) == t.at(r, c));
  std::remove(path.c_str());
}

TEST_CASE("load_csv accepts any header order and rejects missing columns") {
  const std::string path = temp_path("order.csv");
  write_file(path, "y,c,a\r\n1,2.5,0\r\n0,3.5,1\r\n");
  std::vector<ColumnSpec> specs{
      {"a", ColumnKind::binary, ColumnRole::pa},
      {"c", ColumnKind::numeric, ColumnRole::confounder},
      {"y", ColumnKind::binary, ColumnRole::target},
  };
  const DatasetTable t = load_csv(path, specs);
  CHECK(t.column(0).name == "a");
  CHECK(t.at(0, 0) == 0.0);
  CHECK(t.at(0, 1) == 2.5);
  CHECK(t.at(0, 2) == 1.0);

  std::vector<ColumnSpec> missing = specs;
  missing.push_back({"z", ColumnKind::numeric, ColumnRole::feature});
  CHECK_THROWS_AS(load_csv(path, missing), InputError);
  std::remove(path.c_str());
}

TEST_CASE("load_csv rejects non-numeric cells and ragged rows") {
  std::vector<ColumnSpec> specs{
      {"a", ColumnKind::binary, ColumnRole::pa},
      {"y", ColumnKind::binary, ColumnRole::target},
  };
  const std::string path = temp_path("bad.csv");
  write_file(path, "a,y\n1,oops\n");
  CHECK_THROWS_AS(load_csv(path, specs), InputError);
  write_file(path, "a,y\n1\n");
  CHECK_THROWS_AS(load_csv(path, specs), InputError);
  std::remove(path.c_str());
}

TEST_CASE("column spec files parse kinds, roles, and order") {
  const std::string path = temp_path("cols.json");
  write_file(path, R"({
    "race": {"kind": "binary", "role": "pa"},
    "income": {"kind": "numeric", "role": "confounder"},
    "rate": {"kind": "numeric", "role": "feature"},
    "approved": {"kind": "binary", "role": "target"},
    "rowid": {"kind": "numeric", "role": "ignore"}
  })");
  const std::vector<ColumnSpec> specs = load_column_specs(path);
  REQUIRE(specs.size() == 5);
  CHECK(specs[0].name == "race");
  CHECK(specs[0].kind == ColumnKind::binary);
  CHECK(specs[0].role == ColumnRole::pa);
  CHECK(specs[1].name == "income");
  CHECK(specs[4].role == ColumnRole::ignore);

  write_file(path, R"({"race": {"kind": "tristate", "role": "pa"}})");
  CHECK_THROWS_AS(load_column_specs(path), InputError);
  std::remove(path.c_str());
}

TEST_CASE("recipe ingestion decodes raw mortgage cells and drops bad rows") {
  const std::string path = temp_path("raw_hmda.csv");
  write_file(path,
             "action_taken,derived_race,applicant_sex,applicant_age_above_62,"
             "loan_amount,debt_to_income_ratio,loan_purpose\n"
             "1,White,1,No,250000,20%-<30%,1\n"   // kept: advantaged, approved
             "3,Black or African American,2,Yes,100000,50%-60%,4\n"  // kept
             "1,White,1,No,150000,37,1\n"         // kept: plain numeric dti
             "1,White,1,No,150000,Exempt,1\n"     // dropped: unmappable dti
             "1,White,1,No,,30%-<36%,1\n");       // dropped: missing amount
  std::size_t rejected = 0;
  const DatasetTable t = load_recipe_csv(path, Recipe::hmda, &rejected);
  CHECK(rejected == 2);
  REQUIRE(t.n_rows() == 3);
  CHECK_NOTHROW(t.check_ingestion_invariants());

  const int race = t.require_column("race");
  const int action = t.require_column("action");
  const int debt = t.require_column("debt");
  const int age = t.require_column("age");
  const int sex = t.require_column("sex");
  const int purpose = t.require_column("purpose");
  CHECK(t.column(race).role == ColumnRole::pa);
  CHECK(t.column(action).role == ColumnRole::target);

  CHECK(t.at(0, race) == 1.0);    // White -> advantaged level
  CHECK(t.at(1, race) == 0.0);
  CHECK(t.at(0, action) == 1.0);  // originated
  CHECK(t.at(1, action) == 0.0);
  CHECK(t.at(0, debt) == 1.0);    // dti 25 < 36
  CHECK(t.at(1, debt) == 0.0);    // dti 55
  CHECK(t.at(2, debt) == 0.0);    // dti 37
  CHECK(t.at(0, age) == 0.0);
  CHECK(t.at(1, age) == 1.0);
  CHECK(t.at(0, sex) == 1.0);     // male code
  CHECK(t.at(1, sex) == 0.0);
  CHECK(t.at(0, purpose) == 1.0); // home purchase
  CHECK(t.at(1, purpose) == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("recipe ingestion decodes raw law-school cells") {
  const std::string path = temp_path("raw_law.csv");
  write_file(path,
             "race,ugpa,lsat,pass_bar\n"
             "White,3.5,40,P\n"
             "Black,3.1,33,F\n"
             "Hispanic,2.9,,P\n");  // dropped: missing lsat
  std::size_t rejected = 0;
  const DatasetTable t = load_recipe_csv(path, Recipe::lawschool, &rejected);
  CHECK(rejected == 1);
  REQUIRE(t.n_rows() == 2);
  CHECK(t.at(0, t.require_column("race")) == 1.0);
  CHECK(t.at(1, t.require_column("race")) == 0.0);
  CHECK(t.at(0, t.require_column("pass")) == 1.0);
  CHECK(t.at(1, t.require_column("pass")) == 0.0);
  CHECK(t.at(1, t.require_column("ugpa")) == 3.1);
  CHECK(t.at(1, t.require_column("lsat")) == 33.0);
  std::remove(path.c_str());
}

TEST_CASE("apply_recipe passes encoded tables through unchanged") {
  const std::string path = temp_path("raw_law2.csv");
  write_file(path, "race,ugpa,lsat,pass_bar\nWhite,3.5,40,P\nBlack,3.1,33,F\n");
  const DatasetTable t = load_recipe_csv(path, Recipe::lawschool, nullptr);
  const DatasetTable again = apply_recipe(t, Recipe::lawschool);
  REQUIRE(again.n_rows() == t.n_rows());
  for (std::size_t r = 0; r < t.n_rows(); ++r) CHECK(again.row(r) == t.row(r));
  std::remove(path.c_str());
}

TEST_CASE("recipe names parse and bad ones are rejected") {
  CHECK(recipe_from_string("hmda") == Recipe::hmda);
  CHECK(recipe_from_string("lawschool") == Recipe::lawschool);
  CHECK_THROWS_AS(recipe_from_string("census"), InputError);
}
