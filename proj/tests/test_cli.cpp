#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

// End-to-end tests drive the installed binary (path via PRIVSCORE_CLI_PATH,
// set by CMake) through std::system, exactly as a user would.

namespace {

std::string cli_path() { return PRIVSCORE_CLI_PATH; }

int run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void shell(const std::string& cmd) { REQUIRE(std::system(cmd.c_str()) == 0); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

std::vector<std::string> header_of(const std::string& csv) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : csv.substr(0, csv.find('\n'))) {
    if (ch == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(field);
  return fields;
}

// A small synthetic credit-style dataset with one pa, one confounder, two
// features, and a binary outcome; signal strong enough that fits are stable.
void write_audit_inputs(const std::string& dir) {
  std::ostringstream csv;
  csv << "grp,inc,ownhome,employed,approved\n";
  unsigned state = 12345;
  auto next = [&] {
    state = state * 1103515245u + 12345u;
    return (state >> 16) % 1000;
  };
  for (int i = 0; i < 120; ++i) {
    const int grp = next() < 550 ? 1 : 0;
    const double inc = 20.0 + (next() % 400) / 10.0;
    const int ownhome = next() < (grp ? 700u : 350u) ? 1 : 0;
    const int employed = next() < (grp ? 800u : 550u) ? 1 : 0;
    const unsigned p = 150 + 350 * grp + 200 * ownhome + 150 * employed;
    const int approved = next() < p ? 1 : 0;
    csv << grp << "," << inc << "," << ownhome << "," << employed << ","
        << approved << "\n";
  }
  write_file(dir + "/credit.csv", csv.str());
  write_file(dir + "/credit_cols.json", R"({
    "grp": {"kind": "binary", "role": "pa"},
    "inc": {"kind": "numeric", "role": "confounder"},
    "ownhome": {"kind": "binary", "role": "feature"},
    "employed": {"kind": "binary", "role": "feature"},
    "approved": {"kind": "binary", "role": "target"}
  })");
  write_file(dir + "/credit_dag.json", R"({
    "nodes": ["grp", "inc", "ownhome", "employed", "approved"],
    "edges": [["grp", "ownhome"], ["grp", "employed"], ["grp", "approved"],
              ["inc", "ownhome"], ["inc", "employed"],
              ["ownhome", "approved"], ["employed", "approved"]],
    "pa": "grp", "target": "approved", "advantaged_level": 1
  })");
}

const std::string kAuditArgs =
    " --data /tmp/ps_cli/credit.csv --columns /tmp/ps_cli/credit_cols.json"
    " --dag /tmp/ps_cli/credit_dag.json --model logistic --bootstrap 25 --seed 5";

}  // namespace

TEST_CASE("help and version-style invocations") {
  CHECK(run("--help") == 0);
  CHECK(run("simulate --help") == 0);
  CHECK(run("") == 2);              // missing subcommand
  CHECK(run("frobnicate") == 2);    // unknown subcommand
  CHECK(run("simulate --no-such-flag") == 2);
}

TEST_CASE("simulate writes its artifact set deterministically") {
  shell("rm -rf /tmp/ps_sim1 /tmp/ps_sim2");
  const std::string args =
      "simulate --scenario sc --n 120 --iters 2 --bootstrap 20 --model logistic "
      "--seed 9 --out ";
  REQUIRE(run(args + "/tmp/ps_sim1") == 0);
  REQUIRE(run(args + "/tmp/ps_sim2") == 0);

  for (const char* name : {"metrics.csv", "metrics.json", "samples.csv", "config.json"}) {
    const std::string a = slurp(std::string("/tmp/ps_sim1/") + name);
    const std::string b = slurp(std::string("/tmp/ps_sim2/") + name);
    CHECK(a == b);  // byte-for-byte reproducibility
    CHECK_FALSE(a.empty());
  }

  const std::string metrics = slurp("/tmp/ps_sim1/metrics.csv");
  CHECK(header_of(metrics) ==
        std::vector<std::string>{"component", "metric", "mean", "q05", "q95"});
  CHECK(metrics.find("ps,bias,") != std::string::npos);
  CHECK(metrics.find("gamma_1,coverage,") != std::string::npos);
  CHECK(metrics.find("delta_x,ci_width,") != std::string::npos);

  const auto parsed = nlohmann::json::parse(slurp("/tmp/ps_sim1/metrics.json"));
  CHECK(parsed["scenario"] == "sc");
  CHECK(parsed["iterations"] == 2);
  CHECK(parsed["components"].is_object());

  const auto config = nlohmann::json::parse(slurp("/tmp/ps_sim1/config.json"));
  CHECK(config["command"] == "simulate");
  CHECK(config["alpha"] == 0.1);  // simulate default
  CHECK(config["seed"] == 9);

  const std::string samples = slurp("/tmp/ps_sim1/samples.csv");
  CHECK(samples.rfind("iter,id,pred_real,pred_warped,true_ps,ps,ps_lo,ps_hi", 0) == 0);
}

TEST_CASE("simulate rejects bad inputs with exit code 2") {
  CHECK(run("simulate --scenario venus") == 2);
  CHECK(run("simulate --scenario sc --bootstrap 10") == 2);
  CHECK(run("simulate --scenario sc --n 5") == 2);
  CHECK(run("simulate --scenario sc --alpha 1.5") == 2);
  CHECK(run("simulate --scenario sc --quantiles-over bananas") == 2);
  CHECK(run("simulate --scenario sc --route diagonal") == 2);
  CHECK(run("simulate --scenario sc --model svm") == 2);
}

TEST_CASE("audit produces scores, subgroups, and the regression report") {
  shell("rm -rf /tmp/ps_cli && mkdir -p /tmp/ps_cli");
  write_audit_inputs("/tmp/ps_cli");
  REQUIRE(run("audit" + kAuditArgs + " --out /tmp/ps_cli/run") == 0);

  const std::string scores = slurp("/tmp/ps_cli/run/scores.csv");
  const std::vector<std::string> header = header_of(scores);
  // id, the five input columns, warped copies of the two warped features,
  // both predictions, five components x (value, lo, hi), then metadata.
  CHECK(header.front() == "id");
  auto has = [&](const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
  };
  for (const char* name :
       {"grp", "inc", "ownhome", "employed", "approved", "ownhome_w", "employed_w",
        "pred_real", "pred_warped", "ps", "ps_lo", "ps_hi", "delta_g", "delta_x",
        "gamma_1", "gamma_2", "alpha", "B", "route"}) {
    INFO(name);
    CHECK(has(name));
  }
  // 120 rows * 0.2 test fraction = 24 data lines.
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 25);

  const auto groups = nlohmann::json::parse(slurp("/tmp/ps_cli/run/subgroups.json"));
  CHECK(groups.contains("all"));
  CHECK(groups.contains("advantaged"));
  CHECK(groups.contains("disadvantaged"));
  CHECK(groups["all"]["n"].get<int>() == 24);
  CHECK(groups["advantaged"]["n"].get<int>() + groups["disadvantaged"]["n"].get<int>() == 24);
  CHECK(groups["all"]["components"].size() == 5);

  const std::string regression = slurp("/tmp/ps_cli/run/regression.txt");
  CHECK(regression.find("Estimate") != std::string::npos);
  CHECK(regression.find("grp") != std::string::npos);
  const auto reg_json = nlohmann::json::parse(slurp("/tmp/ps_cli/run/regression.json"));
  CHECK(reg_json["coefficients"].size() == 5);  // intercept + 4 model features

  const auto config = nlohmann::json::parse(slurp("/tmp/ps_cli/run/config.json"));
  CHECK(config["command"] == "audit");
  CHECK(config["alpha"] == 0.05);  // non-simulate default
}

TEST_CASE("audit error handling") {
  shell("mkdir -p /tmp/ps_cli");
  write_audit_inputs("/tmp/ps_cli");
  CHECK(run("audit --columns /tmp/ps_cli/credit_cols.json --dag /tmp/ps_cli/credit_dag.json") ==
        2);  // no --data
  CHECK(run("audit --data /tmp/ps_cli/credit.csv") == 2);  // no columns/recipe
  CHECK(run("audit --data /tmp/ps_cli/missing.csv --columns /tmp/ps_cli/credit_cols.json "
            "--dag /tmp/ps_cli/credit_dag.json") == 2);
  CHECK(run("audit" + kAuditArgs + " --bootstrap 5 --out /tmp/ps_cli/bad") == 2);
}

TEST_CASE("explain renders one row of an audit run") {
  // Reuse the audit run from the earlier test; recreate it if test order
  // ever changes.
  if (run("explain --out /tmp/ps_cli/run --id probe") == 2 &&
      !std::ifstream("/tmp/ps_cli/run/scores.csv").good()) {
    shell("rm -rf /tmp/ps_cli && mkdir -p /tmp/ps_cli");
    write_audit_inputs("/tmp/ps_cli");
    REQUIRE(run("audit" + kAuditArgs + " --out /tmp/ps_cli/run") == 0);
  }
  const std::string scores = slurp("/tmp/ps_cli/run/scores.csv");
  const std::string second_line = scores.substr(scores.find('\n') + 1);
  const std::string id = second_line.substr(0, second_line.find(','));
  REQUIRE_FALSE(id.empty());

  REQUIRE(run("explain --out /tmp/ps_cli/run --id " + id) == 0);
  const auto record =
      nlohmann::json::parse(slurp("/tmp/ps_cli/run/explain_" + id + ".json"));
  CHECK(record["id"] == id);
  CHECK(record["ps"].contains("value"));
  CHECK(record["ps"].contains("lower"));
  CHECK(record["gamma_2"].contains("upper"));

  const std::string svg = slurp("/tmp/ps_cli/run/explain_" + id + ".svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("decomposition") != std::string::npos);
  CHECK(svg.find("gamma_1") != std::string::npos);

  CHECK(run("explain --out /tmp/ps_cli/run --id not_a_row") == 2);
  CHECK(run("explain --out /tmp/ps_cli/run") == 2);            // missing --id
  CHECK(run("explain --out /tmp/ps_cli/nowhere --id 3") == 2); // no audit there
}

TEST_CASE("pfi ranks model features by importance") {
  shell("mkdir -p /tmp/ps_cli");
  write_audit_inputs("/tmp/ps_cli");
  REQUIRE(run("pfi" + kAuditArgs + " --repeats 3 --out /tmp/ps_cli/pfi_run") == 0);
  const std::string csv = slurp("/tmp/ps_cli/pfi_run/pfi.csv");
  CHECK(header_of(csv) == std::vector<std::string>{"feature", "importance"});
  CHECK(csv.find("grp,") != std::string::npos);
  CHECK(csv.find("inc,") != std::string::npos);
  CHECK(csv.find("ownhome,") != std::string::npos);
  CHECK(csv.find("employed,") != std::string::npos);
  // Importances are MSE gaps, hence non-negative.
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    const double value = std::stod(line.substr(line.find(',') + 1));
    CHECK(value >= 0.0);
  }
}

TEST_CASE("config files feed flags, and explicit flags win") {
  shell("rm -rf /tmp/ps_cfg && mkdir -p /tmp/ps_cfg");
  write_file("/tmp/ps_cfg/run.json", R"({
    "scenario": "sc",
    "n": 120,
    "iters": 1,
    "bootstrap": 20,
    "model": "logistic",
    "seed": 4,
    "out": "/tmp/ps_cfg/from_config"
  })");
  REQUIRE(run("simulate --config /tmp/ps_cfg/run.json") == 0);
  const auto a = nlohmann::json::parse(slurp("/tmp/ps_cfg/from_config/config.json"));
  CHECK(a["n"] == 120);
  CHECK(a["seed"] == 4);

  // A flag passed on the command line beats the config file's value.
  REQUIRE(run("simulate --config /tmp/ps_cfg/run.json --seed 6 --out /tmp/ps_cfg/override") == 0);
  const auto b = nlohmann::json::parse(slurp("/tmp/ps_cfg/override/config.json"));
  CHECK(b["seed"] == 6);
  CHECK(b["n"] == 120);

  // Unknown keys and type mismatches are input errors.
  write_file("/tmp/ps_cfg/bad_key.json", R"({"scenario": "sc", "turbo": true})");
  CHECK(run("simulate --config /tmp/ps_cfg/bad_key.json") == 2);
  write_file("/tmp/ps_cfg/bad_type.json", R"({"n": "many"})");
  CHECK(run("simulate --config /tmp/ps_cfg/bad_type.json") == 2);
  write_file("/tmp/ps_cfg/bad_syntax.json", "{nope");
  CHECK(run("simulate --config /tmp/ps_cfg/bad_syntax.json") == 2);
  CHECK(run("simulate --config /tmp/ps_cfg/does_not_exist.json") == 2);
}

TEST_CASE("a config emitted by one run reproduces it exactly") {
  shell("rm -rf /tmp/ps_rep1 /tmp/ps_rep2");
  REQUIRE(run("simulate --scenario sm --n 120 --iters 1 --bootstrap 20 "
              "--model logistic --seed 13 --out /tmp/ps_rep1") == 0);
  // Replay from the emitted config; only the output directory moves.
  REQUIRE(run("simulate --config /tmp/ps_rep1/config.json --out /tmp/ps_rep2") == 0);
  CHECK(slurp("/tmp/ps_rep1/metrics.csv") == slurp("/tmp/ps_rep2/metrics.csv"));
  CHECK(slurp("/tmp/ps_rep1/samples.csv") == slurp("/tmp/ps_rep2/samples.csv"));
}
