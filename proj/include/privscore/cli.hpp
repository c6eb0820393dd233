#pragma once

#include <cstdint>
#include <string>

namespace privscore {

// Fully resolved run settings: defaults, then config-file values, then
// command-line flags, strongest last.
struct RunConfig {
  std::string command;
  std::string scenario = "sc";
  std::size_t n = 1000;
  int iters = 50;
  int bootstrap = 100;
  double alpha = -1.0;  // resolved per command: 0.1 simulate, 0.05 otherwise
  std::uint64_t seed = 1;
  double split = 0.8;
  std::string model = "random_forest";
  int tune_evaluations = 25;
  int tune_folds = 3;
  std::string route = "real";
  std::string quantiles_over = "iterations";
  int workers = 1;
  int pfi_repeats = 5;
  bool means_at_warped = false;
  std::string data;
  std::string dag;
  std::string columns;
  std::string recipe;
  std::string out = "out";
  std::string id;
};

// Simulation study: paired scenario samples over `iters` iterations, per-row
// decompositions with bootstrap CIs on the test split, scored against the
// generating-process oracles. Writes metrics.csv/json, samples.csv, and
// config.json into the output directory.
void cmd_simulate(const RunConfig& config);

// Real-data audit: ingest CSV (+ column spec or recipe), split, fit worlds,
// and write per-row scores.csv, subgroups.json, regression.txt/json, and
// config.json.
void cmd_audit(const RunConfig& config);

// Per-individual report from a finished audit run directory: explain_<id>.json
// and explain_<id>.svg.
void cmd_explain(const RunConfig& config);

// Permutation feature importances of the privilege score; writes pfi.csv and
// config.json.
void cmd_pfi(const RunConfig& config);

// Parses arguments, applies the config file, dispatches, and maps errors to
// exit codes: 0 success, 1 computation failure, 2 input error.
int run_cli(int argc, char** argv);

}  // namespace privscore
