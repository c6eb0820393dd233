#include "privscore/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "privscore/analytics.hpp"
#include "privscore/charts.hpp"
#include "privscore/format.hpp"
#include "privscore/privilege.hpp"
#include "privscore/psc.hpp"
#include "privscore/rng.hpp"
#include "privscore/scm.hpp"
#include "privscore/stats.hpp"

namespace privscore {

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["scenario"] = cfg.scenario;
  j["n"] = cfg.n;
  j["iters"] = cfg.iters;
  j["bootstrap"] = cfg.bootstrap;
  j["alpha"] = round6(cfg.alpha);
  j["seed"] = cfg.seed;
  j["split"] = round6(cfg.split);
  j["model"] = cfg.model;
  j["tune_evaluations"] = cfg.tune_evaluations;
  j["tune_folds"] = cfg.tune_folds;
  j["route"] = cfg.route;
  j["quantiles_over"] = cfg.quantiles_over;
  j["workers"] = cfg.workers;
  j["pfi_repeats"] = cfg.pfi_repeats;
  j["means_at_warped"] = cfg.means_at_warped;
  j["data"] = cfg.data;
  j["dag"] = cfg.dag;
  j["columns"] = cfg.columns;
  j["recipe"] = cfg.recipe;
  j["out"] = cfg.out;
  j["id"] = cfg.id;
  return j;
}

void validate_config(RunConfig& cfg) {
  if (cfg.alpha < 0.0) cfg.alpha = cfg.command == "simulate" ? 0.1 : 0.05;
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must be in (0,1)");
  if (!(cfg.split > 0.0 && cfg.split < 1.0)) throw InputError("split must be in (0,1)");
  if (cfg.n < 10) throw InputError("n must be at least 10");
  if (cfg.iters < 1) throw InputError("iters must be at least 1");
  if (cfg.bootstrap < 20) throw InputError("bootstrap must be at least 20");
  if (cfg.workers < 1) throw InputError("workers must be at least 1");
  if (cfg.tune_evaluations < 1) throw InputError("tune_evaluations must be at least 1");
  if (cfg.tune_folds < 2) throw InputError("tune_folds must be at least 2");
  if (cfg.pfi_repeats < 1) throw InputError("pfi_repeats must be at least 1");
  model_kind_from_string(cfg.model);
  route_from_string(cfg.route);
  if (cfg.quantiles_over != "iterations" && cfg.quantiles_over != "individuals") {
    throw InputError("quantiles_over must be 'iterations' or 'individuals'");
  }
}

// Built-in analysis DAGs for the bundled ingestion recipes, keyed to the
// encoded column names.
std::string recipe_dag_text(Recipe recipe) {
  if (recipe == Recipe::hmda) {
    return R"({"nodes":["race","sex","age","amount","debt","purpose","action"],
"edges":[["race","amount"],["race","debt"],["race","purpose"],["race","action"],
["sex","amount"],["sex","debt"],["sex","purpose"],
["age","amount"],["age","debt"],["age","purpose"],
["amount","action"],["debt","action"],["purpose","action"]],
"pa":"race","target":"action","advantaged_level":1})";
  }
  return R"({"nodes":["race","ugpa","lsat","pass"],
"edges":[["race","ugpa"],["race","lsat"],["race","pass"],
["ugpa","pass"],["lsat","pass"]],
"pa":"race","target":"pass","advantaged_level":1})";
}

struct LoadedData {
  DatasetTable table;
  CausalDag dag;
};

LoadedData load_audit_inputs(const RunConfig& cfg) {
  if (cfg.data.empty()) throw InputError("--data is required");
  DatasetTable table({}, 0);
  bool have_recipe = !cfg.recipe.empty();
  if (have_recipe) {
    table = load_recipe_csv(cfg.data, recipe_from_string(cfg.recipe));
  } else if (!cfg.columns.empty()) {
    table = load_csv(cfg.data, load_column_specs(cfg.columns));
  } else {
    throw InputError("either --recipe or --columns is required");
  }

  CausalDag raw;
  if (!cfg.dag.empty()) {
    raw = load_dag_json(cfg.dag);
  } else if (have_recipe) {
    raw = dag_from_json_text(recipe_dag_text(recipe_from_string(cfg.recipe)));
  } else {
    throw InputError("--dag is required when no recipe is used");
  }
  CausalDag dag = validate(raw, table);
  return LoadedData{std::move(table), std::move(dag)};
}

// One decomposition component of the output tables; binds together its
// estimate, its bootstrap interval, and (in simulation) its oracle value.
struct ComponentDef {
  std::string name;
  std::function<double(const PscResult&)> value;
  std::function<const BootstrapInterval&(const PscIntervals&)> interval;
  std::function<double(const TrueComponents&)> truth;
};

std::vector<ComponentDef> component_defs(std::size_t k) {
  std::vector<ComponentDef> defs;
  defs.push_back({"ps", [](const PscResult& r) { return r.ps; },
                  [](const PscIntervals& i) -> const BootstrapInterval& { return i.ps; },
                  [](const TrueComponents& t) { return t.delta; }});
  defs.push_back({"delta_g", [](const PscResult& r) { return r.delta_g; },
                  [](const PscIntervals& i) -> const BootstrapInterval& { return i.delta_g; },
                  [](const TrueComponents& t) { return t.delta_g; }});
  defs.push_back({"delta_x", [](const PscResult& r) { return r.delta_xtilde; },
                  [](const PscIntervals& i) -> const BootstrapInterval& { return i.delta_xtilde; },
                  [](const TrueComponents& t) { return t.delta_xtilde; }});
  for (std::size_t j = 0; j < k; ++j) {
    defs.push_back({"gamma_" + std::to_string(j + 1),
                    [j](const PscResult& r) { return r.gamma[j]; },
                    [j](const PscIntervals& i) -> const BootstrapInterval& { return i.gamma[j]; },
                    [j](const TrueComponents& t) { return t.gamma[j]; }});
  }
  return defs;
}

struct RowEvaluation {
  std::vector<PscResult> point;         // per test row
  std::vector<PsEstimate> ps_point;     // per test row
  std::vector<PscIntervals> intervals;  // per test row
};

// Point decompositions for every test row plus bootstrap intervals from B
// full pipeline replicates shared across all rows.
RowEvaluation evaluate_rows(const WorldModels& worlds, const DatasetTable& train,
                            const DatasetTable& test, const CausalDag& dag,
                            const RunConfig& cfg, std::uint64_t seed) {
  const ModelKind kind = model_kind_from_string(cfg.model);
  const Route route = route_from_string(cfg.route);
  const TuningBudget budget{cfg.tune_evaluations, cfg.tune_folds, seed};
  const WorldOptions options{cfg.means_at_warped, nullptr, nullptr};
  const std::size_t n_test = test.n_rows();

  RowEvaluation eval;
  eval.point.reserve(n_test);
  eval.ps_point.reserve(n_test);
  for (std::size_t r = 0; r < n_test; ++r) {
    const std::vector<double> row = test.row(r);
    eval.point.push_back(psc(worlds, row, route));
    eval.ps_point.push_back(estimate_ps(worlds, row));
  }

  std::vector<std::vector<PscResult>> replicates(cfg.bootstrap);
  const std::vector<char> success = bootstrap_pipeline(
      train, dag, kind, budget, cfg.bootstrap, seed, cfg.workers, worlds, options,
      [&](int b, const WorldModels& w) {
        std::vector<PscResult> rows;
        rows.reserve(n_test);
        for (std::size_t r = 0; r < n_test; ++r) rows.push_back(psc(w, test.row(r), route));
        replicates[b] = std::move(rows);
      });

  eval.intervals.reserve(n_test);
  std::vector<PscResult> column;
  for (std::size_t r = 0; r < n_test; ++r) {
    column.clear();
    for (int b = 0; b < cfg.bootstrap; ++b) {
      if (success[b]) column.push_back(replicates[b][r]);
    }
    eval.intervals.push_back(psc_intervals_from_replicates(column, cfg.alpha));
  }
  return eval;
}

// ---------------------------------------------------------------------------
// simulate

struct MetricSeries {
  std::vector<double> per_iteration;  // one mean per iteration
  std::vector<double> per_individual; // pooled across iterations
};

void cmd_simulate_impl(RunConfig cfg) {
  validate_config(cfg);
  const Scenario scenario = scenario_from_string(cfg.scenario);
  std::filesystem::create_directories(cfg.out);

  const TrueWorldMeans true_means = true_world_means(scenario, 200000, cfg.seed);
  const ModelKind kind = model_kind_from_string(cfg.model);

  CausalDag dag;
  std::vector<ComponentDef> defs;
  // metric index: [component][metric] with metrics bias, mse, coverage, width
  const std::vector<std::string> metric_names{"bias", "mse", "coverage", "ci_width"};
  std::vector<std::vector<MetricSeries>> series;
  std::string samples_csv;

  for (int it = 0; it < cfg.iters; ++it) {
    const std::uint64_t it_seed =
        rng_stream(cfg.seed, {rng_tag::iteration, static_cast<std::uint64_t>(it)}).next_u64();
    const PairedSample sample = sample_paired({scenario, cfg.n, it_seed});
    if (it == 0) {
      dag = validate(scenario_dag(), sample.real_rows);
      defs = component_defs(privilege_arrows(dag).children.size());
      series.assign(defs.size(), std::vector<MetricSeries>(metric_names.size()));
      samples_csv = "iter,id,pred_real,pred_warped";
      for (const ComponentDef& def : defs) {
        samples_csv += ",true_" + def.name + "," + def.name + "," + def.name + "_lo," +
                       def.name + "_hi";
      }
      samples_csv += "\n";
    }

    const SplitIndices parts = split(sample.real_rows, cfg.split, it_seed);
    const DatasetTable train = sample.real_rows.select_rows(parts.train);
    const DatasetTable test = sample.real_rows.select_rows(parts.test);

    const WorldModels worlds = build_worlds(train, dag, kind,
                                            {cfg.tune_evaluations, cfg.tune_folds, it_seed},
                                            {cfg.means_at_warped, nullptr, nullptr});
    const RowEvaluation eval = evaluate_rows(worlds, train, test, dag, cfg, it_seed);

    std::vector<TrueComponents> truths;
    truths.reserve(parts.test.size());
    for (int original_row : parts.test) {
      truths.push_back(true_psc_components(scenario, sample, original_row, true_means));
    }

    for (std::size_t c = 0; c < defs.size(); ++c) {
      const ComponentDef& def = defs[c];
      double bias = 0.0, mse = 0.0, covered = 0.0, width = 0.0;
      for (std::size_t r = 0; r < test.n_rows(); ++r) {
        const double est = def.value(eval.point[r]);
        const double truth = def.truth(truths[r]);
        const BootstrapInterval& ci = def.interval(eval.intervals[r]);
        const double err = est - truth;
        const double in_ci = (ci.lower <= truth && truth <= ci.upper) ? 1.0 : 0.0;
        bias += err;
        mse += err * err;
        covered += in_ci;
        width += ci.upper - ci.lower;
        series[c][0].per_individual.push_back(err);
        series[c][1].per_individual.push_back(err * err);
        series[c][2].per_individual.push_back(in_ci);
        series[c][3].per_individual.push_back(ci.upper - ci.lower);
      }
      const double n_test = static_cast<double>(test.n_rows());
      series[c][0].per_iteration.push_back(bias / n_test);
      series[c][1].per_iteration.push_back(mse / n_test);
      series[c][2].per_iteration.push_back(covered / n_test);
      series[c][3].per_iteration.push_back(width / n_test);
    }

    for (std::size_t r = 0; r < test.n_rows(); ++r) {
      samples_csv += std::to_string(it) + "," + std::to_string(parts.test[r]) + "," +
                     format_f6(eval.ps_point[r].pred_real) + "," +
                     format_f6(eval.ps_point[r].pred_warped);
      for (const ComponentDef& def : defs) {
        const BootstrapInterval& ci = def.interval(eval.intervals[r]);
        samples_csv += "," + format_f6(def.truth(truths[r])) + "," +
                       format_f6(def.value(eval.point[r])) + "," + format_f6(ci.lower) + "," +
                       format_f6(ci.upper);
      }
      samples_csv += "\n";
    }
  }

  const bool over_individuals = cfg.quantiles_over == "individuals";
  std::string metrics_csv = "component,metric,mean,q05,q95\n";
  nlohmann::ordered_json metrics_json;
  metrics_json["scenario"] = cfg.scenario;
  metrics_json["n"] = cfg.n;
  metrics_json["iterations"] = cfg.iters;
  metrics_json["bootstrap"] = cfg.bootstrap;
  metrics_json["alpha"] = round6(cfg.alpha);
  metrics_json["route"] = cfg.route;
  metrics_json["quantiles_over"] = cfg.quantiles_over;
  nlohmann::ordered_json components = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < defs.size(); ++c) {
    nlohmann::ordered_json per_metric = nlohmann::ordered_json::object();
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      const MetricSeries& s = series[c][m];
      const std::vector<double>& q_source = over_individuals ? s.per_individual : s.per_iteration;
      const double mean_value = mean(s.per_iteration);
      const double q05 = quantile_type7(q_source, 0.05);
      const double q95 = quantile_type7(q_source, 0.95);
      metrics_csv += defs[c].name + "," + metric_names[m] + "," + format_f6(mean_value) + "," +
                     format_f6(q05) + "," + format_f6(q95) + "\n";
      per_metric[metric_names[m]] = {{"mean", round6(mean_value)},
                                     {"q05", round6(q05)},
                                     {"q95", round6(q95)}};
    }
    components[defs[c].name] = std::move(per_metric);
  }
  metrics_json["components"] = std::move(components);

  write_text_file(cfg.out + "/metrics.csv", metrics_csv);
  write_text_file(cfg.out + "/metrics.json", metrics_json.dump(2) + "\n");
  write_text_file(cfg.out + "/samples.csv", samples_csv);
  write_text_file(cfg.out + "/config.json", config_json(cfg).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// audit

nlohmann::ordered_json summary_json(const SubgroupSummary& summary) {
  nlohmann::ordered_json j;
  j["n"] = summary.n;
  j["alpha"] = round6(summary.alpha);
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const ComponentSummary& c : summary.components) {
    comps.push_back({{"name", c.name},
                     {"mean", round6(c.mean)},
                     {"lower", round6(c.lower)},
                     {"upper", round6(c.upper)},
                     {"importance", round6(c.importance)}});
  }
  j["components"] = std::move(comps);
  return j;
}

void cmd_audit_impl(RunConfig cfg) {
  validate_config(cfg);
  LoadedData data = load_audit_inputs(cfg);
  std::filesystem::create_directories(cfg.out);

  const SplitIndices parts = split(data.table, cfg.split, cfg.seed);
  const DatasetTable train = data.table.select_rows(parts.train);
  const DatasetTable test = data.table.select_rows(parts.test);
  const ModelKind kind = model_kind_from_string(cfg.model);

  const WorldModels worlds = build_worlds(train, data.dag, kind,
                                          {cfg.tune_evaluations, cfg.tune_folds, cfg.seed},
                                          {cfg.means_at_warped, nullptr, nullptr});
  const RowEvaluation eval = evaluate_rows(worlds, train, test, data.dag, cfg, cfg.seed);
  const std::size_t k = worlds.warper.k();
  const std::vector<ComponentDef> defs = component_defs(k);

  // Per-row scores: real values, warped values of the warped features, the
  // decomposition, and per-component interval bounds.
  const std::vector<int>& warped_cols = worlds.warper.warp_sequence();
  std::string scores = "id";
  for (const ColumnSpec& spec : data.table.columns()) scores += "," + csv_field(spec.name);
  for (int c : warped_cols) scores += "," + csv_field(data.table.columns()[c].name + "_w");
  scores += ",pred_real,pred_warped";
  for (const ComponentDef& def : defs) {
    scores += "," + def.name + "," + def.name + "_lo," + def.name + "_hi";
  }
  scores += ",alpha,B,route\n";
  for (std::size_t r = 0; r < test.n_rows(); ++r) {
    const std::vector<double> row = test.row(r);
    const std::vector<double> warped = worlds.warper.warp_row(row, Coalition::full(k));
    scores += std::to_string(parts.test[r]);
    for (double v : row) scores += "," + format_f6(v);
    for (int c : warped_cols) scores += "," + format_f6(warped[c]);
    scores += "," + format_f6(eval.ps_point[r].pred_real) + "," +
              format_f6(eval.ps_point[r].pred_warped);
    for (const ComponentDef& def : defs) {
      const BootstrapInterval& ci = def.interval(eval.intervals[r]);
      scores += "," + format_f6(def.value(eval.point[r])) + "," + format_f6(ci.lower) + "," +
                format_f6(ci.upper);
    }
    scores += "," + format_f6(cfg.alpha) + "," + std::to_string(cfg.bootstrap) + "," + cfg.route +
              "\n";
  }
  write_text_file(cfg.out + "/scores.csv", scores);

  // Subgroups: everyone, advantaged, disadvantaged (by PA level).
  const int pa = data.dag.pa;
  std::vector<int> all_rows, advantaged, disadvantaged;
  for (std::size_t r = 0; r < test.n_rows(); ++r) {
    all_rows.push_back(static_cast<int>(r));
    if (test.at(r, pa) == data.dag.advantaged_level) {
      advantaged.push_back(static_cast<int>(r));
    } else {
      disadvantaged.push_back(static_cast<int>(r));
    }
  }
  nlohmann::ordered_json groups;
  groups["all"] = summary_json(subgroup_summary(eval.point, all_rows, cfg.alpha));
  if (!advantaged.empty()) {
    groups["advantaged"] = summary_json(subgroup_summary(eval.point, advantaged, cfg.alpha));
  }
  if (!disadvantaged.empty()) {
    groups["disadvantaged"] =
        summary_json(subgroup_summary(eval.point, disadvantaged, cfg.alpha));
  }
  write_text_file(cfg.out + "/subgroups.json", groups.dump(2) + "\n");

  // Audit regression of PS on all model features.
  std::vector<double> ps_values;
  ps_values.reserve(test.n_rows());
  for (const PsEstimate& e : eval.ps_point) ps_values.push_back(e.delta_hat);
  const RegressionSummary regression =
      regress_ps(test, ps_values, test.model_feature_columns());
  write_text_file(cfg.out + "/regression.txt", regression.format_table());
  nlohmann::ordered_json reg_json;
  reg_json["n"] = regression.n;
  reg_json["p_params"] = regression.p_params;
  reg_json["residual_variance"] = round6(regression.residual_variance);
  reg_json["zero_residual_variance"] = regression.zero_residual_variance;
  nlohmann::ordered_json coef = nlohmann::ordered_json::array();
  for (const CoefficientRow& row : regression.coefficients) {
    coef.push_back({{"name", row.name},
                    {"estimate", round6(row.estimate)},
                    {"std_error", round6(row.std_error)},
                    {"t_value", round6(row.t_value)},
                    {"p_value", round6(row.p_value)}});
  }
  reg_json["coefficients"] = std::move(coef);
  write_text_file(cfg.out + "/regression.json", reg_json.dump(2) + "\n");

  write_text_file(cfg.out + "/config.json", config_json(cfg).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// explain

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
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

void cmd_explain_impl(RunConfig cfg) {
  if (cfg.id.empty()) throw InputError("--id is required");
  const std::string scores_path = cfg.out + "/scores.csv";
  std::ifstream in(scores_path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + scores_path + "' (run audit first)");

  std::string line;
  if (!std::getline(in, line)) throw InputError("'" + scores_path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"id", "ps", "ps_lo", "ps_hi", "delta_g", "delta_x"}) {
    if (!col.count(required)) {
      throw InputError("'" + scores_path + "' lacks column '" + required + "'");
    }
  }
  std::size_t k = 0;
  while (col.count("gamma_" + std::to_string(k + 1))) ++k;

  std::vector<std::string> available;
  std::vector<std::string> match;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    available.push_back(fields[col["id"]]);
    if (fields[col["id"]] == cfg.id) match = std::move(fields);
  }
  if (match.empty()) {
    std::string message = "unknown id '" + cfg.id + "'; available ids:";
    for (std::size_t i = 0; i < available.size() && i < 25; ++i) message += " " + available[i];
    if (available.size() > 25) message += " ...";
    throw InputError(message);
  }

  const auto value = [&](const std::string& name) { return std::stod(match[col.at(name)]); };
  const auto text = [&](const std::string& name) {
    return col.count(name) ? match[col.at(name)] : std::string();
  };

  nlohmann::ordered_json record;
  record["id"] = cfg.id;
  record["route"] = text("route");
  if (col.count("pred_real")) record["pred_real"] = round6(value("pred_real"));
  if (col.count("pred_warped")) record["pred_warped"] = round6(value("pred_warped"));
  std::vector<ChartBar> bars;
  auto add_component = [&](const std::string& name, const std::string& label) {
    nlohmann::ordered_json c;
    c["value"] = round6(value(name));
    c["lower"] = round6(value(name + "_lo"));
    c["upper"] = round6(value(name + "_hi"));
    record[name] = std::move(c);
    bars.push_back(ChartBar{label, value(name), value(name + "_lo"), value(name + "_hi")});
  };
  add_component("ps", "PS");
  add_component("delta_g", "delta_g");
  add_component("delta_x", "delta_x");
  for (std::size_t j = 1; j <= k; ++j) {
    add_component("gamma_" + std::to_string(j), "gamma_" + std::to_string(j));
  }

  const std::string base = cfg.out + "/explain_" + cfg.id;
  write_text_file(base + ".json", record.dump(2) + "\n");
  write_text_file(base + ".svg",
                  bar_chart_svg("Privilege score decomposition, id " + cfg.id, bars));
}

// ---------------------------------------------------------------------------
// pfi

void cmd_pfi_impl(RunConfig cfg) {
  validate_config(cfg);
  LoadedData data = load_audit_inputs(cfg);
  std::filesystem::create_directories(cfg.out);

  const SplitIndices parts = split(data.table, cfg.split, cfg.seed);
  const DatasetTable train = data.table.select_rows(parts.train);
  const DatasetTable test = data.table.select_rows(parts.test);
  const ModelKind kind = model_kind_from_string(cfg.model);

  const WorldModels worlds = build_worlds(train, data.dag, kind,
                                          {cfg.tune_evaluations, cfg.tune_folds, cfg.seed},
                                          {cfg.means_at_warped, nullptr, nullptr});
  std::vector<double> reference;
  reference.reserve(test.n_rows());
  for (std::size_t r = 0; r < test.n_rows(); ++r) {
    reference.push_back(estimate_ps(worlds, test.row(r)).delta_hat);
  }

  std::string out_csv = "feature,importance\n";
  for (int c : test.model_feature_columns()) {
    const double importance = pfi(worlds, test, reference, c, cfg.pfi_repeats, cfg.seed);
    out_csv += csv_field(test.columns()[c].name) + "," + format_f6(importance) + "\n";
  }
  write_text_file(cfg.out + "/pfi.csv", out_csv);
  write_text_file(cfg.out + "/config.json", config_json(cfg).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// argument parsing

void apply_config_file(const std::string& path, RunConfig& cfg,
                       const std::function<bool(const std::string&)>& flag_passed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw InputError("config file '" + path + "' must hold a JSON object");

  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "command") continue;  // informational in emitted configs
      if (flag_passed(key)) continue;
      if (key == "scenario") cfg.scenario = value.get<std::string>();
      else if (key == "n") cfg.n = value.get<std::size_t>();
      else if (key == "iters") cfg.iters = value.get<int>();
      else if (key == "bootstrap") cfg.bootstrap = value.get<int>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "split") cfg.split = value.get<double>();
      else if (key == "model") cfg.model = value.get<std::string>();
      else if (key == "tune_evaluations") cfg.tune_evaluations = value.get<int>();
      else if (key == "tune_folds") cfg.tune_folds = value.get<int>();
      else if (key == "route") cfg.route = value.get<std::string>();
      else if (key == "quantiles_over") cfg.quantiles_over = value.get<std::string>();
      else if (key == "workers") cfg.workers = value.get<int>();
      else if (key == "pfi_repeats") cfg.pfi_repeats = value.get<int>();
      else if (key == "means_at_warped") cfg.means_at_warped = value.get<bool>();
      else if (key == "data") cfg.data = value.get<std::string>();
      else if (key == "dag") cfg.dag = value.get<std::string>();
      else if (key == "columns") cfg.columns = value.get<std::string>();
      else if (key == "recipe") cfg.recipe = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "id") cfg.id = value.get<std::string>();
      else throw InputError("config file '" + path + "': unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::type_error& e) {
    throw InputError("config file '" + path + "': " + e.what());
  }
}

}  // namespace

void cmd_simulate(const RunConfig& config) { cmd_simulate_impl(config); }
void cmd_audit(const RunConfig& config) { cmd_audit_impl(config); }
void cmd_explain(const RunConfig& config) { cmd_explain_impl(config); }
void cmd_pfi(const RunConfig& config) { cmd_pfi_impl(config); }

int run_cli(int argc, char** argv) {
  CLI::App app{"Individual privilege scores with path-level decompositions"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::map<std::string, std::vector<CLI::Option*>> options;
  auto track = [&](const std::string& key, CLI::Option* opt) { options[key].push_back(opt); };
  const auto flag_passed = [&](const std::string& key) {
    const auto it = options.find(key);
    if (it == options.end()) return false;
    for (const CLI::Option* opt : it->second) {
      if (opt->count() > 0) return true;
    }
    return false;
  };

  auto add_run_flags = [&](CLI::App* sub) {
    track("seed", sub->add_option("--seed", cfg.seed, "master random seed"));
    track("alpha", sub->add_option("--alpha", cfg.alpha, "CI miscoverage level"));
    track("split", sub->add_option("--split", cfg.split, "train fraction"));
    track("model", sub->add_option("--model", cfg.model, "logistic or random_forest"));
    track("tune_evaluations",
          sub->add_option("--tune-evals", cfg.tune_evaluations, "random search evaluations"));
    track("tune_folds", sub->add_option("--tune-folds", cfg.tune_folds, "CV folds for tuning"));
    track("route", sub->add_option("--route", cfg.route, "decomposition route: real or warped"));
    track("workers", sub->add_option("--workers", cfg.workers, "bootstrap worker threads"));
    track("out", sub->add_option("--out", cfg.out, "output directory"));
    track("means_at_warped",
          sub->add_flag("--means-at-warped", cfg.means_at_warped,
                        "evaluate the warped model's training mean at warped values"));
    sub->add_option("--config", config_path, "JSON config file; flags override its keys");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "scenario simulation study");
  track("scenario", simulate->add_option("--scenario", cfg.scenario, "sc, sm, or null"));
  track("n", simulate->add_option("--n", cfg.n, "observations per iteration"));
  track("iters", simulate->add_option("--iters", cfg.iters, "simulation iterations"));
  track("bootstrap", simulate->add_option("--bootstrap", cfg.bootstrap, "bootstrap replicates"));
  track("quantiles_over",
        simulate->add_option("--quantiles-over", cfg.quantiles_over,
                             "metric quantiles across iterations or individuals"));
  add_run_flags(simulate);

  CLI::App* audit = app.add_subcommand("audit", "real-data audit");
  track("data", audit->add_option("--data", cfg.data, "input CSV"));
  track("dag", audit->add_option("--dag", cfg.dag, "causal DAG JSON"));
  track("columns", audit->add_option("--columns", cfg.columns, "column spec JSON"));
  track("recipe", audit->add_option("--recipe", cfg.recipe, "ingestion recipe: hmda or lawschool"));
  track("bootstrap", audit->add_option("--bootstrap", cfg.bootstrap, "bootstrap replicates"));
  add_run_flags(audit);

  CLI::App* explain = app.add_subcommand("explain", "per-individual report from an audit run");
  track("out", explain->add_option("--out", cfg.out, "audit run directory"));
  track("id", explain->add_option("--id", cfg.id, "row id to explain"));
  explain->add_option("--config", config_path, "JSON config file; flags override its keys");

  CLI::App* pfi_cmd = app.add_subcommand("pfi", "permutation feature importance of PS");
  track("data", pfi_cmd->add_option("--data", cfg.data, "input CSV"));
  track("dag", pfi_cmd->add_option("--dag", cfg.dag, "causal DAG JSON"));
  track("columns", pfi_cmd->add_option("--columns", cfg.columns, "column spec JSON"));
  track("recipe",
        pfi_cmd->add_option("--recipe", cfg.recipe, "ingestion recipe: hmda or lawschool"));
  track("pfi_repeats", pfi_cmd->add_option("--repeats", cfg.pfi_repeats, "permutations to average"));
  add_run_flags(pfi_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) apply_config_file(config_path, cfg, flag_passed);
    if (simulate->parsed()) {
      cfg.command = "simulate";
      cmd_simulate_impl(cfg);
    } else if (audit->parsed()) {
      cfg.command = "audit";
      cmd_audit_impl(cfg);
    } else if (explain->parsed()) {
      cfg.command = "explain";
      cmd_explain_impl(cfg);
    } else {
      cfg.command = "pfi";
      cmd_pfi_impl(cfg);
    }
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace privscore
