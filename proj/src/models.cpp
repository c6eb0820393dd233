#include "privscore/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"
#include "privscore/rng.hpp"

namespace privscore {

namespace {

constexpr int kModelFormatVersion = 1;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Weighted logistic regression by IRLS with step halving. Labels may be soft
// (class masses w*y and w*(1-y)).
LogisticModel fit_logistic_irls(const DatasetTable& table, int target_col,
                                const std::vector<int>& feature_cols,
                                const std::vector<double>* weights) {
  const std::size_t n = table.n_rows();
  const std::size_t p = feature_cols.size() + 1;

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  Eigen::VectorXd w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      x(i, j + 1) = table.at(i, feature_cols[j]);
    }
    y(i) = table.at(i, target_col);
    w(i) = weights ? (*weights)[i] : 1.0;
  }

  auto neg_log_lik = [&](const Eigen::VectorXd& beta) {
    Eigen::VectorXd eta = x * beta;
    double nll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // log(1+e^eta) - y*eta, written to avoid overflow for large |eta|.
      const double e = eta(i);
      const double log1pe = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
      nll += w(i) * (log1pe - y(i) * e);
    }
    return nll;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double nll = neg_log_lik(beta);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd mu(n), irls_w(n);
    for (std::size_t i = 0; i < n; ++i) {
      mu(i) = sigmoid(eta(i));
      irls_w(i) = std::max(w(i) * mu(i) * (1.0 - mu(i)), 1e-10);
    }
    Eigen::VectorXd grad = x.transpose() * (w.cwiseProduct(y - mu));
    if (grad.lpNorm<Eigen::Infinity>() < 1e-8) break;

    Eigen::MatrixXd xtwx = x.transpose() * irls_w.asDiagonal() * x;
    xtwx.diagonal().array() += 1e-10;
    Eigen::VectorXd step = xtwx.ldlt().solve(grad);

    double scale = 1.0;
    for (int halving = 0; halving < 30; ++halving) {
      Eigen::VectorXd cand = beta + scale * step;
      double cand_nll = neg_log_lik(cand);
      if (cand_nll <= nll + 1e-14) {
        beta = cand;
        nll = cand_nll;
        break;
      }
      scale *= 0.5;
    }
  }

  LogisticModel model;
  model.beta.assign(beta.data(), beta.data() + p);
  return model;
}

}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "logistic") return ModelKind::logistic;
  if (s == "random_forest") return ModelKind::random_forest;
  throw InputError("unknown model kind '" + s + "' (expected logistic or random_forest)");
}

std::string to_string(ModelKind k) {
  return k == ModelKind::logistic ? "logistic" : "random_forest";
}

double clamp_probability(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

double log_loss(const std::vector<double>& y, const std::vector<double>& p,
                const std::vector<double>* weights) {
  if (y.size() != p.size()) throw std::invalid_argument("log_loss: size mismatch");
  if (y.empty()) throw std::invalid_argument("log_loss: empty input");
  double loss = 0.0;
  double total_w = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    const double pi = clamp_probability(p[i]);
    loss -= w * (y[i] * std::log(pi) + (1.0 - y[i]) * std::log(1.0 - pi));
    total_w += w;
  }
  return loss / total_w;
}

FittedPredictor FittedPredictor::make_logistic(std::vector<int> feature_cols,
                                               std::vector<std::string> feature_names,
                                               LogisticModel model) {
  FittedPredictor f;
  f.kind_ = ModelKind::logistic;
  f.feature_cols_ = std::move(feature_cols);
  f.feature_names_ = std::move(feature_names);
  f.logistic_ = std::move(model);
  return f;
}

FittedPredictor FittedPredictor::make_forest(std::vector<int> feature_cols,
                                             std::vector<std::string> feature_names,
                                             ForestModel model) {
  FittedPredictor f;
  f.kind_ = ModelKind::random_forest;
  f.feature_cols_ = std::move(feature_cols);
  f.feature_names_ = std::move(feature_names);
  f.forest_ = std::move(model);
  return f;
}

double FittedPredictor::predict_proba(std::span<const double> full_row) const {
  if (kind_ == ModelKind::logistic) {
    double eta = logistic_.beta[0];
    for (std::size_t j = 0; j < feature_cols_.size(); ++j) {
      eta += logistic_.beta[j + 1] * full_row[feature_cols_[j]];
    }
    return clamp_probability(sigmoid(eta));
  }

  // Forest vote fraction: mean of per-tree leaf class-1 frequencies.
  double sum = 0.0;
  for (const ForestTree& tree : forest_.trees) {
    int node = 0;
    while (tree.nodes[node].left >= 0) {
      const ForestNode& nd = tree.nodes[node];
      node = full_row[feature_cols_[nd.feature]] < nd.threshold ? nd.left : nd.right;
    }
    sum += tree.nodes[node].value;
  }
  return clamp_probability(sum / static_cast<double>(forest_.trees.size()));
}

std::optional<ForestParams> FittedPredictor::forest_params() const {
  if (kind_ != ModelKind::random_forest) return std::nullopt;
  return forest_.params;
}

const LogisticModel& FittedPredictor::logistic_model() const {
  if (kind_ != ModelKind::logistic) {
    throw std::logic_error("logistic_model() called on a random forest");
  }
  return logistic_;
}

std::string FittedPredictor::to_json_text() const {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["kind"] = to_string(kind_);
  j["feature_columns"] = feature_cols_;
  j["feature_names"] = feature_names_;
  if (kind_ == ModelKind::logistic) {
    j["beta"] = logistic_.beta;
  } else {
    j["params"] = {{"trees", forest_.params.trees},
                   {"max_depth", forest_.params.max_depth},
                   {"min_leaf", forest_.params.min_leaf},
                   {"feature_fraction", forest_.params.feature_fraction}};
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const ForestTree& tree : forest_.trees) {
      nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
      for (const ForestNode& nd : tree.nodes) {
        nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.value});
      }
      trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
  }
  return j.dump(2) + "\n";
}

FittedPredictor FittedPredictor::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("model JSON parse error: ") + e.what());
  }
  if (!j.contains("format_version") || j["format_version"].get<int>() != kModelFormatVersion) {
    throw InputError("model JSON: unsupported or missing format_version");
  }
  FittedPredictor f;
  f.kind_ = model_kind_from_string(j.at("kind").get<std::string>());
  f.feature_cols_ = j.at("feature_columns").get<std::vector<int>>();
  f.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
  if (f.kind_ == ModelKind::logistic) {
    f.logistic_.beta = j.at("beta").get<std::vector<double>>();
    if (f.logistic_.beta.size() != f.feature_cols_.size() + 1) {
      throw InputError("model JSON: beta length does not match feature count");
    }
  } else {
    const auto& p = j.at("params");
    f.forest_.params.trees = p.at("trees").get<int>();
    f.forest_.params.max_depth = p.at("max_depth").get<int>();
    f.forest_.params.min_leaf = p.at("min_leaf").get<int>();
    f.forest_.params.feature_fraction = p.at("feature_fraction").get<double>();
    for (const auto& tree_json : j.at("trees")) {
      ForestTree tree;
      for (const auto& nd_json : tree_json) {
        if (!nd_json.is_array() || nd_json.size() != 5) {
          throw InputError("model JSON: malformed tree node");
        }
        ForestNode nd;
        nd.feature = nd_json[0].get<int>();
        nd.threshold = nd_json[1].get<double>();
        nd.left = nd_json[2].get<int>();
        nd.right = nd_json[3].get<int>();
        nd.value = nd_json[4].get<double>();
        tree.nodes.push_back(nd);
      }
      f.forest_.trees.push_back(std::move(tree));
    }
  }
  return f;
}

FittedPredictor fit_classifier(const DatasetTable& table, int target_col,
                               const std::vector<int>& feature_cols, ModelKind kind,
                               const TuningBudget& budget, const std::vector<double>* weights,
                               const ForestParams* fixed_params) {
  if (table.n_rows() == 0) throw std::invalid_argument("fit_classifier: empty table");
  if (weights && weights->size() != table.n_rows()) {
    throw std::invalid_argument("fit_classifier: weights length mismatch");
  }
  std::vector<std::string> names;
  names.reserve(feature_cols.size());
  for (int c : feature_cols) names.push_back(table.columns()[c].name);

  // A single-class target carries no signal; degrade to a constant predictor
  // rather than failing deep inside a bootstrap replicate.
  {
    bool constant = true;
    const double first = table.at(0, target_col);
    for (std::size_t i = 1; i < table.n_rows() && constant; ++i) {
      constant = table.at(i, target_col) == first;
    }
    if (constant) {
      std::fprintf(stderr,
                   "warning: target '%s' is constant (%g); fitting a constant predictor\n",
                   table.columns()[target_col].name.c_str(), first);
      LogisticModel model;
      model.beta.assign(feature_cols.size() + 1, 0.0);
      const double p = clamp_probability(first);
      model.beta[0] = std::log(p / (1.0 - p));
      return FittedPredictor::make_logistic(feature_cols, std::move(names), std::move(model));
    }
  }

  if (kind == ModelKind::logistic) {
    LogisticModel model = fit_logistic_irls(table, target_col, feature_cols, weights);
    return FittedPredictor::make_logistic(feature_cols, std::move(names), std::move(model));
  }

  ForestParams params;
  if (fixed_params) {
    params = *fixed_params;
  } else {
    // Random search over the hyperparameter box, scored by CV log-loss; ties
    // keep the earliest draw so results do not depend on evaluation order.
    Rng draw = rng_stream(budget.seed, {rng_tag::tune});
    double best_loss = std::numeric_limits<double>::infinity();
    for (int eval = 0; eval < budget.evaluations; ++eval) {
      ForestParams cand;
      cand.trees = 100 + static_cast<int>(draw.below(401));
      cand.max_depth = 2 + static_cast<int>(draw.below(19));
      cand.min_leaf = 1 + static_cast<int>(draw.below(20));
      cand.feature_fraction = 0.3 + 0.7 * draw.uniform();
      const double loss =
          forest_cv_log_loss(table, target_col, feature_cols, weights, cand, budget.folds,
                             rng_stream(budget.seed, {rng_tag::tune, rng_tag::folds}).next_u64(),
                             rng_stream(budget.seed, {rng_tag::tune, rng_tag::fit,
                                                      static_cast<std::uint64_t>(eval)})
                                 .next_u64());
      if (loss < best_loss) {
        best_loss = loss;
        params = cand;
      }
    }
  }

  ForestModel model = fit_forest_model(table, target_col, feature_cols, weights, params,
                                       rng_stream(budget.seed, {rng_tag::fit}).next_u64());
  return FittedPredictor::make_forest(feature_cols, std::move(names), std::move(model));
}

}  // namespace privscore
