#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "privscore/dataset.hpp"

namespace privscore {

enum class ModelKind { logistic, random_forest };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind k);

struct TuningBudget {
  int evaluations = 25;
  int folds = 3;
  std::uint64_t seed = 0;
};

struct LogisticModel {
  std::vector<double> beta;  // [0] intercept, then one per feature
};

struct ForestParams {
  int trees = 300;
  int max_depth = 10;
  int min_leaf = 5;
  double feature_fraction = 1.0;
};

// Flat tree node; left < 0 marks a leaf whose class-1 frequency is `value`.
struct ForestNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

struct ForestTree {
  std::vector<ForestNode> nodes;
};

struct ForestModel {
  ForestParams params;
  std::vector<ForestTree> trees;
};

// Fitted probability model over a fixed list of table columns. Predictions
// are deterministic functions of the stored state, clamped away from 0/1 so
// log-loss stays finite.
class FittedPredictor {
 public:
  FittedPredictor() = default;

  static FittedPredictor make_logistic(std::vector<int> feature_cols,
                                       std::vector<std::string> feature_names,
                                       LogisticModel model);
  static FittedPredictor make_forest(std::vector<int> feature_cols,
                                     std::vector<std::string> feature_names,
                                     ForestModel model);

  ModelKind kind() const { return kind_; }
  const std::vector<int>& feature_columns() const { return feature_cols_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  // `full_row` spans an entire table row; the model reads its own columns.
  double predict_proba(std::span<const double> full_row) const;

  // Tuned forest hyperparameters (nullopt for logistic models).
  std::optional<ForestParams> forest_params() const;
  const LogisticModel& logistic_model() const;

  // Versioned JSON document; round-trips exactly.
  std::string to_json_text() const;
  static FittedPredictor from_json_text(const std::string& text);

 private:
  ModelKind kind_ = ModelKind::logistic;
  std::vector<int> feature_cols_;
  std::vector<std::string> feature_names_;
  LogisticModel logistic_;
  ForestModel forest_;
};

inline constexpr double kProbClamp = 1e-12;
double clamp_probability(double p);

// Mean log-loss of predictions against (possibly soft) labels with optional
// per-row weights.
double log_loss(const std::vector<double>& y, const std::vector<double>& p,
                const std::vector<double>* weights = nullptr);

// Fits pi-hat / phi-hat style classifiers. Soft labels in [0,1] are accepted
// directly: each row contributes weight*y to class 1 and weight*(1-y) to
// class 0. For random forests, hyperparameters come from random search over
// `budget.evaluations` configurations scored by `budget.folds`-fold CV
// log-loss, then a full-data refit — unless `fixed_params` pins them (used by
// bootstrap replicates that reuse the full fit's tuning). A single-class
// target degrades to a constant predictor with a warning on stderr.
FittedPredictor fit_classifier(const DatasetTable& table, int target_col,
                               const std::vector<int>& feature_cols, ModelKind kind,
                               const TuningBudget& budget,
                               const std::vector<double>* weights = nullptr,
                               const ForestParams* fixed_params = nullptr);

// Internals shared with the tuner (defined in forest.cpp).
ForestModel fit_forest_model(const DatasetTable& table, int target_col,
                             const std::vector<int>& feature_cols,
                             const std::vector<double>* weights, const ForestParams& params,
                             std::uint64_t seed);
double forest_cv_log_loss(const DatasetTable& table, int target_col,
                          const std::vector<int>& feature_cols,
                          const std::vector<double>* weights, const ForestParams& params,
                          int folds, std::uint64_t fold_seed, std::uint64_t fit_seed);

}  // namespace privscore
