#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "privscore/dag.hpp"
#include "privscore/dataset.hpp"
#include "privscore/glm.hpp"

namespace privscore {

// Subset of privilege arrows, one bit per arrow index.
struct Coalition {
  std::uint64_t bits = 0;

  static Coalition empty() { return Coalition{}; }
  static Coalition full(int k) {
    return Coalition{k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1};
  }
  static Coalition from_mask(std::uint64_t mask) { return Coalition{mask}; }

  bool contains(int arrow) const { return (bits >> arrow) & 1; }
  Coalition with(int arrow) const { return Coalition{bits | (std::uint64_t{1} << arrow)}; }
  int size() const { return std::popcount(bits); }
};

// Residual-based warper: per PA-descendant feature, a GLM of the feature on
// its causal parents; plus a logit model of the target on its parents.
// Warping a feature moves it from the residual around its real-parent mean to
// the same residual around the mean with A set to the advantaged level (and
// any already-warped parents at their warped values).
class Warper {
 public:
  const CausalDag& dag() const { return dag_; }
  const PrivilegeArrowSet& arrows() const { return arrows_; }
  int k() const { return static_cast<int>(arrows_.children.size()); }
  const std::vector<int>& warp_sequence() const { return warp_sequence_; }
  const FittedGlm& feature_model(int feature_col) const;
  const FittedGlm& target_model() const { return target_model_; }

  // Returns the full row with the child features of arrows in S replaced by
  // their warped values. Binary features get a mean shift (not clamped, so
  // values may fall slightly outside [0,1]); positive numeric features keep
  // their gamma quantile. Rows already at the advantaged level are returned
  // unchanged, bit for bit.
  std::vector<double> warp_row(std::span<const double> row, Coalition s) const;

  // Warps every row with S = P and the target by mean shift, clamped to
  // [0,1]; the result trains the warped-world model phi-hat on soft labels.
  DatasetTable warp_training_set(const DatasetTable& train) const;

 private:
  friend Warper fit_warper(const DatasetTable& train, const CausalDag& dag);

  CausalDag dag_;
  PrivilegeArrowSet arrows_;
  std::vector<int> warp_sequence_;     // feature columns in warp order
  std::vector<int> arrow_of_feature_;  // arrow index per warp_sequence_ entry
  std::vector<FittedGlm> feature_models_;  // parallel to warp_sequence_
  FittedGlm target_model_;
};

Warper fit_warper(const DatasetTable& train, const CausalDag& dag);

}  // namespace privscore
