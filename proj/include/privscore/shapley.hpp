#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "privscore/rng.hpp"

namespace privscore {

// Exact Shapley values of a k-player game. `values` holds v(S) for every
// coalition, indexed by bitmask (bit j set = player j in S); v(empty) is
// values[0]. Both formulas are exact and provably equal; both are exposed so
// they can cross-check each other. k <= 8 (enumeration guard).

// Permutation average: gamma_j = (1/k!) sum over orderings of the marginal
// contribution of j when it joins the players before it.
std::vector<double> shapley_order(const std::vector<double>& values, int k);

// Subset-weighted sum: gamma_j = sum over S not containing j of
// |S|!(k-|S|-1)!/k! * [v(S+j) - v(S)].
std::vector<double> shapley_subset(const std::vector<double>& values, int k);

// Monte Carlo fallback for k > 8: averages marginal contributions over
// `samples` uniformly random permutations, evaluating v lazily by mask.
std::vector<double> shapley_sampled(const std::function<double(std::uint32_t)>& value_of_mask,
                                    int k, int samples, Rng rng);

}  // namespace privscore
