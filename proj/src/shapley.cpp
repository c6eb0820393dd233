#include "privscore/shapley.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace privscore {

namespace {

void check_k(const std::vector<double>& values, int k) {
  if (k < 0) throw std::invalid_argument("shapley: negative player count");
  if (k > 8) {
    throw std::invalid_argument(
        "shapley: exact enumeration is limited to k <= 8 players; use shapley_sampled");
  }
  if (values.size() != (std::size_t{1} << k)) {
    throw std::invalid_argument("shapley: value table must have 2^k entries");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<double> shapley_order(const std::vector<double>& values, int k) {
  check_k(values, k);
  std::vector<double> gamma(k, 0.0);
  if (k == 0) return gamma;

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::uint32_t mask = 0;
    for (int j : perm) {
      const std::uint32_t next = mask | (1u << j);
      gamma[j] += values[next] - values[mask];
      mask = next;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double m = factorial(k);
  for (double& g : gamma) g /= m;
  return gamma;
}

std::vector<double> shapley_subset(const std::vector<double>& values, int k) {
  check_k(values, k);
  std::vector<double> gamma(k, 0.0);
  if (k == 0) return gamma;

  const double kfact = factorial(k);
  std::vector<double> weight(k);  // by |S|
  for (int s = 0; s < k; ++s) {
    weight[s] = factorial(s) * factorial(k - s - 1) / kfact;
  }

  const std::uint32_t full = (1u << k) - 1;
  for (int j = 0; j < k; ++j) {
    const std::uint32_t bit = 1u << j;
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      if (mask & bit) continue;
      const int size = std::popcount(mask);
      gamma[j] += weight[size] * (values[mask | bit] - values[mask]);
    }
  }
  return gamma;
}

std::vector<double> shapley_sampled(const std::function<double(std::uint32_t)>& value_of_mask,
                                    int k, int samples, Rng rng) {
  if (k < 1) return {};
  if (samples < 1) throw std::invalid_argument("shapley_sampled: need at least 1 sample");

  std::vector<double> gamma(k, 0.0);
  std::unordered_map<std::uint32_t, double> memo;
  auto value = [&](std::uint32_t mask) {
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    const double v = value_of_mask(mask);
    memo.emplace(mask, v);
    return v;
  };

  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  for (int s = 0; s < samples; ++s) {
    rng.shuffle(perm);
    std::uint32_t mask = 0;
    for (int j : perm) {
      const std::uint32_t next = mask | (1u << j);
      gamma[j] += value(next) - value(mask);
      mask = next;
    }
  }
  for (double& g : gamma) g /= samples;
  return gamma;
}

}  // namespace privscore
