#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/core/slate.hpp"

namespace slaterec {

/// Deterministic part of the exploration action: `target` plus the k-1 items
/// with the lowest selection propensity at the current state (target
/// excluded, ties by ascending id). Target occupies slot 0.
inline Slate slate_for_target(ItemId target, std::span<const double> propensity, std::size_t k) {
  const std::size_t n = propensity.size();
  if (k == 0 || n < k) throw ConfigError("uniform slate needs 1 <= k <= |I|");
  if (target >= n) throw InvalidSlate("target item outside catalog");
  std::vector<ItemId> order(n);
  std::iota(order.begin(), order.end(), ItemId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](ItemId a, ItemId b) { return propensity[a] < propensity[b]; });
  Slate slate;
  slate.items.reserve(k);
  slate.items.push_back(target);
  for (ItemId id : order) {
    if (slate.size() == k) break;
    if (id != target) slate.items.push_back(id);
  }
  return slate;
}

/// Exploration action: a uniformly random target, filled with least-likely items.
inline Slate uniform_slate(std::span<const double> propensity, std::size_t k, Rng& rng) {
  if (k == 0 || propensity.size() < k) throw ConfigError("uniform slate needs 1 <= k <= |I|");
  return slate_for_target(rng.index(propensity.size()), propensity, k);
}

}  // namespace slaterec
