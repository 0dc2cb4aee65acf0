#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "slaterec/core/errors.hpp"

namespace slaterec {

using ItemId = std::size_t;

/// An unordered set of k distinct catalog items. The null option is implicit:
/// choice vectors over a slate have k+1 entries and entry k is "nothing".
struct Slate {
  std::vector<ItemId> items;

  std::size_t size() const { return items.size(); }
  ItemId operator[](std::size_t slot) const { return items[slot]; }
  bool contains(ItemId id) const {
    return std::find(items.begin(), items.end(), id) != items.end();
  }

  // Set equality; slot order carries no meaning.
  friend bool operator==(const Slate& a, const Slate& b) {
    if (a.items.size() != b.items.size()) return false;
    auto x = a.items;
    auto y = b.items;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }
};

/// Response to a slate. `chosen` is a slot index in [0, k]; k means null.
struct UserResponse {
  std::size_t chosen = 0;
  double engagement = 0.0;
};

inline bool is_null_choice(const UserResponse& r, const Slate& slate) {
  return r.chosen == slate.size();
}

/// Catalog id consumed by a response; `null_id` (conventionally |I|) for null.
inline ItemId consumed_item(const UserResponse& r, const Slate& slate, ItemId null_id) {
  return is_null_choice(r, slate) ? null_id : slate[r.chosen];
}

inline void validate_slate(const Slate& slate, std::size_t num_items, std::size_t k) {
  if (slate.size() != k) {
    throw InvalidSlate("slate has " + std::to_string(slate.size()) + " items, expected " +
                       std::to_string(k));
  }
  for (std::size_t a = 0; a < slate.size(); ++a) {
    if (slate[a] >= num_items) {
      throw InvalidSlate("slate references item " + std::to_string(slate[a]) +
                         " outside catalog of size " + std::to_string(num_items));
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (slate[a] == slate[b]) {
        throw InvalidSlate("slate repeats item " + std::to_string(slate[a]));
      }
    }
  }
}

/// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<Slate> enumerate_slates(std::size_t num_items, std::size_t k) {
  if (k == 0 || k > num_items) {
    throw ConfigError("cannot enumerate " + std::to_string(k) + "-subsets of " +
                      std::to_string(num_items) + " items");
  }
  std::vector<Slate> out;
  std::vector<ItemId> current(k);
  for (std::size_t i = 0; i < k; ++i) current[i] = i;
  while (true) {
    out.push_back(Slate{current});
    std::size_t pos = k;
    while (pos > 0 && current[pos - 1] == num_items - k + pos - 1) --pos;
    if (pos == 0) break;
    ++current[pos - 1];
    for (std::size_t j = pos; j < k; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

}  // namespace slaterec
