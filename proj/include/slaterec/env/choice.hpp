#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/slate.hpp"
#include "slaterec/env/catalog.hpp"
#include "slaterec/env/user.hpp"

namespace slaterec::env {

/// Multinomial logit over k item logits plus the null option with logit 0.
/// Returns k+1 probabilities, null last.
inline std::vector<double> mnl_with_null(std::span<const double> item_logits) {
  std::vector<double> logits(item_logits.begin(), item_logits.end());
  logits.push_back(0.0);
  return softmax(logits);
}

inline std::vector<double> choice_probs(const UserState& user, const Slate& slate,
                                        const ItemCatalog& catalog) {
  for (ItemId id : slate.items) {
    if (id >= catalog.size()) {
      throw InvalidSlate("slate references item " + std::to_string(id) +
                         " outside catalog of size " + std::to_string(catalog.size()));
    }
  }
  std::vector<double> logits(slate.size());
  for (std::size_t j = 0; j < slate.size(); ++j) {
    logits[j] = catalog[slate[j]].topics.dot(user.interest);
  }
  return mnl_with_null(logits);
}

inline std::size_t sample_choice(Rng& rng, std::span<const double> probs) {
  if (!is_distribution(probs, 1e-9)) {
    throw InvalidDistribution("choice probabilities do not form a distribution");
  }
  return sample_index(rng, probs);
}

}  // namespace slaterec::env
