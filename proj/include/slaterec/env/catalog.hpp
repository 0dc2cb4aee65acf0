#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"

namespace slaterec::env {

/// A recommendable item: topic affinities in [-1,1]^T, a length in [0,1]
/// and a quality in [-1,1] the user never observes.
struct Item {
  Eigen::VectorXd topics;
  double length = 0.0;
  double quality = 0.0;

  static Item null_item(std::size_t num_topics) {
    return Item{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_topics)), 0.0, 0.0};
  }
};

class ItemCatalog {
 public:
  ItemCatalog(std::vector<Item> items, std::size_t num_topics)
      : items_(std::move(items)), null_(Item::null_item(num_topics)), num_topics_(num_topics) {
    if (items_.empty() || num_topics_ == 0) {
      throw ConfigError("catalog needs at least one item and one topic");
    }
    for (const auto& item : items_) {
      if (static_cast<std::size_t>(item.topics.size()) != num_topics_) {
        throw ConfigError("item topic vector has wrong dimension");
      }
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t num_topics() const { return num_topics_; }

  // id == size() addresses the null item.
  const Item& operator[](std::size_t id) const { return id == items_.size() ? null_ : items_[id]; }
  std::size_t null_id() const { return items_.size(); }
  const std::vector<Item>& items() const { return items_; }

 private:
  std::vector<Item> items_;
  Item null_;
  std::size_t num_topics_;
};

inline ItemCatalog sample_catalog(Rng& rng, std::size_t num_items, std::size_t num_topics) {
  if (num_items == 0) throw ConfigError("sample_catalog: num_items must be >= 1");
  if (num_topics == 0) throw ConfigError("sample_catalog: T must be >= 1");
  std::vector<Item> items;
  items.reserve(num_items);
  for (std::size_t n = 0; n < num_items; ++n) {
    Item item;
    item.topics.resize(static_cast<Eigen::Index>(num_topics));
    for (Eigen::Index t = 0; t < item.topics.size(); ++t) item.topics[t] = rng.uniform(-1.0, 1.0);
    item.length = rng.uniform(0.0, 1.0);
    item.quality = rng.uniform(-1.0, 1.0);
    items.push_back(std::move(item));
  }
  return ItemCatalog(std::move(items), num_topics);
}

}  // namespace slaterec::env
