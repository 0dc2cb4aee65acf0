#pragma once

#include <cstddef>
#include <deque>
#include <vector>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/slate.hpp"

namespace slaterec {

struct HistoryEntry {
  Slate slate;
  UserResponse response;
  bool padding = true;  // sentinel slot before h real interactions exist
};

/// Observable agent state: the last h (slate, response) pairs, oldest first.
class HistoryState {
 public:
  explicit HistoryState(std::size_t window) : entries_(window) {
    if (window == 0) throw ConfigError("history window must be >= 1");
  }

  std::size_t window() const { return entries_.size(); }
  const std::deque<HistoryEntry>& entries() const { return entries_; }
  const HistoryEntry& newest() const { return entries_.back(); }

  std::size_t num_real() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.padding ? 0 : 1;
    return n;
  }

  void push(Slate slate, UserResponse response) {
    entries_.pop_front();
    entries_.push_back(HistoryEntry{std::move(slate), response, false});
  }

  HistoryState pushed(Slate slate, UserResponse response) const {
    HistoryState next = *this;
    next.push(std::move(slate), response);
    return next;
  }

 private:
  std::deque<HistoryEntry> entries_;
};

}  // namespace slaterec
