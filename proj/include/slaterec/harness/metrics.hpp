#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "slaterec/core/errors.hpp"
#include "slaterec/learner/rep_ucb_rec.hpp"

namespace slaterec::harness {

inline constexpr const char* kMetricsHeader =
    "episode,n_samples,mle_loglik,mean_bonus,value_learned_model,value_true,suboptimality,wallclock_ms";

inline std::string format_field(const std::optional<double>& v) {
  if (!v) return {};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

inline std::string format_row(const learner::EpisodeMetrics& m) {
  std::string row = std::to_string(m.episode) + "," + std::to_string(m.num_samples);
  for (const auto& v : {m.log_likelihood, m.mean_bonus, m.value_learned, m.value_true, m.suboptimality,
                        m.wallclock_ms}) {
    row += ",";
    row += format_field(v);
  }
  return row;
}

/// Append-only CSV sink, one line per episode, flushed as it goes.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot open '" + path + "' for writing");
    out_ << kMetricsHeader << '\n';
  }

  void write(const learner::EpisodeMetrics& m) {
    out_ << format_row(m) << '\n';
    out_.flush();
    ++rows_;
  }

  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

struct MetricsRow {
  std::size_t episode = 0;
  std::size_t num_samples = 0;
  std::vector<std::optional<double>> values;  // the six numeric columns, in header order
};

/// Reads back a file written by MetricsWriter.
inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw Error("bad metrics header in '" + path + "'");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> fields(1);
    for (char c : line) {
      if (c == ',') {
        fields.emplace_back();
      } else {
        fields.back() += c;
      }
    }
    if (fields.size() != 8) throw Error("bad metrics row in '" + path + "'");
    MetricsRow r;
    r.episode = std::stoul(fields[0]);
    r.num_samples = std::stoul(fields[1]);
    for (std::size_t j = 2; j < 8; ++j) {
      r.values.push_back(fields[j].empty() ? std::nullopt : std::optional<double>(std::stod(fields[j])));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace slaterec::harness
