#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "slaterec/core/errors.hpp"

namespace slaterec::harness {

/// Error tied to one config key.
class ConfigKeyError : public ConfigError {
 public:
  ConfigKeyError(std::string key, const std::string& what)
      : ConfigError("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct RunConfig {
  std::string backend = "tabular";  // tabular | simulator
  std::size_t topics = 4;
  std::size_t items = 5;
  std::size_t slate_size = 2;
  std::size_t history = 3;
  double discount = 0.9;
  double delta = 0.1;
  double target_accuracy = 0.1;
  std::size_t episodes = 300;
  double c0 = 0.9;
  double c1 = 0.1;
  double c3 = 0.01;
  double c_alpha = 1.0;
  double c_lambda = 1.0;
  std::size_t rank = 3;
  std::size_t states = 12;
  std::string model_class = "finite";  // finite (tabular) | parametric (simulator)
  std::size_t model_class_size = 8;
  std::string model_class_file;  // optional, tabular
  std::string instance_file;     // optional, tabular
  std::uint64_t seed = 1;
  std::uint64_t instance_seed = 1;
  std::string out = "out";
  double greedy_epsilon = 0.1;
  bool timing = false;
  bool checkpoint = false;
  std::size_t buckets = 8;
  std::size_t eval_rollouts = 200;
  std::size_t fit_iterations = 100;
  std::size_t pg_batch = 32;
  std::size_t pg_iterations = 40;
  std::size_t pg_patience = 5;
  double pg_learning_rate = 2.0;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_integer(const std::string& key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigKeyError(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline double parse_double(const std::string& key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ConfigKeyError(key, "expected a number, got '" + s + "'");
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigKeyError(key, "expected true or false, got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;

template <class T>
Setter integer(T RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, std::string_view v) { c.*field = parse_integer<T>(k, v); };
}
inline Setter real(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, std::string_view v) { c.*field = parse_double(k, v); };
}
inline Setter flag(bool RunConfig::*field) {
  return [field](RunConfig& c, const std::string& k, std::string_view v) { c.*field = parse_bool(k, v); };
}
inline Setter text(std::string RunConfig::*field) {
  return [field](RunConfig& c, const std::string&, std::string_view v) { c.*field = std::string(v); };
}

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"backend", text(&RunConfig::backend)},
      {"topics", integer(&RunConfig::topics)},
      {"items", integer(&RunConfig::items)},
      {"slate_size", integer(&RunConfig::slate_size)},
      {"history", integer(&RunConfig::history)},
      {"discount", real(&RunConfig::discount)},
      {"delta", real(&RunConfig::delta)},
      {"target_accuracy", real(&RunConfig::target_accuracy)},
      {"episodes", integer(&RunConfig::episodes)},
      {"c0", real(&RunConfig::c0)},
      {"c1", real(&RunConfig::c1)},
      {"c3", real(&RunConfig::c3)},
      {"c_alpha", real(&RunConfig::c_alpha)},
      {"c_lambda", real(&RunConfig::c_lambda)},
      {"rank", integer(&RunConfig::rank)},
      {"states", integer(&RunConfig::states)},
      {"model_class", text(&RunConfig::model_class)},
      {"model_class_size", integer(&RunConfig::model_class_size)},
      {"model_class_file", text(&RunConfig::model_class_file)},
      {"instance_file", text(&RunConfig::instance_file)},
      {"seed", integer(&RunConfig::seed)},
      {"instance_seed", integer(&RunConfig::instance_seed)},
      {"out", text(&RunConfig::out)},
      {"greedy_epsilon", real(&RunConfig::greedy_epsilon)},
      {"timing", flag(&RunConfig::timing)},
      {"checkpoint", flag(&RunConfig::checkpoint)},
      {"buckets", integer(&RunConfig::buckets)},
      {"eval_rollouts", integer(&RunConfig::eval_rollouts)},
      {"fit_iterations", integer(&RunConfig::fit_iterations)},
      {"pg_batch", integer(&RunConfig::pg_batch)},
      {"pg_iterations", integer(&RunConfig::pg_iterations)},
      {"pg_patience", integer(&RunConfig::pg_patience)},
      {"pg_learning_rate", real(&RunConfig::pg_learning_rate)},
  };
  return table;
}

}  // namespace detail

inline void RunConfig::validate() const {
  auto require = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigKeyError(key, what);
  };
  require(backend == "tabular" || backend == "simulator", "backend", "must be tabular or simulator");
  require(topics >= 1, "topics", "must be >= 1");
  require(items >= 1, "items", "must be >= 1");
  require(slate_size >= 1 && slate_size <= items, "slate_size", "must be in [1, items]");
  require(history >= 1, "history", "must be >= 1");
  require(discount >= 0.0 && discount < 1.0, "discount", "must be in [0,1)");
  require(delta > 0.0 && delta < 1.0, "delta", "must be in (0,1)");
  require(target_accuracy > 0.0 && target_accuracy < 1.0, "target_accuracy", "must be in (0,1)");
  require(episodes >= 1, "episodes", "must be >= 1");
  require(c0 >= 0.0, "c0", "must be >= 0");
  require(c1 >= 0.0, "c1", "must be >= 0");
  require(c3 >= 0.0, "c3", "must be >= 0");
  require(c_alpha > 0.0, "c_alpha", "must be > 0");
  require(c_lambda > 0.0, "c_lambda", "must be > 0");
  require(rank >= 1, "rank", "must be >= 1");
  require(model_class == "finite" || model_class == "parametric", "model_class", "must be finite or parametric");
  require(model_class_size >= 1, "model_class_size", "must be >= 1");
  require(greedy_epsilon >= 0.0 && greedy_epsilon <= 1.0, "greedy_epsilon", "must be in [0,1]");
  require(!out.empty(), "out", "must not be empty");
  if (backend == "tabular") {
    require(model_class == "finite", "model_class", "tabular backend needs a finite class");
    require(states >= rank, "states", "must be >= rank");
  } else {
    require(model_class == "parametric", "model_class", "simulator backend needs a parametric class");
    require(buckets >= 2, "buckets", "must be >= 2");
    require(pg_batch >= 1, "pg_batch", "must be >= 1");
    require(pg_learning_rate > 0.0, "pg_learning_rate", "must be > 0");
  }
}

inline nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["backend"] = backend;
  j["topics"] = topics;
  j["items"] = items;
  j["slate_size"] = slate_size;
  j["history"] = history;
  j["discount"] = discount;
  j["delta"] = delta;
  j["target_accuracy"] = target_accuracy;
  j["episodes"] = episodes;
  j["c0"] = c0;
  j["c1"] = c1;
  j["c3"] = c3;
  j["c_alpha"] = c_alpha;
  j["c_lambda"] = c_lambda;
  j["rank"] = rank;
  j["states"] = states;
  j["model_class"] = model_class;
  j["model_class_size"] = model_class_size;
  j["model_class_file"] = model_class_file;
  j["instance_file"] = instance_file;
  j["seed"] = seed;
  j["instance_seed"] = instance_seed;
  j["out"] = out;
  j["greedy_epsilon"] = greedy_epsilon;
  j["timing"] = timing;
  j["checkpoint"] = checkpoint;
  j["buckets"] = buckets;
  j["eval_rollouts"] = eval_rollouts;
  j["fit_iterations"] = fit_iterations;
  j["pg_batch"] = pg_batch;
  j["pg_iterations"] = pg_iterations;
  j["pg_patience"] = pg_patience;
  j["pg_learning_rate"] = pg_learning_rate;
  return j;
}

/// `key = value` lines, `#` starts a comment. Unknown or repeated keys are
/// rejected; missing keys keep their defaults.
inline RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const auto& table = detail::setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigKeyError(key, "unknown key");
    if (!seen.insert(key).second) throw ConfigKeyError(key, "duplicate key");
    if (value.empty()) throw ConfigKeyError(key, "missing value");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

/// Relative fixture paths are resolved against the config file's directory.
inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg = parse_config_text(buffer.str());
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* file : {&cfg.model_class_file, &cfg.instance_file}) {
    if (!file->empty() && std::filesystem::path(*file).is_relative()) *file = (base / *file).string();
  }
  return cfg;
}

}  // namespace slaterec::harness
