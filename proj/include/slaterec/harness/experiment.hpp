#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "slaterec/env/catalog.hpp"
#include "slaterec/env/environment.hpp"
#include "slaterec/harness/config.hpp"
#include "slaterec/harness/metrics.hpp"
#include "slaterec/learner/components.hpp"
#include "slaterec/learner/sim_policy.hpp"
#include "slaterec/oracle/tabular.hpp"
#include "slaterec/oracle/tabular_backend.hpp"

namespace slaterec::harness {

inline constexpr const char* kVersion = "0.1.0";

/// splitmix64 finaliser; gives each consumer of a run seed its own stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum SeedStream : std::uint64_t { kLearnerStream = 0, kModelInitStream = 1, kEvalStream = 2 };

struct TabularSetup {
  std::shared_ptr<const oracle::TabularLowRankMDP> mdp;
  std::vector<TabularLowRankModel> members;
  std::optional<std::size_t> truth_index;
};

inline TabularSetup build_tabular(const RunConfig& cfg) {
  TabularSetup out;
  Rng rng(cfg.instance_seed);
  if (!cfg.instance_file.empty()) {
    std::ifstream in(cfg.instance_file);
    if (!in) throw ConfigKeyError("instance_file", "cannot open '" + cfg.instance_file + "'");
    out.mdp = std::make_shared<const oracle::TabularLowRankMDP>(oracle::read_instance(in));
  } else {
    out.mdp = std::make_shared<const oracle::TabularLowRankMDP>(
        oracle::make_tabular(rng, cfg.states, cfg.items, cfg.rank, cfg.slate_size, cfg.discount));
  }
  if (!cfg.model_class_file.empty()) {
    std::ifstream in(cfg.model_class_file);
    if (!in) throw ConfigKeyError("model_class_file", "cannot open '" + cfg.model_class_file + "'");
    out.members = oracle::read_model_class(in);
    const auto& truth = out.mdp->truth();
    for (std::size_t m = 0; m < out.members.size(); ++m) {
      if (out.members[m].phi() == truth.phi() && out.members[m].mu() == truth.mu()) {
        out.truth_index = m;
        break;
      }
    }
  } else {
    std::size_t ti = 0;
    out.members = oracle::make_model_class(rng, out.mdp->truth(), cfg.model_class_size, &ti);
    out.truth_index = ti;
  }
  for (const auto& m : out.members) {
    if (m.num_states() != out.mdp->num_states() || m.num_items() != out.mdp->problem().num_items) {
      throw ConfigKeyError("model_class_file", "class member dimensions do not match the instance");
    }
  }
  return out;
}

inline SimulatorBackend build_simulator(const RunConfig& cfg) {
  Rng rng(cfg.instance_seed);
  auto catalog = std::make_shared<const env::ItemCatalog>(env::sample_catalog(rng, cfg.items, cfg.topics));
  env::DynamicsParams dyn{cfg.c0, cfg.c1, cfg.c3};
  return SimulatorBackend(env::Environment(catalog, dyn, cfg.slate_size, cfg.discount), cfg.history);
}

inline learner::SimulatorComponents::Options simulator_options(const RunConfig& cfg) {
  learner::SimulatorComponents::Options o;
  o.rank = cfg.rank;
  o.buckets = cfg.buckets;
  o.fit.max_iterations = cfg.fit_iterations;
  o.planner.batch = cfg.pg_batch;
  o.planner.max_iterations = cfg.pg_iterations;
  o.planner.patience = cfg.pg_patience;
  o.planner.learning_rate = cfg.pg_learning_rate;
  o.eval_rollouts = cfg.eval_rollouts;
  return o;
}

inline learner::HyperParams hyper_params(const RunConfig& cfg, std::size_t num_items, std::size_t slate_size,
                                         double discount, std::size_t class_size) {
  learner::HyperParams hp;
  hp.delta = cfg.delta;
  hp.target_accuracy = cfg.target_accuracy;
  hp.discount = discount;
  hp.rank = cfg.rank;
  hp.slate_size = slate_size;
  hp.num_items = num_items;
  hp.model_class_size = double(class_size);
  hp.c_alpha = cfg.c_alpha;
  hp.c_lambda = cfg.c_lambda;
  return hp;
}

struct ExperimentResult {
  std::vector<learner::EpisodeMetrics> metrics;
  std::optional<double> optimal_value;
  std::optional<double> mixture_value;          // mean over deployed policies
  std::optional<double> mixture_suboptimality;  // tabular only
  std::optional<double> final_suboptimality;    // last deployed policy
  std::optional<std::size_t> model_index;       // tabular: last MLE pick
  std::optional<std::size_t> truth_index;
  std::filesystem::path out_dir;
};

// ---- checkpoint ---------------------------------------------------------

inline constexpr char kCheckpointMagic[8] = {'S', 'L', 'R', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t episode = 0;
  Eigen::MatrixXd covariance;
  double alpha = 0.0;
  double lambda = 0.0;
  std::uint32_t model_kind = 0;  // 1 tabular (phi, mu), 2 response model (weights..., bucket logits)
  std::vector<Eigen::MatrixXd> model;
};

namespace detail {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error("truncated checkpoint");
  return v;
}

inline void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put<double>(os, m(r, c));
  }
}

inline Eigen::MatrixXd get_matrix(std::istream& is) {
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  if (rows > (1u << 20) || cols > (1u << 20)) throw Error("corrupt checkpoint matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(is);
  }
  return m;
}

inline std::vector<Eigen::MatrixXd> model_blocks(const TabularLowRankModel& m) { return {m.phi(), m.mu()}; }

inline std::vector<Eigen::MatrixXd> model_blocks(const learner::ResponseModel& m) {
  std::vector<Eigen::MatrixXd> out(m.weights().begin(), m.weights().end());
  out.push_back(m.bucket_logits());
  return out;
}

inline std::uint32_t model_kind(const TabularLowRankModel&) { return 1; }
inline std::uint32_t model_kind(const learner::ResponseModel&) { return 2; }

}  // namespace detail

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put(os, kCheckpointVersion);
  detail::put(os, ck.episode);
  detail::put_matrix(os, ck.covariance);
  detail::put(os, ck.alpha);
  detail::put(os, ck.lambda);
  detail::put(os, ck.model_kind);
  detail::put<std::uint64_t>(os, ck.model.size());
  for (const auto& m : ck.model) detail::put_matrix(os, m);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  char magic[sizeof(kCheckpointMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error("'" + path + "' is not a checkpoint");
  }
  if (detail::get<std::uint32_t>(is) != kCheckpointVersion) throw Error("unsupported checkpoint version");
  Checkpoint ck;
  ck.episode = detail::get<std::uint64_t>(is);
  ck.covariance = detail::get_matrix(is);
  ck.alpha = detail::get<double>(is);
  ck.lambda = detail::get<double>(is);
  ck.model_kind = detail::get<std::uint32_t>(is);
  const auto blocks = detail::get<std::uint64_t>(is);
  if (blocks > 4096) throw Error("corrupt checkpoint");
  for (std::uint64_t b = 0; b < blocks; ++b) ck.model.push_back(detail::get_matrix(is));
  return ck;
}

// ---- runs ---------------------------------------------------------------

namespace detail {

inline std::filesystem::path prepare_out(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void finish_summary(ExperimentResult& res) {
  if (res.metrics.empty()) return;
  res.final_suboptimality = res.metrics.back().suboptimality;
  double sum = 0.0;
  for (const auto& m : res.metrics) {
    if (!m.value_true) return;
    sum += *m.value_true;
  }
  res.mixture_value = sum / double(res.metrics.size());
  if (res.optimal_value) res.mixture_suboptimality = *res.optimal_value - *res.mixture_value;
}

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline void write_meta(const RunConfig& cfg, const std::string& mode, const ExperimentResult& res) {
  nlohmann::ordered_json j;
  j["tool"] = "slaterec";
  j["version"] = kVersion;
  j["mode"] = mode;
  j["seed"] = cfg.seed;
  j["instance_seed"] = cfg.instance_seed;
  j["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                  "." + std::to_string(EIGEN_MINOR_VERSION)},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  j["config"] = cfg.to_json();
  nlohmann::ordered_json r;
  r["episodes"] = res.metrics.size();
  r["optimal_value"] = optional_json(res.optimal_value);
  r["final_suboptimality"] = optional_json(res.final_suboptimality);
  r["mixture_value"] = optional_json(res.mixture_value);
  r["mixture_suboptimality"] = optional_json(res.mixture_suboptimality);
  r["model_index"] = res.model_index ? nlohmann::ordered_json(*res.model_index) : nlohmann::ordered_json(nullptr);
  r["truth_index"] = res.truth_index ? nlohmann::ordered_json(*res.truth_index) : nlohmann::ordered_json(nullptr);
  j["results"] = r;
  std::ofstream os(res.out_dir / "meta.json", std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write meta.json in '" + res.out_dir.string() + "'");
  os << j.dump(2) << '\n';
}

template <class Run>
void maybe_checkpoint(const RunConfig& cfg, const ExperimentResult& res, const Run& run) {
  if (!cfg.checkpoint || !run.model) return;
  Checkpoint ck;
  ck.episode = run.metrics.size();
  ck.covariance = run.covariance;
  ck.alpha = run.schedule.alpha;
  ck.lambda = run.schedule.lambda;
  ck.model_kind = model_kind(*run.model);
  ck.model = model_blocks(*run.model);
  write_checkpoint((res.out_dir / "checkpoint.bin").string(), ck);
}

template <class Backend, class Comps>
ExperimentResult run_learning(const RunConfig& cfg, Backend& backend, Comps& comps, const learner::HyperParams& hp,
                              const learner::LearnerOptions& opts) {
  ExperimentResult res;
  res.out_dir = prepare_out(cfg.out);
  MetricsWriter writer((res.out_dir / "metrics.csv").string());
  Rng rng(derive_seed(cfg.seed, kLearnerStream));
  auto run = learner::run_learner(backend, comps, hp, opts, rng,
                                  [&](const learner::EpisodeMetrics& m) { writer.write(m); });
  res.metrics = run.metrics;
  res.optimal_value = comps.optimal_value();
  finish_summary(res);
  if constexpr (std::is_same_v<Comps, learner::TabularComponents>) res.model_index = comps.last_index();
  maybe_checkpoint(cfg, res, run);
  return res;
}

inline learner::LearnerOptions learner_options(const RunConfig& cfg) {
  learner::LearnerOptions o;
  o.episodes = cfg.episodes;
  o.record_wallclock = cfg.timing;
  return o;
}

}  // namespace detail

/// Rep-UCB-Rec on the configured backend. Writes metrics.csv and meta.json
/// (and checkpoint.bin when enabled) into cfg.out.
inline ExperimentResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  const learner::LearnerOptions opts = detail::learner_options(cfg);
  ExperimentResult res;
  if (cfg.backend == "tabular") {
    TabularSetup setup = build_tabular(cfg);
    oracle::TabularBackend backend(setup.mdp);
    learner::TabularComponents comps(setup.mdp, setup.members);
    const auto& p = setup.mdp->problem();
    const auto hp = hyper_params(cfg, p.num_items, p.slate_size, p.discount, setup.members.size());
    res = detail::run_learning(cfg, backend, comps, hp, opts);
    res.truth_index = setup.truth_index;
  } else {
    SimulatorBackend backend = build_simulator(cfg);
    Rng init(derive_seed(cfg.seed, kModelInitStream));
    learner::SimulatorComponents comps(backend, simulator_options(cfg), init, derive_seed(cfg.seed, kEvalStream));
    const auto hp = hyper_params(cfg, cfg.items, cfg.slate_size, cfg.discount, cfg.model_class_size);
    res = detail::run_learning(cfg, backend, comps, hp, opts);
  }
  detail::write_meta(cfg, "run", res);
  return res;
}

namespace detail {

/// Non-learning baselines: a fixed policy, one row per episode. Each episode
/// still rolls in and takes two steps with the policy so that n_samples
/// tracks the same budget as the learner.
template <class Backend, class Policy, class Value>
ExperimentResult run_fixed_policy(const RunConfig& cfg, Backend& backend, const Policy& policy, Value&& value,
                                  std::optional<double> optimum) {
  ExperimentResult res;
  res.out_dir = prepare_out(cfg.out);
  res.optimal_value = optimum;
  MetricsWriter writer((res.out_dir / "metrics.csv").string());
  Rng rng(derive_seed(cfg.seed, kLearnerStream));
  const std::optional<double> v = value(policy);
  std::size_t samples = 0;
  for (std::size_t n = 1; n <= cfg.episodes; ++n) {
    learner::collect_episode_tuples(backend, policy, rng, learner::Collection::on_policy);
    samples += 2;
    learner::EpisodeMetrics m;
    m.episode = n;
    m.num_samples = samples;
    m.value_true = v;
    if (v && optimum) m.suboptimality = *optimum - *v;
    writer.write(m);
    res.metrics.push_back(m);
  }
  finish_summary(res);
  return res;
}

inline TabularPolicy myopic_tabular(const oracle::TabularLowRankMDP& mdp) {
  std::vector<std::size_t> choice(mdp.num_states(), 0);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    double best = -1.0;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      if (mdp.reward(s, a) > best) {
        best = mdp.reward(s, a);
        choice[s] = a;
      }
    }
  }
  return TabularPolicy::deterministic(mdp.action_set(), choice);
}

}  // namespace detail

/// Comparison baselines under the same metric schema: random (uniform over
/// slates), epsilon_greedy (MLE + bonus-free planning, on-policy data,
/// greedy_epsilon mixing) and myopic_greedy (maximise the immediate reward).
inline ExperimentResult run_baseline(const RunConfig& cfg, const std::string& strategy) {
  cfg.validate();
  if (strategy != "random" && strategy != "epsilon_greedy" && strategy != "myopic_greedy") {
    throw ConfigError("unknown baseline strategy '" + strategy + "'");
  }
  const std::string mode = "baseline:" + strategy;
  ExperimentResult res;
  if (cfg.backend == "tabular") {
    TabularSetup setup = build_tabular(cfg);
    oracle::TabularBackend backend(setup.mdp);
    learner::TabularComponents comps(setup.mdp, setup.members);
    if (strategy == "epsilon_greedy") {
      const auto& p = setup.mdp->problem();
      const auto hp = hyper_params(cfg, p.num_items, p.slate_size, p.discount, setup.members.size());
      learner::LearnerOptions opts = detail::learner_options(cfg);
      opts.use_bonus = false;
      opts.collection = learner::Collection::on_policy;
      opts.deploy_epsilon = cfg.greedy_epsilon;
      res = detail::run_learning(cfg, backend, comps, hp, opts);
    } else {
      const TabularPolicy pi = strategy == "random"
                                   ? TabularPolicy::uniform(setup.mdp->action_set(), setup.mdp->num_states())
                                   : detail::myopic_tabular(*setup.mdp);
      res = detail::run_fixed_policy(
          cfg, backend, pi, [&](const TabularPolicy& q) { return comps.true_value(q); }, comps.optimal_value());
    }
    res.truth_index = setup.truth_index;
  } else {
    SimulatorBackend backend = build_simulator(cfg);
    Rng init(derive_seed(cfg.seed, kModelInitStream));
    learner::SimulatorComponents comps(backend, simulator_options(cfg), init, derive_seed(cfg.seed, kEvalStream));
    if (strategy == "epsilon_greedy") {
      const auto hp = hyper_params(cfg, cfg.items, cfg.slate_size, cfg.discount, cfg.model_class_size);
      learner::LearnerOptions opts = detail::learner_options(cfg);
      opts.use_bonus = false;
      opts.collection = learner::Collection::on_policy;
      opts.deploy_epsilon = cfg.greedy_epsilon;
      res = detail::run_learning(cfg, backend, comps, hp, opts);
    } else if (strategy == "random") {
      const UniformRandomPolicy pi(cfg.items, cfg.slate_size);
      res = detail::run_fixed_policy(
          cfg, backend, pi, [&](const UniformRandomPolicy& q) { return comps.true_value(q); }, std::nullopt);
    } else {
      const learner::MyopicSimPolicy pi(comps.estimator(), cfg.slate_size);
      res = detail::run_fixed_policy(
          cfg, backend, pi, [&](const learner::MyopicSimPolicy& q) { return comps.true_value(q); }, std::nullopt);
    }
  }
  detail::write_meta(cfg, mode, res);
  return res;
}

}  // namespace slaterec::harness
