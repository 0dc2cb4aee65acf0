#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "slaterec/env/choice.hpp"
#include "slaterec/harness/experiment.hpp"
#include "slaterec/learner/covariance.hpp"
#include "slaterec/learner/mle.hpp"
#include "slaterec/learner/tabular_planner.hpp"
#include "slaterec/mdp/rollin.hpp"
#include "slaterec/mdp/uniform_slate.hpp"

namespace slaterec::harness {

inline constexpr const char* kTabularAcceptanceConfig = R"(# tabular end-to-end acceptance instance
backend = tabular
states = 12
items = 5
slate_size = 2
rank = 3
discount = 0.9
episodes = 300
model_class = finite
model_class_size = 8
delta = 0.1
c_alpha = 0.01
c_lambda = 1
greedy_epsilon = 0.1
)";

inline constexpr const char* kSimulatorAcceptanceConfig = R"(# simulator acceptance run
backend = simulator
topics = 4
items = 10
slate_size = 3
history = 3
discount = 0.9
episodes = 20
model_class = parametric
model_class_size = 8
c_alpha = 1
c_lambda = 1
eval_rollouts = 100
)";

inline constexpr std::size_t kAcceptanceSeeds = 10;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double limit_seconds = 0.0;  // 0 = no limit
};

inline std::string format_result(const CriterionResult& r) {
  char timing[96];
  if (r.limit_seconds > 0.0) {
    std::snprintf(timing, sizeof(timing), "%.2f s, limit %.0f s", r.seconds, r.limit_seconds);
  } else {
    std::snprintf(timing, sizeof(timing), "%.2f s", r.seconds);
  }
  return std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " [" + r.name +
         "] " + r.detail + " (" + timing + ")";
}

/// Shared state across criteria of one invocation; the end-to-end runs are
/// reused by the baseline comparison.
struct AcceptanceContext {
  std::filesystem::path out_root = "accept_out";
  std::map<std::uint64_t, ExperimentResult> learner_runs;
};

namespace detail {

inline std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

inline RunConfig acceptance_config(const char* text, std::uint64_t seed, const std::filesystem::path& out) {
  RunConfig cfg = parse_config_text(text);
  cfg.seed = seed;
  cfg.instance_seed = seed;
  cfg.out = out.string();
  return cfg;
}

inline ExperimentResult& learner_run(AcceptanceContext& ctx, std::uint64_t seed) {
  auto it = ctx.learner_runs.find(seed);
  if (it == ctx.learner_runs.end()) {
    const RunConfig cfg =
        acceptance_config(kTabularAcceptanceConfig, seed, ctx.out_root / "tabular" / ("seed_" + std::to_string(seed)));
    it = ctx.learner_runs.emplace(seed, run_experiment(cfg)).first;
  }
  return it->second;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace detail

/// 1: choice_probs against a direct exp/sum evaluation.
inline CriterionResult criterion_choice_model(AcceptanceContext&) {
  CriterionResult r{1, "choice-model correctness", false, "", 0.0, 1.0};
  Rng rng(101);
  const std::size_t topics = 4;
  const env::ItemCatalog catalog = env::sample_catalog(rng, 12, topics);
  double max_err = 0.0;
  double max_sum_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    env::UserState u{Eigen::VectorXd(static_cast<Eigen::Index>(topics))};
    for (Eigen::Index t = 0; t < u.interest.size(); ++t) u.interest[t] = rng.uniform(-1.0, 1.0);
    const std::size_t k = 1 + rng.index(5);
    const Slate slate = UniformRandomPolicy(catalog.size(), k)(0, rng);
    const std::vector<double> p = env::choice_probs(u, slate, catalog);
    double denom = 1.0;
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j) {
      double score = 0.0;
      for (std::size_t t = 0; t < topics; ++t) {
        score += catalog[slate[j]].topics[static_cast<Eigen::Index>(t)] * u.interest[static_cast<Eigen::Index>(t)];
      }
      w[j] = std::exp(score);
      denom += w[j];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      max_err = std::max(max_err, std::abs(p[j] - w[j] / denom));
      sum += p[j];
    }
    max_err = std::max(max_err, std::abs(p[k] - 1.0 / denom));
    sum += p[k];
    max_sum_err = std::max(max_sum_err, std::abs(sum - 1.0));
  }
  r.passed = max_err <= 1e-12 && max_sum_err <= 1e-12;
  r.detail = "max |p - p_ref| = " + detail::fmt("%.3g", max_err) + ", max |sum - 1| = " +
             detail::fmt("%.3g", max_sum_err) + " over 1000 pairs (tol 1e-12)";
  return r;
}

/// 2: P(target | non-null) >= 1/k for every uniform-slate output over a
/// grid of catalogs (topics on {-1,0,1}^2, |I| <= 6) and users on
/// {-1,-0.5,0,0.5,1}^2, k <= 3. The unconditional rate is only reported.
inline CriterionResult criterion_conditional_target_rate(AcceptanceContext&) {
  CriterionResult r{2, "uniform slate conditional target rate", false, "", 0.0, 10.0};
  std::vector<Eigen::Vector2d> points;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) points.emplace_back(a, b);
  }
  std::vector<Eigen::Vector2d> users;
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) users.emplace_back(0.5 * a, 0.5 * b);
  }
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst = 1.0;
  std::string example;
  double uncond_sum = 0.0;
  std::size_t uncond_below = 0;

  std::vector<std::size_t> idx;
  std::function<void(std::size_t, std::size_t)> visit = [&](std::size_t n, std::size_t start) {
    if (idx.size() == n) {
      for (const auto& uv : users) {
        std::vector<double> logits(n);
        std::vector<double> prop(n);
        for (std::size_t i = 0; i < n; ++i) {
          logits[i] = points[idx[i]].dot(uv);
          prop[i] = detail::sigmoid(logits[i]);
        }
        for (std::size_t k = 1; k <= std::min<std::size_t>(3, n); ++k) {
          for (ItemId target = 0; target < n; ++target) {
            const Slate slate = slate_for_target(target, prop, k);
            std::vector<double> l(k);
            for (std::size_t j = 0; j < k; ++j) l[j] = logits[slate[j]];
            const std::vector<double> p = env::mnl_with_null(l);
            std::size_t slot = 0;
            while (slate[slot] != target) ++slot;
            const double cond = p[slot] / (1.0 - p[k]);
            ++checked;
            uncond_sum += p[slot];
            if (p[slot] < 1.0 / double(k)) ++uncond_below;
            if (cond < 1.0 / double(k) - 1e-12) {
              ++violations;
              if (cond / (1.0 / double(k)) < worst) {
                worst = cond * double(k);
                std::ostringstream os;
                os << "|I|=" << n << " k=" << k << " u=(" << uv[0] << "," << uv[1] << ") target " << target
                   << " logit " << logits[target] << ": P(target|non-null)=" << detail::fmt("%.4f", cond);
                example = os.str();
              }
            }
          }
        }
      }
      return;
    }
    for (std::size_t p = start; p < points.size(); ++p) {
      idx.push_back(p);
      visit(n, p);
      idx.pop_back();
    }
  };
  for (std::size_t n = 1; n <= 6; ++n) visit(n, 0);

  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " of " + std::to_string(checked) +
             " uniform-slate outputs below 1/k; unconditional mean target rate " +
             detail::fmt("%.4f", uncond_sum / double(checked)) + ", " + std::to_string(uncond_below) +
             " below 1/k unconditionally";
  if (!example.empty()) r.detail += "; worst: " + example;
  return r;
}

/// 3: roll-in state frequencies against the exact occupancy.
inline CriterionResult criterion_occupancy(AcceptanceContext&) {
  CriterionResult r{3, "occupancy fidelity", false, "", 0.0, 30.0};
  Rng rng(303);
  auto mdp = std::make_shared<const oracle::TabularLowRankMDP>(oracle::make_tabular(rng, 5, 4, 2, 2, 0.8));
  const Eigen::MatrixXd probs =
      oracle::sample_simplex_rows(rng, mdp->num_states(), mdp->num_actions(), 1.0);
  const TabularPolicy pi(mdp->action_set(), probs);
  const Eigen::VectorXd exact = oracle::exact_occupancy(pi, *mdp).rowwise().sum();
  oracle::TabularBackend backend(mdp);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(exact.size());
  const int samples = 20000;
  for (int m = 0; m < samples; ++m) freq[static_cast<Eigen::Index>(rollin_sample(backend, pi, rng).state)] += 1.0;
  freq /= double(samples);
  const double tv = 0.5 * (freq - exact).cwiseAbs().sum();
  r.passed = tv <= 0.02;
  r.detail = "TV(roll-in, exact) = " + detail::fmt("%.4f", tv) + " over 20000 samples (tol 0.02)";
  return r;
}

/// 4: finite-class MLE from 1000 uniform-action tuples.
inline CriterionResult criterion_mle(AcceptanceContext&) {
  CriterionResult r{4, "MLE oracle", false, "", 0.0, 60.0};
  std::size_t correct = 0;
  double worst_tv = 0.0;
  std::size_t checked_pairs = 0;
  for (std::uint64_t seed = 1; seed <= kAcceptanceSeeds; ++seed) {
    Rng inst(seed);
    auto mdp = std::make_shared<const oracle::TabularLowRankMDP>(oracle::make_tabular(inst, 12, 5, 3, 2, 0.9));
    std::size_t truth_index = 0;
    const auto members = oracle::make_model_class(inst, mdp->truth(), 8, &truth_index);
    oracle::TabularBackend backend(mdp);
    const TabularPolicy pi0 = TabularPolicy::uniform(mdp->action_set(), mdp->num_states());
    learner::Datasets<std::size_t> data;
    Rng rng(derive_seed(seed, kLearnerStream));
    while (data.num_samples() < 1000) {
      auto tuples = learner::collect_episode_tuples(backend, pi0, rng);
      data.append(std::move(tuples.first), std::move(tuples.second));
    }
    const auto fit = learner::mle_fit(data, std::span<const TabularLowRankModel>(members));
    if (fit.index == truth_index) ++correct;
    const auto& model = members[fit.index];
    const std::size_t items = mdp->problem().num_items;
    std::vector<std::size_t> visits(mdp->num_states() * (items + 1), 0);
    data.for_each([&](const auto& t) {
      ++visits[t.state * (items + 1) + consumed_item(t.response, t.slate, items)];
    });
    for (std::size_t s = 0; s < mdp->num_states(); ++s) {
      for (ItemId i = 0; i <= items; ++i) {
        if (visits[s * (items + 1) + i] < 50) continue;
        ++checked_pairs;
        const double tv = 0.5 * (model.next_state_distribution(s, i) -
                                 mdp->truth().next_state_distribution(s, i)).cwiseAbs().sum();
        worst_tv = std::max(worst_tv, tv);
      }
    }
  }
  r.passed = correct >= 9 && worst_tv <= 0.1;
  r.detail = "true model selected on " + std::to_string(correct) + "/10 seeds (need 9); max TV " +
             detail::fmt("%.4f", worst_tv) + " over " + std::to_string(checked_pairs) +
             " (s,i) pairs visited >= 50 times (tol 0.1)";
  return r;
}

/// 5: bonus range, monotonicity under data growth, covariance floor.
inline CriterionResult criterion_bonus(AcceptanceContext&) {
  CriterionResult r{5, "bonus properties", false, "", 0.0, 30.0};
  Rng rng(505);
  std::size_t out_of_range = 0;
  std::size_t increases = 0;
  std::size_t eig_violations = 0;
  std::size_t probes = 0;
  double worst_increase = 0.0;
  for (int seq = 0; seq < 100; ++seq) {
    const auto mdp = oracle::make_tabular(rng, 6, 4, 3, 2, 0.9);
    const TabularLowRankModel phi_hat = oracle::random_low_rank_model(rng, 6, 4, 3);
    const double alpha = rng.uniform(0.1, 3.0);
    const double lambda = rng.uniform(0.1, 2.0);
    std::vector<learner::TransitionTuple<std::size_t>> data;
    std::vector<double> previous;
    for (int step = 0; step <= 40; ++step) {
      if (step > 0) {
        const std::size_t s = rng.index(mdp.num_states());
        const Slate& a = mdp.actions()[rng.index(mdp.num_actions())];
        data.push_back({s, a, s, mdp.problem().choice(s, a), UserResponse{}});
      }
      const Eigen::MatrixXd sigma = learner::update_covariance(data, phi_hat, lambda);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
      if (eig.eigenvalues().minCoeff() < lambda * (1.0 - 1e-12)) ++eig_violations;
      const learner::EllipticalBonus b(sigma, alpha);
      std::vector<double> current;
      for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        for (const Slate& a : mdp.actions()) {
          const std::vector<double> choice = mdp.problem().choice(s, a);
          const double v = b(learner::averaged_feature(phi_hat, s, a, std::span<const double>(choice)));
          if (!(v >= 0.0 && v <= 2.0)) ++out_of_range;
          current.push_back(v);
        }
      }
      for (std::size_t j = 0; j < previous.size(); ++j) {
        ++probes;
        if (current[j] > previous[j] + 1e-12) {
          ++increases;
          worst_increase = std::max(worst_increase, current[j] - previous[j]);
        }
      }
      previous = std::move(current);
    }
  }
  r.passed = out_of_range == 0 && increases == 0 && eig_violations == 0;
  r.detail = std::to_string(probes) + " before/after probes over 100 sequences: " + std::to_string(out_of_range) +
             " outside [0,2], " + std::to_string(increases) + " increases (max " +
             detail::fmt("%.3g", worst_increase) + "), " + std::to_string(eig_violations) +
             " covariances with min eigenvalue < lambda";
  return r;
}

/// 6: planner with the true model and no bonus reaches V*.
inline CriterionResult criterion_planner(AcceptanceContext&) {
  CriterionResult r{6, "planner exactness", false, "", 0.0, 60.0};
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(600 + seed);
    const std::size_t states = 4 + rng.index(7);  // 4..10
    const auto mdp = oracle::make_tabular(rng, states, 5, 3, 2, 0.9);
    const auto plan = learner::plan_tabular(mdp.problem(), mdp.action_set(), mdp.truth(), nullptr);
    const double v_plan = oracle::exact_policy_value(mdp, plan.policy);
    worst = std::max(worst, std::abs(v_plan - oracle::optimal_value(mdp)));
  }
  r.passed = worst <= 1e-6;
  r.detail = "max |V^plan - V*| = " + detail::fmt("%.3g", worst) + " over 20 seeds (tol 1e-6)";
  return r;
}

/// 7: N=300 learning runs on the acceptance instance. A seed passes when the
/// mixture is within 0.1 V* and the trailing 50-episode mean of
/// per-episode suboptimality never increases.
inline CriterionResult criterion_learning(AcceptanceContext& ctx) {
  CriterionResult r{7, "end-to-end learning", false, "", 0.0, 600.0};
  std::size_t ratio_ok = 0;
  std::size_t mono_ok = 0;
  std::size_t both_ok = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= kAcceptanceSeeds; ++seed) {
    const ExperimentResult& res = detail::learner_run(ctx, seed);
    const double ratio = *res.mixture_suboptimality / *res.optimal_value;
    worst_ratio = std::max(worst_ratio, ratio);
    std::vector<double> sub;
    for (const auto& m : res.metrics) sub.push_back(*m.suboptimality);
    bool mono = true;
    double window = 0.0;
    for (std::size_t n = 0; n < 50; ++n) window += sub[n];
    double prev = window / 50.0;
    for (std::size_t n = 50; n < sub.size(); ++n) {
      window += sub[n] - sub[n - 50];
      const double cur = window / 50.0;
      if (cur > prev + 1e-12) mono = false;
      prev = cur;
    }
    ratio_ok += ratio <= 0.1;
    mono_ok += mono;
    both_ok += ratio <= 0.1 && mono;
  }
  r.passed = both_ok >= 8;
  r.detail = std::to_string(both_ok) + "/10 seeds pass (need 8): mixture suboptimality <= 0.1 V* on " +
             std::to_string(ratio_ok) + " (worst ratio " + detail::fmt("%.4f", worst_ratio) +
             "), moving average non-increasing on " + std::to_string(mono_ok);
  return r;
}

/// 8: Rep-UCB-Rec mixture against epsilon-greedy (eps 0.1) with the same budget.
inline CriterionResult criterion_baseline(AcceptanceContext& ctx) {
  CriterionResult r{8, "baseline separation", false, "", 0.0, 900.0};
  std::size_t wins = 0;
  double rep_mean = 0.0;
  double eg_mean = 0.0;
  for (std::uint64_t seed = 1; seed <= kAcceptanceSeeds; ++seed) {
    const ExperimentResult& rep = detail::learner_run(ctx, seed);
    RunConfig cfg = detail::acceptance_config(kTabularAcceptanceConfig, seed,
                                              ctx.out_root / "epsilon_greedy" / ("seed_" + std::to_string(seed)));
    cfg.greedy_epsilon = 0.1;
    const ExperimentResult eg = run_baseline(cfg, "epsilon_greedy");
    rep_mean += *rep.mixture_suboptimality / double(kAcceptanceSeeds);
    eg_mean += *eg.final_suboptimality / double(kAcceptanceSeeds);
    wins += *rep.mixture_suboptimality < *eg.final_suboptimality;
  }
  r.passed = wins >= 7;
  r.detail = "Rep-UCB-Rec better on " + std::to_string(wins) + "/10 seeds (need 7); mean suboptimality " +
             detail::fmt("%.3g", rep_mean) + " vs " + detail::fmt("%.3g", eg_mean);
  return r;
}

/// 9: discounted engagement sums of simulated trajectories lie in [0,1].
inline CriterionResult criterion_normalization(AcceptanceContext&) {
  CriterionResult r{9, "normalization invariant", false, "", 0.0, 30.0};
  RunConfig cfg = parse_config_text(kSimulatorAcceptanceConfig);
  SimulatorBackend backend = build_simulator(cfg);
  const UniformRandomPolicy pi(cfg.items, cfg.slate_size);
  Rng rng(909);
  double lo = 1.0;
  double hi = 0.0;
  std::size_t outside = 0;
  for (int m = 0; m < 10000; ++m) {
    const double g = sampled_return(backend, pi, rng);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    if (!(g >= 0.0 && g <= 1.0)) ++outside;
  }
  r.passed = outside == 0;
  r.detail = std::to_string(outside) + " of 10000 returns outside [0,1]; observed range [" +
             detail::fmt("%.4f", lo) + ", " + detail::fmt("%.4f", hi) + "]";
  return r;
}

/// 10: same config and seed twice gives byte-identical metrics.csv.
inline CriterionResult criterion_determinism(AcceptanceContext& ctx, const std::string& suite) {
  CriterionResult r{10, "determinism (" + suite + ")", false, "", 0.0, 0.0};
  const char* text = suite == "tabular" ? kTabularAcceptanceConfig : kSimulatorAcceptanceConfig;
  std::string bytes[2];
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = ctx.out_root / ("determinism_" + suite) / ("run_" + std::to_string(rep));
    run_experiment(detail::acceptance_config(text, 1, dir));
    bytes[rep] = detail::read_bytes(dir / "metrics.csv");
  }
  r.passed = !bytes[0].empty() && bytes[0] == bytes[1];
  r.detail = "metrics.csv " + std::to_string(bytes[0].size()) + " bytes, " +
             (bytes[0] == bytes[1] ? "identical" : "different");
  return r;
}

using CriterionFn = std::function<CriterionResult(AcceptanceContext&)>;

inline std::map<int, CriterionFn> criteria_for_suite(const std::string& suite) {
  if (suite == "tabular") {
    return {{3, criterion_occupancy},
            {4, criterion_mle},
            {5, criterion_bonus},
            {6, criterion_planner},
            {7, criterion_learning},
            {8, criterion_baseline},
            {10, [](AcceptanceContext& c) { return criterion_determinism(c, "tabular"); }}};
  }
  if (suite == "simulator") {
    return {{1, criterion_choice_model},
            {2, criterion_conditional_target_rate},
            {9, criterion_normalization},
            {10, [](AcceptanceContext& c) { return criterion_determinism(c, "simulator"); }}};
  }
  throw ConfigError("unknown acceptance suite '" + suite + "'");
}

/// Runs one criterion, timing it and converting exceptions into failures.
inline CriterionResult run_criterion(const CriterionFn& fn, int id, AcceptanceContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn(ctx);
  } catch (const std::exception& e) {
    r.id = id;
    r.name = "error";
    r.passed = false;
    r.detail = std::string("threw: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.limit_seconds > 0.0 && r.seconds > r.limit_seconds) {
    r.passed = false;
    r.detail += "; exceeded runtime limit";
  }
  return r;
}

inline std::vector<CriterionResult> run_suite(const std::string& suite, AcceptanceContext& ctx,
                                              const std::function<void(const CriterionResult&)>& sink = {}) {
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : criteria_for_suite(suite)) {
    out.push_back(run_criterion(fn, id, ctx));
    if (sink) sink(out.back());
  }
  return out;
}

}  // namespace slaterec::harness
