#pragma once

#include <cmath>
#include <istream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/distribution.hpp"
#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/core/slate.hpp"
#include "slaterec/env/choice.hpp"
#include "slaterec/mdp/low_rank.hpp"
#include "slaterec/mdp/policy.hpp"

namespace slaterec::oracle {

/// The parts of a tabular instance the learner is allowed to know: choice
/// logits, item rewards, discount and d0. Transitions are not included.
struct TabularProblem {
  std::size_t num_states = 0;
  std::size_t num_items = 0;
  std::size_t slate_size = 0;
  double discount = 0.0;
  Eigen::VectorXd initial;  // d0 over states
  Eigen::MatrixXd logits;   // S x |I| MNL scores; null scores 0
  Eigen::MatrixXd reward;   // S x |I| in [0, 1 - gamma]; null pays 0

  std::vector<double> choice(std::size_t s, const Slate& slate) const {
    std::vector<double> z(slate.size());
    for (std::size_t j = 0; j < slate.size(); ++j) {
      z[j] = logits(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(slate[j]));
    }
    return env::mnl_with_null(z);
  }

  double item_reward(std::size_t s, ItemId i) const {
    return i >= num_items ? 0.0
                          : reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i));
  }

  double slate_reward(std::size_t s, const Slate& slate, const std::vector<double>& p) const {
    double r = 0.0;
    for (std::size_t j = 0; j < slate.size(); ++j) r += p[j] * item_reward(s, slate[j]);
    return r;
  }

  // Singleton-slate probability P(i | s, {i}) for every item.
  std::vector<double> propensities(std::size_t s) const {
    std::vector<double> out(num_items);
    for (ItemId i = 0; i < num_items; ++i) {
      out[i] = 1.0 / (1.0 + std::exp(-logits(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i))));
    }
    return out;
  }
};

/// Enumerable low-rank MDP with known ground truth. The action set is every
/// k-subset of the catalog; P and r are tabulated by brute-force summation.
class TabularLowRankMDP {
 public:
  TabularLowRankMDP(TabularProblem problem, TabularLowRankModel truth)
      : problem_(std::move(problem)), truth_(std::move(truth)),
        actions_(std::make_shared<const ActionSet>(
            enumerate_slates(problem_.num_items, problem_.slate_size))) {
    if (truth_.num_states() != problem_.num_states || truth_.num_items() != problem_.num_items) {
      throw ConfigError("tabular instance: model and problem dimensions differ");
    }
    const std::size_t n = problem_.num_states;
    transitions_.resize(n * actions_->size());
    rewards_.resize(n * actions_->size());
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < actions_->size(); ++a) {
        const Slate& slate = (*actions_)[a];
        const std::vector<double> p = problem_.choice(s, slate);
        Eigen::VectorXd next = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j <= slate.size(); ++j) {
          const ItemId id = j < slate.size() ? slate[j] : truth_.null_id();
          for (std::size_t t = 0; t < n; ++t) {
            next[static_cast<Eigen::Index>(t)] += p[j] * truth_.transition_prob(s, id, t);
          }
        }
        transitions_[s * actions_->size() + a] = std::move(next);
        rewards_[s * actions_->size() + a] = problem_.slate_reward(s, slate, p);
      }
    }
  }

  std::size_t num_states() const { return problem_.num_states; }
  std::size_t num_actions() const { return actions_->size(); }
  const Eigen::VectorXd& transition(std::size_t s, std::size_t a) const {
    return transitions_[s * actions_->size() + a];
  }
  double reward(std::size_t s, std::size_t a) const { return rewards_[s * actions_->size() + a]; }
  const Eigen::VectorXd& initial() const { return problem_.initial; }
  double discount() const { return problem_.discount; }

  const TabularProblem& problem() const { return problem_; }
  const TabularLowRankModel& truth() const { return truth_; }
  const ActionSet& actions() const { return *actions_; }
  std::shared_ptr<const ActionSet> action_set() const { return actions_; }

  std::size_t action_index(const Slate& slate) const {
    for (std::size_t a = 0; a < actions_->size(); ++a) {
      if ((*actions_)[a] == slate) return a;
    }
    throw InvalidSlate("slate is not in the enumerated action set");
  }

 private:
  TabularProblem problem_;
  TabularLowRankModel truth_;
  std::shared_ptr<const ActionSet> actions_;
  std::vector<Eigen::VectorXd> transitions_;
  std::vector<double> rewards_;
};

inline Eigen::MatrixXd sample_simplex_rows(Rng& rng, std::size_t rows, std::size_t cols,
                                           double concentration = 1.0) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const auto p = sample_simplex(rng, cols, concentration);
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = p[c];
    }
  }
  return m;
}

// Sparse anchors keep the d next-state profiles distinguishable.
inline constexpr double kAnchorConcentration = 0.3;

/// Random (mu, phi) valid by construction: d anchor distributions over
/// states form mu (mu(s') is column s' of the anchor matrix) and every
/// phi(s, i) lies on the d-simplex, so P(.|s,i) is a convex combination of
/// anchors and ||phi||_2 <= 1. Each anchor coordinate of sum mu(s') f(s')
/// lies in [0,1] for f in [0,1]^S, which gives the sqrt(d) mass bound.
inline TabularLowRankModel random_low_rank_model(Rng& rng, std::size_t num_states,
                                                 std::size_t num_items, std::size_t rank) {
  Eigen::MatrixXd anchors = sample_simplex_rows(rng, rank, num_states, kAnchorConcentration);
  Eigen::MatrixXd phi = sample_simplex_rows(rng, num_states * (num_items + 1), rank);
  return TabularLowRankModel(num_states, num_items, std::move(phi), anchors.transpose());
}

inline TabularLowRankMDP make_tabular(Rng& rng, std::size_t num_states, std::size_t num_items,
                                      std::size_t rank, std::size_t slate_size, double discount) {
  if (num_states == 0 || num_items == 0) throw ConfigError("make_tabular: empty state or item set");
  if (rank == 0 || rank > num_states) throw ConfigError("make_tabular: need 1 <= d <= |S|");
  if (slate_size == 0 || slate_size > num_items) throw ConfigError("make_tabular: need 1 <= k <= |I|");
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("make_tabular: discount must be in [0,1)");

  TabularLowRankModel truth = random_low_rank_model(rng, num_states, num_items, rank);
  TabularProblem problem;
  problem.num_states = num_states;
  problem.num_items = num_items;
  problem.slate_size = slate_size;
  problem.discount = discount;
  const auto d0 = sample_simplex(rng, num_states);
  problem.initial = Eigen::Map<const Eigen::VectorXd>(d0.data(), static_cast<Eigen::Index>(num_states));
  problem.logits.resize(static_cast<Eigen::Index>(num_states), static_cast<Eigen::Index>(num_items));
  problem.reward.resize(static_cast<Eigen::Index>(num_states), static_cast<Eigen::Index>(num_items));
  for (Eigen::Index s = 0; s < problem.logits.rows(); ++s) {
    for (Eigen::Index i = 0; i < problem.logits.cols(); ++i) {
      problem.logits(s, i) = rng.uniform(-1.0, 1.0);
      problem.reward(s, i) = rng.uniform(0.0, 1.0 - discount);
    }
  }
  return TabularLowRankMDP(std::move(problem), std::move(truth));
}

/// Finite model class of `size` members containing `truth` at a random
/// position. Odd decoys blend the true features halfway toward random
/// simplex points (hard to tell apart); even decoys are independent draws.
inline std::vector<TabularLowRankModel> make_model_class(Rng& rng, const TabularLowRankModel& truth,
                                                         std::size_t size, std::size_t* truth_index) {
  if (size == 0) throw ConfigError("model class must have at least one member");
  const std::size_t where = rng.index(size);
  std::vector<TabularLowRankModel> members;
  members.reserve(size);
  std::size_t decoy = 0;
  for (std::size_t m = 0; m < size; ++m) {
    if (m == where) {
      members.push_back(truth);
      continue;
    }
    ++decoy;
    if (decoy % 2 == 1) {
      Eigen::MatrixXd noise =
          sample_simplex_rows(rng, static_cast<std::size_t>(truth.phi().rows()), truth.rank());
      members.emplace_back(truth.num_states(), truth.num_items(), 0.5 * truth.phi() + 0.5 * noise,
                           truth.mu());
    } else {
      members.push_back(random_low_rank_model(rng, truth.num_states(), truth.num_items(), truth.rank()));
    }
  }
  if (truth_index) *truth_index = where;
  return members;
}

// ---------------------------------------------------------------------------
// Exact solvers.

struct ValueIterationResult {
  Eigen::VectorXd values;            // V*
  Eigen::MatrixXd q;                 // S x |A|
  std::vector<std::size_t> greedy;   // argmax_a Q(s, a), lowest index on ties
  std::vector<double> residuals;     // ||T V_t - V_t||_inf per sweep
};

template <class M>
ValueIterationResult exact_value_iteration(const M& mdp, double tol) {
  const std::size_t n = mdp.num_states();
  const std::size_t na = mdp.num_actions();
  const double gamma = mdp.discount();
  ValueIterationResult out;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(na));
  auto backup = [&](const Eigen::VectorXd& values) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        q(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
            mdp.reward(s, a) + gamma * mdp.transition(s, a).dot(values);
      }
    }
    return Eigen::VectorXd(q.rowwise().maxCoeff());
  };
  for (std::size_t sweep = 0; sweep < 1000000; ++sweep) {
    Eigen::VectorXd next = backup(v);
    const double residual = (next - v).template lpNorm<Eigen::Infinity>();
    out.residuals.push_back(residual);
    if (residual <= tol) break;
    v = std::move(next);
  }
  backup(v);
  out.values = v;
  out.q = q;
  out.greedy.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    Eigen::Index best = 0;
    q.row(static_cast<Eigen::Index>(s)).maxCoeff(&best);
    out.greedy[s] = static_cast<std::size_t>(best);
  }
  return out;
}

/// V^pi by fixed-point iteration of the policy Bellman operator.
template <class M>
Eigen::VectorXd exact_policy_values(const M& mdp, const TabularPolicy& pi, double tol = 1e-13) {
  const std::size_t n = mdp.num_states();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t sweep = 0; sweep < 1000000; ++sweep) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        const double w = pi.prob(s, a);
        if (w == 0.0) continue;
        next[static_cast<Eigen::Index>(s)] +=
            w * (mdp.reward(s, a) + mdp.discount() * mdp.transition(s, a).dot(v));
      }
    }
    const double delta = (next - v).lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (delta <= tol) break;
  }
  return v;
}

template <class M>
double exact_policy_value(const M& mdp, const TabularPolicy& pi) {
  return mdp.initial().dot(exact_policy_values(mdp, pi));
}

/// Discounted state-action occupancy d^pi(s,a) = (1-gamma) sum_t gamma^t P(s_t=s, a_t=a),
/// from the linear system d = (1-gamma) d0 + gamma P_pi^T d.
template <class M>
Eigen::MatrixXd exact_occupancy(const TabularPolicy& pi, const M& mdp) {
  const auto n = static_cast<Eigen::Index>(mdp.num_states());
  const double gamma = mdp.discount();
  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t s = 0; s < mdp.num_states(); ++s) {
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      const double w = pi.prob(s, a);
      if (w != 0.0) p_pi.row(static_cast<Eigen::Index>(s)) += w * mdp.transition(s, a).transpose();
    }
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(n, n) - gamma * p_pi.transpose();
  const Eigen::VectorXd rhs = (1.0 - gamma) * mdp.initial();
  const Eigen::VectorXd state = lhs.partialPivLu().solve(rhs);
  if (!((lhs * state - rhs).lpNorm<Eigen::Infinity>() <= 1e-10)) {
    throw NumericalError("occupancy system is singular");
  }
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(mdp.num_actions()));
  for (Eigen::Index s = 0; s < n; ++s) out.row(s) = state[s] * pi.probs().row(s);
  return out;
}

/// V^{pi*} - V^{pi_hat} where pi_hat is the uniform trajectory-level
/// mixture of `components`.
template <class M>
double suboptimality(const std::vector<TabularPolicy>& components, const M& mdp, double optimal_value) {
  double mean = 0.0;
  for (const auto& pi : components) mean += exact_policy_value(mdp, pi);
  mean /= double(components.size());
  return optimal_value - mean;
}

template <class M>
double optimal_value(const M& mdp) {
  return mdp.initial().dot(exact_value_iteration(mdp, 1e-12).values);
}

// ---------------------------------------------------------------------------
// Text matrix format used for regression fixtures.

namespace detail {
inline void write_matrix(std::ostream& os, const std::string& tag, const Eigen::MatrixXd& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
    os << '\n';
  }
}

inline Eigen::MatrixXd read_matrix(std::istream& is, const std::string& tag) {
  std::string got;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> got >> rows >> cols) || got != tag) {
    throw ConfigError("tabular fixture: expected matrix '" + tag + "'");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!(is >> m(r, c))) throw ConfigError("tabular fixture: truncated matrix '" + tag + "'");
    }
  }
  return m;
}
}  // namespace detail

inline void write_model(std::ostream& os, const TabularLowRankModel& m) {
  os << "model " << m.num_states() << ' ' << m.num_items() << ' ' << m.rank() << '\n';
  detail::write_matrix(os, "phi", m.phi());
  detail::write_matrix(os, "mu", m.mu());
}

inline TabularLowRankModel read_model(std::istream& is) {
  std::string tag;
  std::size_t s = 0, i = 0, d = 0;
  if (!(is >> tag >> s >> i >> d) || tag != "model") throw ConfigError("tabular fixture: expected 'model'");
  Eigen::MatrixXd phi = detail::read_matrix(is, "phi");
  Eigen::MatrixXd mu = detail::read_matrix(is, "mu");
  if (static_cast<std::size_t>(mu.cols()) != d) throw ConfigError("tabular fixture: rank mismatch");
  return TabularLowRankModel(s, i, std::move(phi), std::move(mu));
}

inline void write_instance(std::ostream& os, const TabularLowRankMDP& mdp) {
  const auto& p = mdp.problem();
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::setprecision(17);
  os << "slaterec-tabular 1\n";
  os << "dims " << p.num_states << ' ' << p.num_items << ' ' << p.slate_size << ' ' << p.discount << '\n';
  detail::write_matrix(os, "initial", p.initial.transpose());
  detail::write_matrix(os, "logits", p.logits);
  detail::write_matrix(os, "reward", p.reward);
  write_model(os, mdp.truth());
  os.flags(flags);
  os.precision(precision);
}

inline TabularLowRankMDP read_instance(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "slaterec-tabular" || version != 1) {
    throw ConfigError("tabular fixture: bad header");
  }
  TabularProblem p;
  if (!(is >> tag >> p.num_states >> p.num_items >> p.slate_size >> p.discount) || tag != "dims") {
    throw ConfigError("tabular fixture: expected 'dims'");
  }
  p.initial = detail::read_matrix(is, "initial").transpose();
  p.logits = detail::read_matrix(is, "logits");
  p.reward = detail::read_matrix(is, "reward");
  return TabularLowRankMDP(std::move(p), read_model(is));
}

/// Model class file: "slaterec-models 1 <count>" followed by models.
inline void write_model_class(std::ostream& os, const std::vector<TabularLowRankModel>& members) {
  const auto precision = os.precision();
  os << std::setprecision(17) << "slaterec-models 1 " << members.size() << '\n';
  for (const auto& m : members) write_model(os, m);
  os.precision(precision);
}

inline std::vector<TabularLowRankModel> read_model_class(std::istream& is) {
  std::string tag;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> tag >> version >> count) || tag != "slaterec-models" || version != 1) {
    throw ConfigError("model class file: bad header");
  }
  std::vector<TabularLowRankModel> out;
  for (std::size_t m = 0; m < count; ++m) out.push_back(read_model(is));
  return out;
}

}  // namespace slaterec::oracle
