#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "slaterec/core/errors.hpp"
#include "slaterec/core/rng.hpp"
#include "slaterec/learner/dataset.hpp"
#include "slaterec/learner/mle.hpp"
#include "slaterec/learner/surrogate.hpp"
#include "slaterec/mdp/history.hpp"

namespace slaterec::learner {

/// Parametric low-rank model for the simulator. Consuming item i at window
/// s moves the user into a mixture over d latent profiles,
///   phi(s, i) = softmax(W_i x(s)),  x(s) = [u_hat(s); 1],
/// and each profile emits the engagement bucket of the next window entry
/// from its own categorical mu_z. So P(s'|s,i) = 1[s' consumed i] *
/// mu(b(s'))^T phi(s, i), with engagement discretized into B equal bins on
/// [0, 1 - gamma].
class ResponseModel {
 public:
  ResponseModel(std::shared_ptr<const InterestEstimator> estimator, std::size_t num_items,
                std::size_t rank, std::size_t buckets, Rng& rng, double init_scale = 0.1)
      : estimator_(std::move(estimator)), num_items_(num_items), buckets_(buckets) {
    if (rank == 0 || buckets == 0) throw ConfigError("response model needs d >= 1 and B >= 1");
    const auto d = static_cast<Eigen::Index>(rank);
    const auto f = static_cast<Eigen::Index>(estimator_->feature_dim());
    weights_.assign(num_items + 1, Eigen::MatrixXd(d, f));
    for (auto& w : weights_) {
      for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < f; ++c) w(r, c) = rng.normal(0.0, init_scale);
      }
    }
    bucket_logits_.resize(d, static_cast<Eigen::Index>(buckets));
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < bucket_logits_.cols(); ++c) bucket_logits_(r, c) = rng.normal(0.0, init_scale);
    }
  }

  std::size_t rank() const { return static_cast<std::size_t>(bucket_logits_.rows()); }
  ItemId null_id() const { return num_items_; }
  std::size_t num_items() const { return num_items_; }
  std::size_t num_buckets() const { return buckets_; }
  const InterestEstimator& estimator() const { return *estimator_; }
  std::shared_ptr<const InterestEstimator> estimator_ptr() const { return estimator_; }

  Eigen::VectorXd feature_at(const Eigen::VectorXd& x, ItemId i) const {
    return softmax_vec(weights_[i] * x);
  }

  Eigen::VectorXd feature(const HistoryState& s, ItemId i) const {
    return feature_at(estimator_->features(s), i);
  }

  /// d x B; row z is profile z's distribution over engagement buckets.
  Eigen::MatrixXd bucket_table() const {
    Eigen::MatrixXd out(bucket_logits_.rows(), bucket_logits_.cols());
    for (Eigen::Index z = 0; z < out.rows(); ++z) out.row(z) = softmax_vec(bucket_logits_.row(z).transpose()).transpose();
    return out;
  }

  std::size_t bucket_of(double engagement) const {
    const double scale = 1.0 - estimator_->discount();
    const auto b = static_cast<std::size_t>(std::floor(engagement / scale * double(buckets_)));
    return std::min(b, buckets_ - 1);
  }

  double bucket_mid(std::size_t b) const {
    return (double(b) + 0.5) / double(buckets_) * (1.0 - estimator_->discount());
  }

  Eigen::VectorXd bucket_distribution_at(const Eigen::VectorXd& x, ItemId i) const {
    return bucket_table().transpose() * feature_at(x, i);
  }

  double expected_engagement_at(const Eigen::VectorXd& x, ItemId i) const {
    if (i == null_id()) return 0.0;
    const Eigen::VectorXd p = bucket_distribution_at(x, i);
    double e = 0.0;
    for (std::size_t b = 0; b < buckets_; ++b) e += p[static_cast<Eigen::Index>(b)] * bucket_mid(b);
    return e;
  }

  double transition_prob(const HistoryState& s, ItemId i, const HistoryState& next) const {
    const HistoryEntry& e = next.newest();
    if (e.padding || consumed_item(e.response, e.slate, null_id()) != i) return 0.0;
    const Eigen::VectorXd table_col =
        bucket_table().col(static_cast<Eigen::Index>(bucket_of(e.response.engagement)));
    return table_col.dot(feature(s, i));
  }

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  Eigen::MatrixXd& bucket_logits() { return bucket_logits_; }
  const Eigen::MatrixXd& bucket_logits() const { return bucket_logits_; }

  static Eigen::VectorXd softmax_vec(const Eigen::VectorXd& z) {
    const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
    return e / e.sum();
  }

 private:
  std::shared_ptr<const InterestEstimator> estimator_;
  std::size_t num_items_;
  std::size_t buckets_;
  std::vector<Eigen::MatrixXd> weights_;  // |I|+1 matrices, d x (T+1)
  Eigen::MatrixXd bucket_logits_;         // d x B
};

/// A tuple reduced to what the response likelihood needs.
struct PreparedTuple {
  Eigen::VectorXd x;
  ItemId consumed = 0;
  std::size_t bucket = 0;
  double choice_prob = 0.0;
};

inline std::vector<PreparedTuple> prepare_tuples(const ResponseModel& model,
                                                 const Datasets<HistoryState>& data) {
  std::vector<PreparedTuple> out;
  out.reserve(data.num_samples());
  data.for_each([&](const TransitionTuple<HistoryState>& t) {
    PreparedTuple p;
    p.x = model.estimator().features(t.state);
    p.consumed = consumed_item(t.response, t.slate, model.null_id());
    p.bucket = model.bucket_of(t.response.engagement);
    p.choice_prob = t.choice[t.response.chosen];
    out.push_back(std::move(p));
  });
  return out;
}

/// Mean of ln(P(c|s,a) mu(b)^T phi(s,c)); identical to mean_log_likelihood.
inline double response_objective(const ResponseModel& model, const std::vector<PreparedTuple>& data,
                                 bool* clamped = nullptr) {
  if (data.empty()) return 0.0;
  const Eigen::MatrixXd table = model.bucket_table();
  double total = 0.0;
  for (const auto& t : data) {
    double p = t.choice_prob * table.col(static_cast<Eigen::Index>(t.bucket)).dot(model.feature_at(t.x, t.consumed));
    if (!(p >= kProbabilityFloor)) {
      if (clamped) *clamped = true;
      p = kProbabilityFloor;
    }
    total += std::log(p);
  }
  return total / double(data.size());
}

struct ResponseGradient {
  std::vector<Eigen::MatrixXd> weights;
  Eigen::MatrixXd bucket_logits;
};

/// Analytic gradient of response_objective. With g = W_c x, F = softmax(g),
/// m = column b of the bucket table and L = F^T m:
///   d/dg_y = F_y (m_y / L - 1),   d/dPsi_{z,j} = (F_z m_z / L)(1[j=b] - M_{z,j}).
/// Floored tuples contribute nothing.
inline ResponseGradient response_gradient(const ResponseModel& model,
                                          const std::vector<PreparedTuple>& data) {
  ResponseGradient g;
  for (const auto& w : model.weights()) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  g.bucket_logits = Eigen::MatrixXd::Zero(model.bucket_logits().rows(), model.bucket_logits().cols());
  if (data.empty()) return g;
  const Eigen::MatrixXd table = model.bucket_table();
  const double scale = 1.0 / double(data.size());
  for (const auto& t : data) {
    const Eigen::VectorXd f = model.feature_at(t.x, t.consumed);
    const Eigen::VectorXd m = table.col(static_cast<Eigen::Index>(t.bucket));
    const double l = f.dot(m);
    if (!(t.choice_prob * l >= kProbabilityFloor)) continue;
    const Eigen::VectorXd dg = (f.array() * (m.array() / l - 1.0)).matrix();
    g.weights[t.consumed].noalias() += scale * dg * t.x.transpose();
    for (Eigen::Index z = 0; z < table.rows(); ++z) {
      const double w = scale * f[z] * m[z] / l;
      g.bucket_logits.row(z) -= w * table.row(z);
      g.bucket_logits(z, static_cast<Eigen::Index>(t.bucket)) += w;
    }
  }
  return g;
}

struct ResponseFitOptions {
  std::size_t max_iterations = 100;
  double initial_step = 1.0;
  double relative_tolerance = 1e-6;
};

struct ResponseFit {
  ResponseModel model;
  Likelihood likelihood;
  std::size_t iterations = 0;
};

/// Gradient ascent with backtracking on the empirical mean log-likelihood,
/// warm-started from `start`. Stops when the relative improvement drops
/// below the tolerance or at the iteration cap.
inline ResponseFit fit_response_model(const Datasets<HistoryState>& data, ResponseModel start,
                                      const ResponseFitOptions& opts = {}) {
  if (data.empty()) throw ConfigError("mle_fit needs a nonempty dataset");
  const std::vector<PreparedTuple> prepared = prepare_tuples(start, data);
  ResponseModel current = std::move(start);
  double objective = response_objective(current, prepared);
  double step = opts.initial_step;
  std::size_t it = 0;
  for (; it < opts.max_iterations; ++it) {
    const ResponseGradient g = response_gradient(current, prepared);
    bool accepted = false;
    double candidate_objective = objective;
    ResponseModel candidate = current;
    for (int tries = 0; tries < 40; ++tries) {
      candidate = current;
      for (std::size_t i = 0; i < g.weights.size(); ++i) candidate.weights()[i] += step * g.weights[i];
      candidate.bucket_logits() += step * g.bucket_logits;
      candidate_objective = response_objective(candidate, prepared);
      if (candidate_objective >= objective) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const double gain = (candidate_objective - objective) / std::max(1.0, std::abs(objective));
    current = std::move(candidate);
    objective = candidate_objective;
    step = std::min(step * 1.5, 16.0 * opts.initial_step);
    if (gain < opts.relative_tolerance) {
      ++it;
      break;
    }
  }
  ResponseFit out{std::move(current), {}, it};
  out.likelihood.mean = response_objective(out.model, prepared, &out.likelihood.clamped);
  return out;
}

}  // namespace slaterec::learner
