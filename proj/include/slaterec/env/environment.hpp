#pragma once

#include <memory>
#include <vector>

#include "slaterec/env/choice.hpp"
#include "slaterec/env/dynamics.hpp"

namespace slaterec::env {

struct StepOutcome {
  UserResponse response;
  UserState user;
  std::vector<double> choice;  // k+1 probabilities the response was drawn from
};

/// One simulated user facing a fixed catalog. Single-threaded; give each
/// thread its own instance and generator.
class Environment {
 public:
  Environment(std::shared_ptr<const ItemCatalog> catalog, DynamicsParams dynamics,
              std::size_t slate_size, double discount)
      : catalog_(std::move(catalog)), dynamics_(dynamics), slate_size_(slate_size),
        discount_(discount) {
    dynamics_.validate();
    if (!catalog_) throw ConfigError("environment needs a catalog");
    if (slate_size_ == 0 || slate_size_ > catalog_->size()) {
      throw ConfigError("slate size must be in [1, |I|]");
    }
    if (!(discount_ >= 0.0 && discount_ < 1.0)) throw ConfigError("discount must be in [0,1)");
    user_.interest = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(catalog_->num_topics()));
  }

  const UserState& reset(Rng& rng) {
    user_ = sample_initial_user(rng, catalog_->num_topics());
    return user_;
  }

  // choice -> engagement -> interest update. A null choice still moves the
  // user through the q = 0 branch: u' = c0 u + eps.
  StepOutcome step(const Slate& slate, Rng& rng) {
    validate_slate(slate, catalog_->size(), slate_size_);
    StepOutcome out;
    out.choice = choice_probs(user_, slate, *catalog_);
    out.response.chosen = sample_choice(rng, out.choice);
    const Item& item = (*catalog_)[consumed_item(out.response, slate, catalog_->null_id())];
    out.response.engagement = engagement(user_, item, discount_);
    user_ = transition_user(user_, item, dynamics_, rng);
    out.user = user_;
    return out;
  }

  std::vector<double> choice_probs_for(const Slate& slate) const {
    return choice_probs(user_, slate, *catalog_);
  }

  const UserState& user() const { return user_; }
  void set_user(UserState user) { user_ = std::move(user); }
  const ItemCatalog& catalog() const { return *catalog_; }
  std::shared_ptr<const ItemCatalog> catalog_ptr() const { return catalog_; }
  const DynamicsParams& dynamics() const { return dynamics_; }
  std::size_t slate_size() const { return slate_size_; }
  double discount() const { return discount_; }

 private:
  std::shared_ptr<const ItemCatalog> catalog_;
  DynamicsParams dynamics_;
  std::size_t slate_size_;
  double discount_;
  UserState user_;
};

}  // namespace slaterec::env
