#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "vgcrl/common.hpp"
#include "vgcrl/rng.hpp"

namespace vgcrl::post {

// A latent goal: either a discrete skill index or a continuous vector.
class LatentGoal {
 public:
  LatentGoal() = default;

  static LatentGoal discrete(int index) {
    VGCRL_CHECK(index >= 0, "LatentGoal: negative index ", index);
    LatentGoal z;
    z.index_ = index;
    return z;
  }

  static LatentGoal continuous(std::vector<double> v) {
    VGCRL_CHECK(!v.empty(), "LatentGoal: empty vector");
    LatentGoal z;
    z.vec_ = std::move(v);
    return z;
  }

  bool is_discrete() const { return index_ >= 0; }

  int index() const {
    VGCRL_CHECK(is_discrete(), "LatentGoal: not discrete");
    return index_;
  }

  const std::vector<double>& vec() const {
    VGCRL_CHECK(!is_discrete(), "LatentGoal: not continuous");
    return vec_;
  }

  std::size_t dim() const { return is_discrete() ? 1 : vec_.size(); }

  bool operator==(const LatentGoal& o) const {
    return index_ == o.index_ && vec_ == o.vec_;
  }

 private:
  int index_ = -1;
  std::vector<double> vec_;
};

// One-hot encodes discrete goals; passes continuous ones through. enc_dim is
// |G| for discrete spaces and d for continuous ones.
std::vector<double> encode_goal(const LatentGoal& z, std::size_t enc_dim);

// p(z): uniform over {0..|G|-1} or over the box [-1,1]^d. Log-density is
// constant on the support: -log|G| or -d log 2.
class Prior {
 public:
  static Prior uniform_categorical(std::size_t num_goals) {
    VGCRL_CHECK(num_goals >= 1, "prior: |G| must be >= 1");
    return Prior(true, num_goals);
  }

  static Prior uniform_box(std::size_t dim) {
    VGCRL_CHECK(dim >= 1, "prior: goal dim must be >= 1");
    return Prior(false, dim);
  }

  bool discrete() const { return discrete_; }
  std::size_t size() const { return n_; }         // |G| or d
  std::size_t encoding_dim() const { return n_; } // one-hot width or d

  bool contains(const LatentGoal& z) const {
    if (discrete_) return z.is_discrete() && z.index() < static_cast<int>(n_);
    if (z.is_discrete() || z.vec().size() != n_) return false;
    for (double x : z.vec())
      if (!(x >= -1.0 && x <= 1.0)) return false;
    return true;
  }

  double log_density(const LatentGoal& z) const {
    VGCRL_CHECK(contains(z), "prior: goal outside support");
    return discrete_ ? -std::log(static_cast<double>(n_))
                     : -static_cast<double>(n_) * std::log(2.0);
  }

  LatentGoal sample(Rng& rng) const {
    if (discrete_) return LatentGoal::discrete(static_cast<int>(rng.below(n_)));
    std::vector<double> v(n_);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return LatentGoal::continuous(std::move(v));
  }

  // Projects a continuous goal into the box interior (used by relabeling so
  // replayed goals always lie in the prior's support).
  LatentGoal clamp_to_support(const LatentGoal& z) const;

 private:
  Prior(bool d, std::size_t n) : discrete_(d), n_(n) {}
  bool discrete_;
  std::size_t n_;
};

}  // namespace vgcrl::post
