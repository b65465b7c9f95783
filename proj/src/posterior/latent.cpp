#include "vgcrl/posterior/latent.hpp"

#include <algorithm>

namespace vgcrl::post {

std::vector<double> encode_goal(const LatentGoal& z, std::size_t enc_dim) {
  std::vector<double> out(enc_dim, 0.0);
  if (z.is_discrete()) {
    VGCRL_CHECK(static_cast<std::size_t>(z.index()) < enc_dim, "encode_goal: index ",
                z.index(), " out of range for |G|=", enc_dim);
    out[static_cast<std::size_t>(z.index())] = 1.0;
  } else {
    VGCRL_CHECK(z.vec().size() == enc_dim, "encode_goal: goal dim ", z.vec().size(),
                " vs encoding dim ", enc_dim);
    std::copy(z.vec().begin(), z.vec().end(), out.begin());
  }
  return out;
}

LatentGoal Prior::clamp_to_support(const LatentGoal& z) const {
  if (discrete_) {
    VGCRL_CHECK(contains(z), "prior: discrete goal ", z.index(), " outside support");
    return z;
  }
  VGCRL_CHECK(!z.is_discrete() && z.vec().size() == n_,
              "prior: goal dim mismatch in clamp_to_support");
  constexpr double kEdge = 1.0 - 1e-9;
  std::vector<double> v = z.vec();
  for (double& x : v) x = std::clamp(x, -kEdge, kEdge);
  return LatentGoal::continuous(std::move(v));
}

}  // namespace vgcrl::post
