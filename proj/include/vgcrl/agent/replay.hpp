#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "vgcrl/posterior/latent.hpp"

namespace vgcrl::rl {

// One environment interaction. Rewards are never stored: they are recomputed
// from the live posterior at update time.
struct Transition {
  std::vector<double> s, a, s2;
  post::LatentGoal z;
  bool done = false;
};

struct Step {
  std::vector<double> s, a, s2;
  bool done = false;
};

// A full episode rolled out under a single z drawn at reset.
struct Trajectory {
  post::LatentGoal z;
  std::vector<Step> steps;
};

// Bounded FIFO transition store over a ring buffer. Episode ranges are kept
// (in monotone sequence numbers) so any live transition can locate its
// episode's final observation for hindsight relabeling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void store_episode(const Trajectory& episode);

  std::size_t size() const;
  std::int64_t total_stored() const { return next_seq_; }
  std::int64_t oldest_live() const;

  std::vector<std::int64_t> sample(std::size_t batch, Rng& rng) const;
  const Transition& at(std::int64_t seq) const;

  const std::vector<double>& episode_final_obs(std::int64_t seq) const;
  // [begin, end) sequence range of the episode containing seq, clipped to
  // live transitions.
  std::pair<std::int64_t, std::int64_t> episode_live_range(std::int64_t seq) const;

  std::size_t capacity() const { return capacity_; }

 private:
  struct EpisodeRange {
    std::int64_t begin, end;
    std::vector<double> final_obs;
  };
  const EpisodeRange& find_episode(std::int64_t seq) const;

  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::int64_t next_seq_ = 0;
  std::deque<EpisodeRange> episodes_;
};

}  // namespace vgcrl::rl
