#include "vgcrl/agent/replay.hpp"

#include <algorithm>

namespace vgcrl::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  VGCRL_CHECK(capacity_ >= 1, "replay buffer: capacity must be >= 1");
  ring_.resize(capacity_);
}

std::int64_t ReplayBuffer::oldest_live() const {
  const std::int64_t lo = next_seq_ - static_cast<std::int64_t>(capacity_);
  return lo > 0 ? lo : 0;
}

std::size_t ReplayBuffer::size() const {
  return static_cast<std::size_t>(next_seq_ - oldest_live());
}

void ReplayBuffer::store_episode(const Trajectory& episode) {
  VGCRL_CHECK(!episode.steps.empty(), "replay buffer: empty episode");
  VGCRL_CHECK(episode.steps.size() <= capacity_, "replay buffer: episode of ",
              episode.steps.size(), " steps exceeds capacity ", capacity_);
  EpisodeRange range;
  range.begin = next_seq_;
  for (const Step& step : episode.steps) {
    Transition& slot = ring_[static_cast<std::size_t>(next_seq_ % capacity_)];
    slot.s = step.s;
    slot.a = step.a;
    slot.s2 = step.s2;
    slot.z = episode.z;
    slot.done = step.done;
    ++next_seq_;
  }
  range.end = next_seq_;
  range.final_obs = episode.steps.back().s2;
  episodes_.push_back(std::move(range));
  // Drop episode records whose transitions have all been overwritten.
  const std::int64_t lo = oldest_live();
  while (!episodes_.empty() && episodes_.front().end <= lo) episodes_.pop_front();
}

std::vector<std::int64_t> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  VGCRL_CHECK(size() > 0, "replay buffer: sample from empty buffer");
  const std::int64_t lo = oldest_live();
  const std::uint64_t span = static_cast<std::uint64_t>(next_seq_ - lo);
  std::vector<std::int64_t> out(batch);
  for (std::size_t i = 0; i < batch; ++i)
    out[i] = lo + static_cast<std::int64_t>(rng.below(span));
  return out;
}

const Transition& ReplayBuffer::at(std::int64_t seq) const {
  VGCRL_CHECK(seq >= oldest_live() && seq < next_seq_, "replay buffer: sequence ", seq,
              " not live (live range [", oldest_live(), ", ", next_seq_, "))");
  return ring_[static_cast<std::size_t>(seq % capacity_)];
}

const ReplayBuffer::EpisodeRange& ReplayBuffer::find_episode(std::int64_t seq) const {
  auto it = std::upper_bound(episodes_.begin(), episodes_.end(), seq,
                             [](std::int64_t s, const EpisodeRange& e) { return s < e.end; });
  VGCRL_CHECK(it != episodes_.end() && it->begin <= seq, "replay buffer: no episode for seq ",
              seq);
  return *it;
}

const std::vector<double>& ReplayBuffer::episode_final_obs(std::int64_t seq) const {
  return find_episode(seq).final_obs;
}

std::pair<std::int64_t, std::int64_t> ReplayBuffer::episode_live_range(std::int64_t seq) const {
  const EpisodeRange& e = find_episode(seq);
  return {std::max(e.begin, oldest_live()), e.end};
}

}  // namespace vgcrl::rl
