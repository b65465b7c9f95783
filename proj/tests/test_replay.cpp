#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "vgcrl/agent/replay.hpp"

using namespace vgcrl;
using post::LatentGoal;
using rl::ReplayBuffer;
using rl::Trajectory;

namespace {

Trajectory make_episode(int id, std::size_t length) {
  Trajectory t;
  t.z = LatentGoal::discrete(id);
  for (std::size_t i = 0; i < length; ++i) {
    rl::Step s;
    s.s = {static_cast<double>(id), static_cast<double>(i)};
    s.a = {0.5};
    s.s2 = {static_cast<double>(id), static_cast<double>(i + 1)};
    s.done = i + 1 == length;
    t.steps.push_back(std::move(s));
  }
  return t;
}

}  // namespace

TEST_CASE("FIFO eviction arithmetic") {
  ReplayBuffer buf(250);
  for (int e = 0; e < 3; ++e) buf.store_episode(make_episode(e, 100));
  CHECK(buf.total_stored() == 300);
  CHECK(buf.size() == 250);          // oldest 50 transitions evicted
  CHECK(buf.oldest_live() == 50);
  CHECK_THROWS_AS(buf.at(49), Error);
  CHECK(buf.at(50).z.index() == 0);  // episode 0's tail is still live
  CHECK(buf.at(299).z.index() == 2);
}

TEST_CASE("episode ranges locate the final observation") {
  ReplayBuffer buf(1000);
  buf.store_episode(make_episode(7, 40));
  buf.store_episode(make_episode(8, 60));
  CHECK(buf.episode_final_obs(0) == std::vector<double>{7.0, 40.0});
  CHECK(buf.episode_final_obs(39) == std::vector<double>{7.0, 40.0});
  CHECK(buf.episode_final_obs(40) == std::vector<double>{8.0, 60.0});
  CHECK(buf.episode_final_obs(99) == std::vector<double>{8.0, 60.0});
  const auto [lo, hi] = buf.episode_live_range(45);
  CHECK(lo == 40);
  CHECK(hi == 100);
}

TEST_CASE("stored transitions round-trip bit-exact") {
  ReplayBuffer buf(64);
  Rng rng(3);
  Trajectory t;
  t.z = LatentGoal::continuous({rng.normal(), rng.normal()});
  for (int i = 0; i < 10; ++i) {
    rl::Step s;
    s.s = {rng.normal(), rng.normal()};
    s.a = {rng.normal()};
    s.s2 = {rng.normal(), rng.normal()};
    s.done = false;
    t.steps.push_back(s);
  }
  buf.store_episode(t);
  for (int i = 0; i < 10; ++i) {
    const rl::Transition& tr = buf.at(i);
    CHECK(tr.s == t.steps[i].s);
    CHECK(tr.a == t.steps[i].a);
    CHECK(tr.s2 == t.steps[i].s2);
    CHECK(tr.z == t.z);
    CHECK(tr.done == t.steps[i].done);
  }
}

TEST_CASE("stored z equals the rollout z for every transition") {
  ReplayBuffer buf(500);
  for (int e = 0; e < 4; ++e) buf.store_episode(make_episode(e, 50));
  for (std::int64_t seq = buf.oldest_live(); seq < buf.total_stored(); ++seq)
    CHECK(buf.at(seq).z.index() == static_cast<int>(seq / 50));
}

TEST_CASE("degenerate capacities") {
  CHECK_THROWS_AS(ReplayBuffer(0), Error);
  ReplayBuffer small(10);
  CHECK_THROWS_AS(small.store_episode(make_episode(0, 11)), Error);
  CHECK_THROWS_AS(small.store_episode(Trajectory{}), Error);
}

TEST_CASE("uniform sampling covers the live range") {
  ReplayBuffer buf(100);
  for (int e = 0; e < 3; ++e) buf.store_episode(make_episode(e, 50));
  Rng rng(5);
  const auto seqs = buf.sample(2000, rng);
  std::int64_t mn = 1 << 30, mx = -1;
  for (std::int64_t s : seqs) {
    mn = std::min(mn, s);
    mx = std::max(mx, s);
    CHECK(s >= buf.oldest_live());
    CHECK(s < buf.total_stored());
  }
  CHECK(mn <= buf.oldest_live() + 2);
  CHECK(mx >= buf.total_stored() - 3);
}
