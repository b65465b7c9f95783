#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "testutil.hpp"
#include "vgcrl/agent/sac.hpp"

using namespace vgcrl;
using post::Family;
using post::LatentGoal;
using post::PosteriorConfig;
using post::Prior;
using rl::SacAgent;
using rl::SacConfig;
using rl::Transition;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

SacConfig small_sac() {
  SacConfig c;
  c.hidden_dims = {32, 32};
  c.batch_size = 32;
  c.buffer_capacity = 1000;
  return c;
}

std::unique_ptr<post::Posterior> identity_posterior(std::size_t d, std::size_t obs_dim) {
  PosteriorConfig c;
  c.family = Family::fixed_gaussian;
  c.goal_dim = d;
  c.obs_dim = obs_dim;
  if (obs_dim > d) {
    for (std::size_t i = 0; i < d; ++i) c.state_slice.push_back(i);
  }
  return post::make_posterior(c, 0);
}

}  // namespace

TEST_CASE("actions are deterministic, bounded, and constant for a zero policy") {
  SacAgent agent(4, 3, 2, small_sac(), 11);
  Rng rng(1);
  const std::vector<double> obs = {0.1, -0.2, 0.3, 0.9};
  const LatentGoal z = LatentGoal::discrete(1);

  const auto a1 = agent.act(obs, z, true, rng);
  const auto a2 = agent.act(obs, z, true, rng);
  CHECK(a1 == a2);
  for (double x : agent.act(obs, z, false, rng)) {
    CHECK(x <= 1.0);
    CHECK(x >= -1.0);
  }
  // Freshly built policy has zero-initialized heads: tanh(0) everywhere.
  const std::vector<double> other_obs = {2.0, 2.0, -2.0, 0.0};
  CHECK(agent.act(obs, z, true, rng) == std::vector<double>{0.0, 0.0});
  CHECK(agent.act(other_obs, LatentGoal::discrete(0), true, rng) ==
        std::vector<double>{0.0, 0.0});
}

TEST_CASE("stochastic actions vary but stay in bounds") {
  SacAgent agent(2, 2, 1, small_sac(), 3);
  Rng rng(2);
  const std::vector<double> obs = {0.5, 0.5};
  const LatentGoal z = LatentGoal::continuous({0.1, 0.2});
  double spread = 0.0;
  double first = agent.act(obs, z, false, rng)[0];
  for (int i = 0; i < 100; ++i) {
    const double a = agent.act(obs, z, false, rng)[0];
    spread = std::max(spread, std::abs(a - first));
    CHECK(std::abs(a) <= 1.0);
  }
  CHECK(spread > 1e-4);
}

TEST_CASE("polyak with tau=1 copies the online critics") {
  SacConfig cfg = small_sac();
  cfg.tau = 1.0;
  cfg.alpha = 0.0;
  SacAgent agent(2, 1, 1, cfg, 5);
  auto posterior = identity_posterior(1, 2);
  const Prior prior = Prior::uniform_box(1);
  std::vector<Transition> batch;
  Rng rng(7);
  for (int i = 0; i < 8; ++i) {
    Transition t;
    t.s = {rng.uniform(-1, 1), 0.0};
    t.a = {rng.uniform(-1, 1)};
    t.s2 = {rng.uniform(-1, 1), 0.0};
    t.z = LatentGoal::continuous({rng.uniform(-1, 1)});
    batch.push_back(std::move(t));
  }
  agent.update(batch, *posterior, prior, rng);

  std::map<std::string, nd::Parameter*> by_name;
  for (auto* p : agent.parameters()) by_name[p->name] = p;
  for (const auto& [name, p] : by_name) {
    if (name.rfind("q1.", 0) == 0) {
      nd::Parameter* target = by_name.at("q1_target." + name.substr(3));
      for (std::size_t i = 0; i < p->value.size(); ++i)
        CHECK(p->value[i] == target->value[i]);
    }
  }
}

TEST_CASE("rewards are recomputed as the identity-Gaussian squared distance") {
  SacConfig cfg = small_sac();
  SacAgent agent(2, 2, 2, cfg, 9);
  auto posterior = identity_posterior(2, 2);
  const Prior prior = Prior::uniform_box(2);
  Rng rng(11);
  std::vector<Transition> batch;
  double expected_mean = 0.0;
  for (int i = 0; i < 16; ++i) {
    Transition t;
    t.s = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    t.a = {0.0, 0.0};
    t.s2 = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    t.z = LatentGoal::continuous({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double sq = (t.z.vec()[0] - t.s2[0]) * (t.z.vec()[0] - t.s2[0]) +
                      (t.z.vec()[1] - t.s2[1]) * (t.z.vec()[1] - t.s2[1]);
    expected_mean += -0.5 * sq - kLog2Pi + 2.0 * std::log(2.0);
    batch.push_back(std::move(t));
  }
  expected_mean /= 16.0;
  const auto losses = agent.update(batch, *posterior, prior, rng);
  CHECK(losses.mean_reward == doctest::Approx(expected_mean).epsilon(1e-12));
}

TEST_CASE("critic regression matches tabular Bellman values on a 2-state chain") {
  // Two states s0 = -0.5, s1 = +0.5 alternate forever; rewards depend only on
  // the landing state through the fixed identity Gaussian with z = 0.5. The
  // fixed point solves Q0 = r1 + g*Q1, Q1 = r0 + g*Q0 independently of the
  // (ignored) actions.
  SacConfig cfg = small_sac();
  cfg.alpha = 0.0;
  cfg.gamma = 0.9;
  cfg.tau = 0.05;
  cfg.learning_rate = 3e-3;
  SacAgent agent(1, 1, 1, cfg, 13);
  auto posterior = identity_posterior(1, 1);
  const Prior prior = Prior::uniform_box(1);

  const double z = 0.5;
  const double r_land_s1 = -0.5 * (z - 0.5) * (z - 0.5) - 0.5 * kLog2Pi + std::log(2.0);
  const double r_land_s0 = -0.5 * (z + 0.5) * (z + 0.5) - 0.5 * kLog2Pi + std::log(2.0);
  const double g = cfg.gamma;
  const double q0 = (r_land_s1 + g * r_land_s0) / (1.0 - g * g);
  const double q1 = (r_land_s0 + g * r_land_s1) / (1.0 - g * g);

  Transition t01;  // s0 -> s1
  t01.s = {-0.5};
  t01.a = {0.0};
  t01.s2 = {0.5};
  t01.z = LatentGoal::continuous({z});
  Transition t10 = t01;  // s1 -> s0
  t10.s = {0.5};
  t10.s2 = {-0.5};

  // Stored actions cover the action range (the chain ignores them) so the
  // critics learn the action-independent fixed point instead of
  // extrapolating at the bootstrap actions.
  Rng rng(17);
  std::vector<Transition> batch;
  for (int i = 0; i < 32; ++i) {
    Transition t = i % 2 ? t01 : t10;
    t.a = {rng.uniform(-1, 1)};
    batch.push_back(std::move(t));
  }
  for (int step = 0; step < 5000; ++step) agent.update(batch, *posterior, prior, rng);

  const auto [q0a, q0b] = agent.q_values(t01.s, t01.z, t01.a);
  const auto [q1a, q1b] = agent.q_values(t10.s, t10.z, t10.a);
  CHECK(std::abs(q0a - q0) < 0.05);
  CHECK(std::abs(q0b - q0) < 0.05);
  CHECK(std::abs(q1a - q1) < 0.05);
  CHECK(std::abs(q1b - q1) < 0.05);
}

TEST_CASE("relabeling") {
  rl::ReplayBuffer buffer(400);
  Rng rng(19);
  // Two episodes with known final states.
  for (int e = 0; e < 2; ++e) {
    rl::Trajectory traj;
    traj.z = LatentGoal::continuous({0.0, 0.0});
    const double tag = e == 0 ? 0.25 : 0.75;  // stays inside the goal box
    for (int i = 0; i < 50; ++i) {
      rl::Step s;
      s.s = {0.01 * i, tag};
      s.a = {0.0};
      s.s2 = {0.01 * (i + 1), tag};
      traj.steps.push_back(std::move(s));
    }
    buffer.store_episode(traj);
  }
  auto posterior = identity_posterior(2, 2);
  const Prior prior = Prior::uniform_box(2);
  const auto seqs = buffer.sample(64, rng);
  std::vector<Transition> batch;
  for (auto s : seqs) batch.push_back(buffer.at(s));

  SUBCASE("fraction zero leaves the batch unchanged") {
    auto copy = batch;
    rl::RelabelConfig cfg{rl::RelabelMode::pher, 0.0, rl::RelabelStrategy::final_state};
    rl::relabel_batch(copy, seqs, buffer, *posterior, prior, cfg, rng);
    for (std::size_t i = 0; i < batch.size(); ++i) CHECK(copy[i].z == batch[i].z);
  }

  SUBCASE("her with fraction one sets z to the episode's final state") {
    auto copy = batch;
    rl::RelabelConfig cfg{rl::RelabelMode::her, 1.0, rl::RelabelStrategy::final_state};
    rl::relabel_batch(copy, seqs, buffer, *posterior, prior, cfg, rng);
    for (std::size_t i = 0; i < copy.size(); ++i) {
      // exact up to the box-interior projection relabeling guarantees
      const auto& fin = buffer.episode_final_obs(seqs[i]);
      for (int j = 0; j < 2; ++j) {
        const double expected = std::clamp(fin[j], -(1.0 - 1e-9), 1.0 - 1e-9);
        CHECK(copy[i].z.vec()[j] == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  SUBCASE("pher draws land inside the prior support even for huge sigma") {
    PosteriorConfig pc;
    pc.family = Family::adaptive_gaussian;
    pc.goal_dim = 2;
    pc.obs_dim = 2;
    pc.sigma_fixed = 10.0;  // top of the clip range; many raw draws exit the box
    auto wide = post::make_posterior(pc, 0);
    auto copy = batch;
    rl::RelabelConfig cfg{rl::RelabelMode::pher, 1.0, rl::RelabelStrategy::final_state};
    rl::relabel_batch(copy, seqs, buffer, *wide, prior, cfg, rng);
    for (const auto& t : copy) CHECK(prior.contains(t.z));
  }

  SUBCASE("future strategy anchors within the same episode") {
    auto copy = batch;
    rl::RelabelConfig cfg{rl::RelabelMode::her, 1.0, rl::RelabelStrategy::future};
    rl::relabel_batch(copy, seqs, buffer, *posterior, prior, cfg, rng);
    for (std::size_t i = 0; i < copy.size(); ++i) {
      // dim 1 of every state identifies the episode
      CHECK(copy[i].z.vec()[1] == batch[i].s[1]);
      // anchor is a later state than the transition's own
      CHECK(copy[i].z.vec()[0] >= batch[i].s2[0] - 1e-12);
    }
  }

  SUBCASE("invalid fraction is a config error") {
    rl::RelabelConfig cfg{rl::RelabelMode::pher, 1.5, rl::RelabelStrategy::final_state};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("relabel_fraction"), Error);
  }
}

TEST_CASE("non-finite policy outputs are rejected") {
  SacAgent agent(2, 1, 1, small_sac(), 21);
  for (auto* p : agent.parameters())
    if (p->name == "policy.mu.b") p->value[0] = std::nan("");
  Rng rng(23);
  CHECK_THROWS_AS(
      agent.act(std::vector<double>{0.0, 0.0}, LatentGoal::continuous({0.0}), true, rng),
      Error);
}
