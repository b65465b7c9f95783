#include "vgcrl/metrics/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace vgcrl::metrics {

void TargetStateSet::validate(std::size_t obs_dim) const {
  VGCRL_CHECK(targets.rows() >= 1, "target states: empty set");
  VGCRL_CHECK(targets.cols() == obs_dim, "target states: rows have ", targets.cols(),
              " dims, environment observes ", obs_dim);
  for (std::size_t i : mask)
    VGCRL_CHECK(i < obs_dim, "target states: mask index ", i, " out of range for obs_dim ",
                obs_dim);
}

TargetStateSet load_target_states(const std::filesystem::path& path) {
  std::ifstream in(path);
  VGCRL_CHECK(in.good(), "target states: cannot open '", path.string(), "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) {
          numeric = false;
          break;
        }
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      // Only the first row may be a header.
      VGCRL_CHECK(rows.empty(), "target states: non-numeric value at line ", lineno);
      continue;
    }
    if (!rows.empty())
      VGCRL_CHECK(row.size() == rows.front().size(), "target states: line ", lineno, " has ",
                  row.size(), " values, expected ", rows.front().size());
    rows.push_back(std::move(row));
  }
  VGCRL_CHECK(!rows.empty(), "target states: no targets in '", path.string(), "'");
  TargetStateSet out;
  out.targets = nd::Tensor::zeros(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) out.targets.at(i, j) = rows[i][j];
  return out;
}

double estimate_objective(const post::Posterior& q, const post::Prior& p,
                          const std::vector<Rollout>& rollouts) {
  VGCRL_CHECK(!rollouts.empty(), "estimate_objective: no rollouts");
  std::size_t total = 0;
  for (const Rollout& r : rollouts) total += r.states.size();
  VGCRL_CHECK(total > 0, "estimate_objective: rollouts contain no states");

  nd::Tensor states = nd::Tensor::zeros(total, rollouts.front().states.front().size());
  std::vector<post::LatentGoal> zs;
  zs.reserve(total);
  std::size_t row = 0;
  for (const Rollout& r : rollouts)
    for (const std::vector<double>& s : r.states) {
      for (std::size_t j = 0; j < s.size(); ++j) states.at(row, j) = s[j];
      zs.push_back(r.z);
      ++row;
    }
  const std::vector<double> rewards = post::intrinsic_reward_batch(q, p, zs, states);
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum / static_cast<double>(total);
}

LgrStateResult lgr_state(const PolicyFn& policy, const post::Posterior& q,
                         env::PointMassEnv& e, const TargetStateSet& targets,
                         std::size_t horizon, EmbedMode embed) {
  targets.validate(e.spec().obs_dim);
  LgrStateResult out;
  const std::size_t n = targets.targets.rows();
  out.per_target.reserve(n);
  std::vector<double> target(targets.targets.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < target.size(); ++j) target[j] = targets.targets.at(i, j);
    const post::LatentGoal z =
        embed == EmbedMode::expectation ? q.expectation(target) : q.mode(target);
    std::vector<double> obs = e.reset();
    for (std::size_t t = 0; t < horizon; ++t) {
      auto step = e.step(policy(obs, z));
      obs = std::move(step.obs);
      if (step.done) break;
    }
    double d = 0.0;
    if (targets.mask.empty()) {
      for (std::size_t j = 0; j < target.size(); ++j) {
        const double diff = target[j] - obs[j];
        d += diff * diff;
      }
    } else {
      for (std::size_t j : targets.mask) {
        const double diff = target[j] - obs[j];
        d += diff * diff;
      }
    }
    out.per_target.push_back(d);
    out.mean_distance += d;
  }
  out.mean_distance /= static_cast<double>(n);
  return out;
}

LgrLatentResult lgr_latent(const PolicyFn& policy, const post::Posterior& q,
                           const post::Prior& p, env::PointMassEnv& e, int n_episodes,
                           std::size_t horizon, Rng& rng) {
  VGCRL_CHECK(n_episodes >= 1, "lgr_latent: n_episodes must be >= 1, got ", n_episodes);
  std::vector<std::pair<post::LatentGoal, std::vector<double>>> pairs;
  pairs.reserve(static_cast<std::size_t>(n_episodes));
  double acc = 0.0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    const post::LatentGoal z = p.sample(rng);
    std::vector<double> obs = e.reset();
    for (std::size_t t = 0; t < horizon; ++t) {
      auto step = e.step(policy(obs, z));
      obs = std::move(step.obs);
      if (step.done) break;
    }
    const post::LatentGoal zhat = q.mode(obs);
    if (p.discrete()) {
      acc += zhat.index() == z.index() ? 1.0 : 0.0;
    } else {
      double d = 0.0;
      for (std::size_t j = 0; j < z.vec().size(); ++j) {
        const double diff = z.vec()[j] - zhat.vec()[j];
        d += diff * diff;
      }
      acc += d;
    }
    pairs.emplace_back(z, std::move(obs));
  }
  LgrLatentResult out;
  out.lgr_z = acc / static_cast<double>(n_episodes);
  if (p.discrete()) out.disc_top1 = disc_top1(q, pairs);
  return out;
}

double disc_top1(const post::Posterior& q,
                 const std::vector<std::pair<post::LatentGoal, std::vector<double>>>& pairs) {
  VGCRL_CHECK(q.config().family == post::Family::categorical,
              "disc_top1: unsupported for continuous families");
  VGCRL_CHECK(!pairs.empty(), "disc_top1: empty pair set");
  double correct = 0.0;
  for (const auto& [z, s] : pairs)
    if (q.mode(s).index() == z.index()) correct += 1.0;
  return correct / static_cast<double>(pairs.size());
}

}  // namespace vgcrl::metrics
