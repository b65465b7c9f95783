#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "vgcrl/cli/config.hpp"

using namespace vgcrl;
using cli::ExperimentConfig;

TEST_CASE("minimal config fills defaults") {
  const auto c = ExperimentConfig::from_text(R"(
[env]
type = windy
n = 2

[posterior]
family = categorical
goal_dim = 10
)");
  CHECK(c.posterior.family == post::Family::categorical);
  CHECK(c.posterior.goal_dim == 10);
  CHECK(c.env.horizon == 100);
  CHECK(c.sac.gamma == 0.99);
  CHECK(c.sac.batch_size == 256);
  CHECK(c.relabel.fraction == 0.5);
  CHECK(c.seeds == std::vector<std::uint64_t>{0});
  CHECK(c.explicit_keys.count("posterior.goal_dim") == 1);
  CHECK(c.explicit_keys.count("agent.gamma") == 0);
  CHECK(c.echo_text().find("(default)") != std::string::npos);
}

TEST_CASE("range violations name the offending field") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("[agent]\nrelabel_fraction = 1.5\n"),
                       doctest::Contains("relabel_fraction"), Error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("[agent]\ngamma = 1.0\n"),
                       doctest::Contains("gamma"), Error);
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("[posterior]\nsigma = -2\n"),
                       doctest::Contains("sigma"), Error);
}

TEST_CASE("unknown keys and syntax errors carry line numbers") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("\n\n[env]\nwhirl = 3\n"),
                       doctest::Contains("line 4"), Error);
  CHECK_THROWS_WITH_AS(cli::parse_key_values("[env\n"), doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(cli::parse_key_values("[env]\nkey value\n"),
                       doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(cli::parse_key_values("[env]\nn = 1\nn = 2\n"),
                       doctest::Contains("duplicate"), Error);
}

TEST_CASE("preset expansion with user overrides") {
  const auto c = ExperimentConfig::from_text(R"(
preset = table2-g20-sn

[train]
total_env_steps = 1234
)");
  CHECK(c.name == "table2-g20-sn");
  CHECK(c.posterior.family == post::Family::categorical);
  CHECK(c.posterior.goal_dim == 20);
  CHECK(c.posterior.spectral_coeff == 2.0);
  CHECK(c.train.total_env_steps == 1234);  // override wins
  CHECK(c.slice_positions);

  CHECK_THROWS_WITH_AS(ExperimentConfig::from_text("preset = no-such\n"),
                       doctest::Contains("no-such"), Error);
}

TEST_CASE("every preset parses and builds") {
  for (const std::string& name : cli::preset_names()) {
    const auto c = ExperimentConfig::from_text("preset = " + name + "\n");
    CHECK(c.name == name);
    auto trainer = cli::build_trainer(c, 0);
    CHECK(trainer->env_steps() == 0);
  }
  CHECK(cli::is_preset_name("agcrl-windy-2d"));
  CHECK_FALSE(cli::is_preset_name("agcrl-windy-3d"));
}

TEST_CASE("resolved text round-trips exactly") {
  const auto c = ExperimentConfig::from_text("preset = lingcrl-proj-10x2\nseeds = 4,5\n");
  const std::string resolved = c.resolved_text();
  const auto reparsed = ExperimentConfig::from_text(resolved);
  CHECK(reparsed.resolved_text() == resolved);
  CHECK(reparsed.seeds == std::vector<std::uint64_t>{4, 5});
  CHECK(reparsed.env.projection_rows == 10);
}

TEST_CASE("wind ramp shorthand and explicit lists") {
  const auto c = ExperimentConfig::from_text("[env]\nn = 10\nwind = ramp\n");
  CHECK(c.env.wind.size() == 10);
  CHECK(c.env.wind[9] == 99.0);
  const auto c2 = ExperimentConfig::from_text("[env]\nn = 2\nwind = 0,40\n");
  CHECK(c2.env.wind == std::vector<double>{0, 40});
  CHECK_THROWS_AS(ExperimentConfig::from_text("[env]\nn = 2\nwind = 0,1,2\n"), Error);
}

TEST_CASE("her requires an identity-mean family") {
  CHECK_THROWS_AS(ExperimentConfig::from_text(R"(
[posterior]
family = categorical
goal_dim = 5

[agent]
relabel = her
)"),
                  Error);
}

TEST_CASE("state slice spellings") {
  const auto all = ExperimentConfig::from_text("[posterior]\nstate_slice = all\n");
  CHECK(all.posterior.state_slice.empty());
  CHECK_FALSE(all.slice_positions);
  const auto pos = ExperimentConfig::from_text("[posterior]\nstate_slice = positions\n");
  CHECK(pos.slice_positions);
  const auto idx = ExperimentConfig::from_text("[posterior]\nstate_slice = 2,3\n");
  CHECK(idx.posterior.state_slice == std::vector<std::size_t>{2, 3});
}
