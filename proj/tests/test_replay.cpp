#include "dragonpit/policies.hpp"
#include "dragonpit/replay.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace dragonpit;
using dragonpit::testutil::TempDir;
using dragonpit::testutil::read_file;

namespace {

// Records one full episode and returns the replay path.
std::string record_episode(const TempDir& dir, const std::string& name,
                           const ScenarioConfig& cfg, std::uint64_t seed,
                           bool scripted, bool finish = true) {
  Env env(cfg);
  env.reset(seed);
  SeededRng rng(seed ^ 0x5eed);
  std::string path = dir.file(name);
  ReplayWriter writer(path, cfg, seed);
  while (env.episode_active()) {
    auto actions =
        scripted ? rule_team_actions(env) : random_team_actions(env, rng);
    StepResult r = env.step(actions);
    writer.add_step(actions, r, env.world());
  }
  if (finish) writer.end();
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("replay");

TEST_CASE("a recorded episode reads back exactly") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('A');
  std::string path = record_episode(dir, "ep.replay.jsonl", cfg, 42, false);

  ReplayData replay = read_replay(path);
  CHECK(replay.version == kReplayVersion);
  CHECK(replay.protocol_version >= 0);
  CHECK(replay.seed == 42);
  CHECK(replay.scenario == cfg);
  CHECK(replay.config_hash == config_hash_hex(cfg));
  REQUIRE(!replay.steps.empty());
  CHECK(replay.steps.front().step_index == 0);
  CHECK(replay.steps.back().step_index ==
        static_cast<int>(replay.steps.size()) - 1);

  const ReplaySummary& sm = replay.summary;
  CHECK_FALSE(sm.partial);
  CHECK(sm.steps == static_cast<int>(replay.steps.size()));
  double reward = 0;
  long long damage = 0;
  for (const auto& s : replay.steps) {
    reward += s.reward;
    damage += s.step_damage;
  }
  CHECK(sm.total_reward == doctest::Approx(reward).epsilon(1e-12));
  CHECK(sm.total_damage == damage);
}

TEST_CASE("recording the same episode twice gives identical bytes") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('D');
  std::string p1 = record_episode(dir, "a.replay.jsonl", cfg, 7, true);
  std::string p2 = record_episode(dir, "b.replay.jsonl", cfg, 7, true);
  std::string bytes1 = read_file(p1);
  CHECK(!bytes1.empty());
  CHECK(bytes1 == read_file(p2));

  // A different seed is a different episode.
  std::string p3 = record_episode(dir, "c.replay.jsonl", cfg, 8, true);
  CHECK(bytes1 != read_file(p3));
}

TEST_CASE("re-simulation accepts faithful records and rejects tampering") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('D');
  std::string path = record_episode(dir, "v.replay.jsonl", cfg, 11, true);
  ReplayData replay = read_replay(path);
  CHECK_NOTHROW(verify_replay(replay));

  SUBCASE("a forged action breaks the check") {
    ReplayData forged = replay;
    forged.steps[2].actions[0] = forged.steps[2].actions[0] == 0 ? 1 : 0;
    CHECK_THROWS_AS(verify_replay(forged), ReplayError);
  }
  SUBCASE("a forged hp value breaks the check") {
    ReplayData forged = replay;
    forged.steps[3].dragon.hp += 1;
    CHECK_THROWS_AS(verify_replay(forged), ReplayError);
  }
  SUBCASE("a forged reward breaks the check") {
    ReplayData forged = replay;
    forged.steps[1].reward += 0.01;
    CHECK_THROWS_AS(verify_replay(forged), ReplayError);
  }
}

TEST_CASE("an abandoned recording reads back flagged partial") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('A');
  std::string path = record_episode(dir, "p.replay.jsonl", cfg, 3, false,
                                    /*finish=*/false);
  ReplayData replay = read_replay(path);
  CHECK(replay.summary.partial);
  CHECK(replay.summary.steps == static_cast<int>(replay.steps.size()));

  // An interrupted-but-closed recording is partial too.
  Env env(cfg);
  env.reset(4);
  std::string ipath = dir.file("i.replay.jsonl");
  ReplayWriter writer(ipath, cfg, 4);
  StepResult r = env.step(rule_team_actions(env));
  writer.add_step(std::vector<int>(5, kActUp), r, env.world());
  writer.end(/*interrupted=*/true);
  CHECK(read_replay(ipath).summary.partial);
}

TEST_CASE("reading a missing or truncated file is a replay error") {
  TempDir dir;
  CHECK_THROWS_AS(read_replay(dir.file("absent.replay.jsonl")), ReplayError);

  std::string garbled = dir.file("garbled.replay.jsonl");
  {
    std::ofstream out(garbled);
    out << "this is not a replay\n";
  }
  CHECK_THROWS_AS(read_replay(garbled), ReplayError);
}

TEST_CASE("the contribution table accounts for every point of damage") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('D');
  std::string path = record_episode(dir, "share.replay.jsonl", cfg, 21, true);
  ReplayData replay = read_replay(path);
  auto rows = damage_breakdown(replay);
  REQUIRE(rows.size() == 5);

  long long total = 0;
  double share = 0;
  for (const auto& row : rows) {
    total += row.damage;
    share += row.share;
    CHECK(row.steps_alive >= row.idle_steps);
    CHECK(row.idle_fraction >= 0);
    CHECK(row.idle_fraction <= 1);
  }
  CHECK(total == replay.summary.total_damage);
  CHECK(share == doctest::Approx(1.0));
  // The scripted team leaves nobody idle for long.
  for (const auto& row : rows) CHECK(row.damage > 0);
}

TEST_CASE("an agent that never engages shows up as lazy") {
  TempDir dir;
  ScenarioConfig cfg = builtin_mode('D');
  cfg.dragon.stationary = true;  // nobody dies, the slacker stays alive

  Env env(cfg);
  env.reset(9);
  std::string path = dir.file("lazy.replay.jsonl");
  ReplayWriter writer(path, cfg, 9);
  while (env.episode_active()) {
    auto actions = rule_team_actions(env);
    actions[4] = kActUp;  // agent 4 walks away from the pit forever
    StepResult r = env.step(actions);
    writer.add_step(actions, r, env.world());
  }
  writer.end();

  auto rows = damage_breakdown(read_replay(path));
  CHECK(rows[4].damage == 0);
  CHECK(rows[4].share == 0);
  CHECK(rows[4].idle_fraction > 0.9);
  CHECK(rows[0].damage > 0);
  CHECK(rows[0].idle_fraction < 0.5);
}

TEST_SUITE_END();
