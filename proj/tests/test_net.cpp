#include "dragonpit/net.hpp"
#include "doctest.h"

using namespace dragonpit;

TEST_SUITE_BEGIN("net");

TEST_CASE("an in-process client plays complete episodes") {
  ScenarioConfig cfg = builtin_mode('A');
  InprocChannel channel(cfg, {});

  ClientOptions opts;
  opts.hero_ids = scenario_hero_ids(cfg);
  opts.episodes = 2;
  opts.seed = 9;
  opts.policy = ClientPolicy::rule;
  ClientRunSummary summary = run_client(channel, opts);

  CHECK(summary.episodes == 2);
  CHECK(summary.steps == 2 * cfg.episode_limit);
  CHECK(summary.total_damage > 0);
  CHECK(summary.total_reward == doctest::Approx(0.01 * summary.total_damage));
  CHECK(channel.session().episodes_played() == 2);
}

TEST_CASE("socket and in-process transports produce identical transcripts") {
  ScenarioConfig cfg = builtin_mode('A');

  Server server(cfg, {});
  server.start();
  server.run_in_thread();
  REQUIRE(server.port() != 0);

  ClientOptions opts;
  opts.hero_ids = scenario_hero_ids(cfg);
  opts.episodes = 1;
  opts.seed = 42;
  opts.policy = ClientPolicy::random;
  opts.keep_transcript = true;

  auto socket = SocketChannel::connect("127.0.0.1", server.port());
  ClientRunSummary over_wire = run_client(*socket, opts);
  socket->close();
  server.stop();
  server.join();

  SessionOptions session_opts;
  session_opts.session_index = 0;  // same slot the first connection gets
  InprocChannel inproc(cfg, session_opts);
  ClientRunSummary in_process = run_client(inproc, opts);

  REQUIRE(!over_wire.transcript.empty());
  CHECK(over_wire.transcript == in_process.transcript);
  CHECK(over_wire.total_damage == in_process.total_damage);
  CHECK(over_wire.total_reward == in_process.total_reward);
}

TEST_CASE("a config mismatch is rejected across the wire") {
  ScenarioConfig cfg = builtin_mode('A');
  Server server(cfg, {});
  server.start();
  server.run_in_thread();

  ClientOptions opts;
  opts.hero_ids = {16701, 16701, 16701, 16701, 16701};
  auto socket = SocketChannel::connect("127.0.0.1", server.port());
  CHECK_THROWS_AS(run_client(*socket, opts), ProtocolError);
  socket->close();
  server.stop();
  server.join();
}

TEST_CASE("scenario_hero_ids lists the lineup in slot order") {
  ScenarioConfig cfg = builtin_mode('D');
  auto ids = scenario_hero_ids(cfg);
  REQUIRE(ids.size() == cfg.heroes.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CHECK(ids[i] == cfg.heroes[i].unit_id);
  }
}

TEST_SUITE_END();
