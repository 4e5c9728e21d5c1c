#include "dragonpit/rl/buffer.hpp"

#include <set>

#include "doctest.h"

using namespace dragonpit::rl;
using dragonpit::SeededRng;

namespace {

EpisodeRecord make_episode(int steps, std::uint64_t seed) {
  EpisodeRecord ep;
  ep.seed = seed;
  for (int t = 0; t <= steps; ++t) {
    ep.obs.push_back(Matrix::Constant(2, 3, static_cast<double>(t)));
    ep.state.push_back({static_cast<double>(t), 0.0});
    ep.avail.push_back(Matrix::Ones(2, 4));
  }
  for (int t = 0; t < steps; ++t) {
    ep.actions.push_back({t % 4, (t + 1) % 4});
    ep.rewards.push_back(0.1 * t);
  }
  return ep;
}

}  // namespace

TEST_SUITE_BEGIN("buffer");

TEST_CASE("episodes accumulate and evict first-in-first-out") {
  EpisodeBuffer buf(3);
  CHECK(buf.size() == 0);
  for (std::uint64_t s = 0; s < 5; ++s) buf.add(make_episode(4, s));
  CHECK(buf.size() == 3);  // capacity holds
  // The two oldest were dropped.
  CHECK(buf.at(0).seed == 2);
  CHECK(buf.at(1).seed == 3);
  CHECK(buf.at(2).seed == 4);
  CHECK(buf.at(0).steps() == 4);
}

TEST_CASE("malformed episodes are rejected") {
  EpisodeBuffer buf(4);

  EpisodeRecord empty;
  CHECK_THROWS_AS(buf.add(empty), TensorError);

  EpisodeRecord missing_final_obs = make_episode(3, 1);
  missing_final_obs.obs.pop_back();
  CHECK_THROWS_AS(buf.add(missing_final_obs), TensorError);

  EpisodeRecord short_actions = make_episode(3, 2);
  short_actions.actions.pop_back();
  CHECK_THROWS_AS(buf.add(short_actions), TensorError);

  EpisodeRecord short_state = make_episode(3, 3);
  short_state.state.pop_back();
  CHECK_THROWS_AS(buf.add(short_state), TensorError);

  EpisodeRecord short_avail = make_episode(3, 4);
  short_avail.avail.pop_back();
  CHECK_THROWS_AS(buf.add(short_avail), TensorError);

  CHECK(buf.size() == 0);  // nothing slipped through
}

TEST_CASE("sampling draws distinct episodes uniformly and reproducibly") {
  EpisodeBuffer buf(10);
  CHECK_FALSE(buf.can_sample(1));
  for (std::uint64_t s = 0; s < 10; ++s) buf.add(make_episode(2, s));
  CHECK(buf.can_sample(10));
  CHECK_FALSE(buf.can_sample(11));

  SeededRng rng(5);
  CHECK_THROWS_AS(buf.sample(11, rng), TensorError);

  // No replacement within one draw.
  auto batch = buf.sample(6, rng);
  REQUIRE(batch.size() == 6);
  std::set<const EpisodeRecord*> distinct(batch.begin(), batch.end());
  CHECK(distinct.size() == 6);

  // Same generator state, same draw.
  SeededRng rng_a(9), rng_b(9);
  auto draw_a = buf.sample(4, rng_a);
  auto draw_b = buf.sample(4, rng_b);
  for (std::size_t i = 0; i < 4; ++i) CHECK(draw_a[i] == draw_b[i]);

  // Every episode is reachable over repeated draws.
  std::set<std::uint64_t> seen;
  SeededRng rng_c(3);
  for (int i = 0; i < 200; ++i)
    for (const auto* ep : buf.sample(2, rng_c)) seen.insert(ep->seed);
  CHECK(seen.size() == 10);

  // A full-size draw is a permutation of the store.
  auto everything = buf.sample(10, rng);
  std::set<const EpisodeRecord*> all(everything.begin(), everything.end());
  CHECK(all.size() == 10);
}

TEST_SUITE_END();
