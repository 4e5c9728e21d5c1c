#pragma once

#include <deque>

#include "dragonpit/rl/tensor.hpp"
#include "dragonpit/rng.hpp"

namespace dragonpit::rl {

// One finished episode, stored dense. Index t runs over visited states
// (0..T); transition arrays (actions, rewards) have length T.
struct EpisodeRecord {
  std::vector<Matrix> obs;     // [n_agents, obs_dim] per state
  std::vector<std::vector<double>> state;  // state_dim per state
  std::vector<Matrix> avail;   // [n_agents, n_actions] per state
  std::vector<std::vector<int>> actions;   // n_agents per transition
  std::vector<double> rewards;
  bool terminated = false;     // ended by the objective, not the clock
  std::uint64_t seed = 0;

  int steps() const { return static_cast<int>(rewards.size()); }
};

// FIFO episode store with uniform no-replacement sampling.
class EpisodeBuffer {
 public:
  explicit EpisodeBuffer(std::size_t capacity) : capacity_(capacity) {}

  void add(EpisodeRecord episode);
  std::size_t size() const { return episodes_.size(); }
  bool can_sample(std::size_t batch) const { return episodes_.size() >= batch; }
  std::vector<const EpisodeRecord*> sample(std::size_t batch, SeededRng& rng) const;
  const EpisodeRecord& at(std::size_t i) const { return episodes_[i]; }

 private:
  std::size_t capacity_;
  std::deque<EpisodeRecord> episodes_;
};

}  // namespace dragonpit::rl
