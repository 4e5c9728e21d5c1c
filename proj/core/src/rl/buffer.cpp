#include "dragonpit/rl/buffer.hpp"

namespace dragonpit::rl {

void EpisodeBuffer::add(EpisodeRecord episode) {
  if (episode.rewards.empty()) throw TensorError("buffer: empty episode");
  if (episode.obs.size() != episode.rewards.size() + 1 ||
      episode.state.size() != episode.obs.size() ||
      episode.avail.size() != episode.obs.size() ||
      episode.actions.size() != episode.rewards.size())
    throw TensorError("buffer: inconsistent episode lengths");
  episodes_.push_back(std::move(episode));
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::vector<const EpisodeRecord*> EpisodeBuffer::sample(std::size_t batch,
                                                        SeededRng& rng) const {
  if (!can_sample(batch)) throw TensorError("buffer: not enough episodes");
  std::vector<std::size_t> idx(episodes_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Partial Fisher-Yates: the first `batch` slots become the draw.
  for (std::size_t i = 0; i < batch; ++i) {
    std::size_t j = i + rng.uniform_int(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<const EpisodeRecord*> out;
  out.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) out.push_back(&episodes_[idx[i]]);
  return out;
}

}  // namespace dragonpit::rl
