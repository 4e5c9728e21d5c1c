#pragma once

#include <nlohmann/json.hpp>

#include "dragonpit/rl/tensor.hpp"

namespace dragonpit::rl {

inline constexpr int kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Serializes parameters (with names and shapes) plus caller metadata into a
// versioned document. Loading checks version, kind, names, and shapes, so a
// checkpoint from one method cannot be silently loaded into another.
nlohmann::json checkpoint_to_json(const std::string& kind,
                                  const nlohmann::json& meta,
                                  const std::vector<Parameter*>& params);

// Copies values into `params`; returns the stored metadata.
nlohmann::json checkpoint_from_json(const nlohmann::json& doc,
                                    const std::string& expected_kind,
                                    const std::vector<Parameter*>& params);

void save_checkpoint(const std::string& path, const std::string& kind,
                     const nlohmann::json& meta,
                     const std::vector<Parameter*>& params);

nlohmann::json load_checkpoint(const std::string& path,
                               const std::string& expected_kind,
                               const std::vector<Parameter*>& params);

}  // namespace dragonpit::rl
