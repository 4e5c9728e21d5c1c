#pragma once

#include <memory>
#include <variant>

#include "dragonpit/replay.hpp"

namespace dragonpit {

inline constexpr int kProtocolVersion = 1;

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Client -> server.
struct HelloMsg {
  int protocol_version = kProtocolVersion;
  std::vector<int> hero_ids;
};
struct ResetMsg {
  std::uint64_t seed = 0;
};
struct ActionsMsg {
  std::string episode_id;
  int step_index = 0;
  std::vector<int> actions;
};

// Server -> client.
struct HelloAckMsg {
  std::string session_id;
  std::string config_hash;
  int n_agents = 0;
  int n_actions = 0;
  int obs_dim = 0;
};
struct FrameMsg {
  std::string episode_id;
  int step_index = 0;
  std::vector<std::vector<double>> obs;
  std::vector<double> state;
  std::vector<std::array<int, kNumActions>> avail_actions;
  bool done = false;
};
struct StepAckMsg {
  std::string episode_id;
  int step_index = 0;
  double reward = 0;
  bool terminated = false;
  bool truncated = false;
  long long step_damage = 0;
  double dragon_hp = 0;
  std::vector<long long> per_agent_damage;
};
struct EpisodeEndMsg {
  std::string episode_id;
  int steps = 0;
  double total_reward = 0;
  long long total_damage = 0;
  std::vector<long long> per_agent_damage;
  bool dragon_dead = false;
  std::string replay_file;  // file name only; transport-independent
};
struct ErrorMsg {
  std::string code;
  std::string message;
};

using WireMessage = std::variant<HelloMsg, ResetMsg, ActionsMsg, HelloAckMsg,
                                 FrameMsg, StepAckMsg, EpisodeEndMsg, ErrorMsg>;

// One JSON line (no trailing newline). Key order is canonical, so equal
// messages encode to equal bytes.
std::string encode_message(const WireMessage& msg);
WireMessage decode_message(const std::string& line);

struct SessionOptions {
  std::string replay_dir;     // empty: no replays written
  int session_index = 0;      // distinguishes sessions; part of session_id
};

// Transport-independent server session: a pure request -> ordered-replies
// state machine. Both the socket server and the in-process channel wrap
// this, which is what makes the two transports byte-equivalent.
class SessionEngine {
 public:
  SessionEngine(const ScenarioConfig& cfg, SessionOptions opts);
  ~SessionEngine();

  std::vector<WireMessage> handle(const WireMessage& msg);
  // Decode + handle; malformed input becomes an error reply.
  std::vector<std::string> handle_line(const std::string& line);

  // Disconnect mid-episode: flags the open replay as partial.
  void abort();

  const std::string& session_id() const { return session_id_; }
  bool handshaken() const { return handshaken_; }
  int episodes_played() const { return episode_counter_; }

 private:
  std::vector<WireMessage> on_hello(const HelloMsg& m);
  std::vector<WireMessage> on_reset(const ResetMsg& m);
  std::vector<WireMessage> on_actions(const ActionsMsg& m);
  FrameMsg make_frame() const;

  ScenarioConfig cfg_;
  SessionOptions opts_;
  Env env_;
  std::unique_ptr<ReplayWriter> replay_;
  std::string session_id_;
  std::string episode_id_;
  int episode_counter_ = 0;
  bool handshaken_ = false;
  bool episode_open_ = false;
};

}  // namespace dragonpit
