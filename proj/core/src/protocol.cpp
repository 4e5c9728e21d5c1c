#include "dragonpit/protocol.hpp"

#include <nlohmann/json.hpp>

namespace dragonpit {

using nlohmann::json;

namespace {

json avail_to_json(const std::vector<std::array<int, kNumActions>>& avail) {
  json rows = json::array();
  for (const auto& m : avail) rows.push_back(m);
  return rows;
}

}  // namespace

std::string encode_message(const WireMessage& msg) {
  json j;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HelloMsg>) {
          j["type"] = "hello";
          j["hero_ids"] = m.hero_ids;
        } else if constexpr (std::is_same_v<T, ResetMsg>) {
          j["type"] = "reset";
          j["seed"] = m.seed;
        } else if constexpr (std::is_same_v<T, ActionsMsg>) {
          j["type"] = "actions";
          j["episode_id"] = m.episode_id;
          j["step_index"] = m.step_index;
          j["actions"] = m.actions;
        } else if constexpr (std::is_same_v<T, HelloAckMsg>) {
          j["type"] = "hello_ack";
          j["session_id"] = m.session_id;
          j["config_hash"] = m.config_hash;
          j["n_agents"] = m.n_agents;
          j["n_actions"] = m.n_actions;
          j["obs_dim"] = m.obs_dim;
        } else if constexpr (std::is_same_v<T, FrameMsg>) {
          j["type"] = "frame";
          j["episode_id"] = m.episode_id;
          j["step_index"] = m.step_index;
          j["obs"] = m.obs;
          j["state"] = m.state;
          j["avail_actions"] = avail_to_json(m.avail_actions);
          j["done"] = m.done;
        } else if constexpr (std::is_same_v<T, StepAckMsg>) {
          j["type"] = "step_ack";
          j["episode_id"] = m.episode_id;
          j["step_index"] = m.step_index;
          j["reward"] = m.reward;
          j["terminated"] = m.terminated;
          j["truncated"] = m.truncated;
          j["step_damage"] = m.step_damage;
          j["dragon_hp"] = m.dragon_hp;
          j["per_agent_damage"] = m.per_agent_damage;
        } else if constexpr (std::is_same_v<T, EpisodeEndMsg>) {
          j["type"] = "episode_end";
          j["episode_id"] = m.episode_id;
          j["steps"] = m.steps;
          j["total_reward"] = m.total_reward;
          j["total_damage"] = m.total_damage;
          j["per_agent_damage"] = m.per_agent_damage;
          j["dragon_dead"] = m.dragon_dead;
          j["replay_file"] = m.replay_file;
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          j["type"] = "error";
          j["code"] = m.code;
          j["message"] = m.message;
        }
      },
      msg);
  j["protocol_version"] = kProtocolVersion;
  return j.dump();
}

WireMessage decode_message(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("message is not valid JSON: ") + e.what());
  }
  if (!j.contains("type")) throw ProtocolError("message has no type");
  if (!j.contains("protocol_version") ||
      j.at("protocol_version").get<int>() != kProtocolVersion) {
    throw ProtocolError("protocol_version mismatch");
  }
  std::string type = j.at("type").get<std::string>();
  try {
    if (type == "hello") {
      HelloMsg m;
      m.hero_ids = j.at("hero_ids").get<std::vector<int>>();
      return m;
    }
    if (type == "reset") {
      ResetMsg m;
      m.seed = j.at("seed").get<std::uint64_t>();
      return m;
    }
    if (type == "actions") {
      ActionsMsg m;
      m.episode_id = j.at("episode_id").get<std::string>();
      m.step_index = j.at("step_index").get<int>();
      m.actions = j.at("actions").get<std::vector<int>>();
      return m;
    }
    if (type == "hello_ack") {
      HelloAckMsg m;
      m.session_id = j.at("session_id").get<std::string>();
      m.config_hash = j.at("config_hash").get<std::string>();
      m.n_agents = j.at("n_agents").get<int>();
      m.n_actions = j.at("n_actions").get<int>();
      m.obs_dim = j.at("obs_dim").get<int>();
      return m;
    }
    if (type == "frame") {
      FrameMsg m;
      m.episode_id = j.at("episode_id").get<std::string>();
      m.step_index = j.at("step_index").get<int>();
      m.obs = j.at("obs").get<std::vector<std::vector<double>>>();
      m.state = j.at("state").get<std::vector<double>>();
      for (const auto& row : j.at("avail_actions")) {
        std::array<int, kNumActions> mask{};
        for (int i = 0; i < kNumActions; ++i) mask[i] = row.at(i).get<int>();
        m.avail_actions.push_back(mask);
      }
      m.done = j.at("done").get<bool>();
      return m;
    }
    if (type == "step_ack") {
      StepAckMsg m;
      m.episode_id = j.at("episode_id").get<std::string>();
      m.step_index = j.at("step_index").get<int>();
      m.reward = j.at("reward").get<double>();
      m.terminated = j.at("terminated").get<bool>();
      m.truncated = j.at("truncated").get<bool>();
      m.step_damage = j.at("step_damage").get<long long>();
      m.dragon_hp = j.at("dragon_hp").get<double>();
      m.per_agent_damage = j.at("per_agent_damage").get<std::vector<long long>>();
      return m;
    }
    if (type == "episode_end") {
      EpisodeEndMsg m;
      m.episode_id = j.at("episode_id").get<std::string>();
      m.steps = j.at("steps").get<int>();
      m.total_reward = j.at("total_reward").get<double>();
      m.total_damage = j.at("total_damage").get<long long>();
      m.per_agent_damage = j.at("per_agent_damage").get<std::vector<long long>>();
      m.dragon_dead = j.at("dragon_dead").get<bool>();
      m.replay_file = j.at("replay_file").get<std::string>();
      return m;
    }
    if (type == "error") {
      ErrorMsg m;
      m.code = j.at("code").get<std::string>();
      m.message = j.at("message").get<std::string>();
      return m;
    }
  } catch (const json::exception& e) {
    throw ProtocolError(type + " message malformed: " + e.what());
  }
  throw ProtocolError("unknown message type: " + type);
}

SessionEngine::SessionEngine(const ScenarioConfig& cfg, SessionOptions opts)
    : cfg_(cfg), opts_(std::move(opts)), env_(cfg) {
  session_id_ =
      "s-" + config_hash_hex(cfg).substr(0, 8) + "-" +
      std::to_string(opts_.session_index);
}

SessionEngine::~SessionEngine() { abort(); }

void SessionEngine::abort() {
  if (replay_ && episode_open_) {
    replay_->end(true);
    replay_.reset();
  }
  episode_open_ = false;
}

FrameMsg SessionEngine::make_frame() const {
  FrameMsg f;
  f.episode_id = episode_id_;
  f.step_index = env_.step_index();
  f.obs = env_.get_obs();
  f.state = env_.get_state();
  f.avail_actions = env_.get_avail_actions();
  f.done = !env_.episode_active();
  return f;
}

std::vector<WireMessage> SessionEngine::on_hello(const HelloMsg& m) {
  std::vector<int> expected;
  for (const auto& h : cfg_.heroes) expected.push_back(h.unit_id);
  if (m.hero_ids != expected) {
    return {ErrorMsg{"config_mismatch",
                     "client hero ids do not match the server scenario"}};
  }
  handshaken_ = true;
  HelloAckMsg ack;
  ack.session_id = session_id_;
  ack.config_hash = config_hash_hex(cfg_);
  ack.n_agents = env_.n_agents();
  ack.n_actions = env_.n_actions();
  ack.obs_dim = env_.obs_dim();
  return {ack};
}

std::vector<WireMessage> SessionEngine::on_reset(const ResetMsg& m) {
  if (!handshaken_) {
    return {ErrorMsg{"no_handshake", "reset before hello"}};
  }
  abort();  // an interrupted episode's replay gets flagged partial
  env_.reset(m.seed);
  episode_id_ = session_id_ + "-e" + std::to_string(episode_counter_++);
  episode_open_ = true;
  if (!opts_.replay_dir.empty()) {
    replay_ = std::make_unique<ReplayWriter>(
        opts_.replay_dir + "/" + episode_id_ + kReplaySuffix, cfg_, m.seed);
  }
  return {make_frame()};
}

std::vector<WireMessage> SessionEngine::on_actions(const ActionsMsg& m) {
  if (!handshaken_) return {ErrorMsg{"no_handshake", "actions before hello"}};
  if (!episode_open_) return {ErrorMsg{"no_episode", "actions before reset"}};
  if (m.episode_id != episode_id_) {
    return {ErrorMsg{"episode_mismatch", "unknown episode id"}};
  }
  if (m.step_index != env_.step_index()) {
    return {ErrorMsg{"step_mismatch",
                     "expected step " + std::to_string(env_.step_index())}};
  }
  StepResult res;
  std::vector<int> actions = m.actions;
  try {
    res = env_.step(actions);
  } catch (const EnvError& e) {
    return {ErrorMsg{"illegal_action", e.what()}};
  }
  if (replay_) replay_->add_step(actions, res, env_.world());

  StepAckMsg ack;
  ack.episode_id = episode_id_;
  ack.step_index = env_.step_index() - 1;
  ack.reward = res.reward;
  ack.terminated = res.terminated;
  ack.truncated = res.truncated;
  ack.step_damage = res.step_damage;
  ack.dragon_hp = res.dragon_hp;
  ack.per_agent_damage = res.per_agent_damage;

  std::vector<WireMessage> replies{ack, make_frame()};
  if (!env_.episode_active()) {
    episode_open_ = false;
    EpisodeEndMsg end;
    end.episode_id = episode_id_;
    if (replay_) {
      replay_->end(false);
      end.steps = replay_->summary().steps;
      end.total_reward = replay_->summary().total_reward;
      end.total_damage = replay_->summary().total_damage;
      end.per_agent_damage = replay_->summary().per_agent_damage;
      end.dragon_dead = replay_->summary().dragon_dead;
      end.replay_file = episode_id_ + kReplaySuffix;
      replay_.reset();
    } else {
      end.steps = env_.step_index();
      end.total_damage = env_.world().cumulative_dragon_damage;
      end.total_reward = end.total_damage * 0.01;
      end.per_agent_damage.assign(env_.n_agents(), 0);
      end.dragon_dead = !env_.world().dragon.alive;
    }
    replies.push_back(end);
  }
  return replies;
}

std::vector<WireMessage> SessionEngine::handle(const WireMessage& msg) {
  if (std::holds_alternative<HelloMsg>(msg)) {
    return on_hello(std::get<HelloMsg>(msg));
  }
  if (std::holds_alternative<ResetMsg>(msg)) {
    return on_reset(std::get<ResetMsg>(msg));
  }
  if (std::holds_alternative<ActionsMsg>(msg)) {
    return on_actions(std::get<ActionsMsg>(msg));
  }
  return {ErrorMsg{"bad_message", "unexpected message type from client"}};
}

std::vector<std::string> SessionEngine::handle_line(const std::string& line) {
  std::vector<WireMessage> replies;
  try {
    replies = handle(decode_message(line));
  } catch (const ProtocolError& e) {
    replies = {ErrorMsg{"bad_message", e.what()}};
  }
  std::vector<std::string> out;
  out.reserve(replies.size());
  for (const auto& r : replies) out.push_back(encode_message(r));
  return out;
}

}  // namespace dragonpit
