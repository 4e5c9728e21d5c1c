#include "dragonpit/replay.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace dragonpit {

using nlohmann::json;

namespace {

std::string kind_to_string(DamageKind k) {
  switch (k) {
    case DamageKind::basic: return "basic";
    case DamageKind::skill1: return "skill1";
    case DamageKind::skill2: return "skill2";
    case DamageKind::skill3: return "skill3";
    case DamageKind::dragon_skill: return "dragon_skill";
  }
  return "basic";
}

DamageKind kind_from_string(const std::string& s) {
  if (s == "basic") return DamageKind::basic;
  if (s == "skill1") return DamageKind::skill1;
  if (s == "skill2") return DamageKind::skill2;
  if (s == "skill3") return DamageKind::skill3;
  if (s == "dragon_skill") return DamageKind::dragon_skill;
  throw ReplayError("unknown damage kind: " + s);
}

json snap_to_json(const UnitSnap& u) {
  return {{"actor", u.actor},   {"x", u.x},
          {"z", u.z},           {"hp", u.hp},
          {"energy", u.energy}, {"skill_cd", u.skill_cd},
          {"summoner_cd", u.summoner_cd}, {"alive", u.alive}};
}

UnitSnap snap_from_json(const json& j) {
  UnitSnap u;
  u.actor = j.at("actor").get<int>();
  u.x = j.at("x").get<double>();
  u.z = j.at("z").get<double>();
  u.hp = j.at("hp").get<double>();
  u.energy = j.at("energy").get<double>();
  for (int i = 0; i < 3; ++i) u.skill_cd[i] = j.at("skill_cd").at(i).get<int>();
  u.summoner_cd = j.at("summoner_cd").get<int>();
  u.alive = j.at("alive").get<bool>();
  return u;
}

json event_to_json(const DamageEvent& e) {
  return {{"src", e.source},
          {"tgt", e.target},
          {"amount", e.amount},
          {"kind", kind_to_string(e.kind)},
          {"crit", e.crit}};
}

DamageEvent event_from_json(const json& j) {
  DamageEvent e;
  e.source = j.at("src").get<int>();
  e.target = j.at("tgt").get<int>();
  e.amount = j.at("amount").get<long long>();
  e.kind = kind_from_string(j.at("kind").get<std::string>());
  e.crit = j.at("crit").get<bool>();
  return e;
}

}  // namespace

UnitSnap snap_unit(const UnitState& u) {
  UnitSnap s;
  s.actor = u.actor;
  s.x = u.pos.x;
  s.z = u.pos.z;
  s.hp = u.hp;
  s.energy = u.energy;
  s.skill_cd = u.skill_cd;
  s.summoner_cd = u.summoner_cd;
  s.alive = u.alive;
  return s;
}

ReplayWriter::ReplayWriter(const std::string& path, const ScenarioConfig& cfg,
                           std::uint64_t seed)
    : path_(path), out_(path), n_agents_(cfg.n_agents) {
  if (!out_) throw ReplayError("cannot open replay file: " + path);
  summary_.per_agent_damage.assign(n_agents_, 0);
  json header;
  header["type"] = "header";
  header["version"] = kReplayVersion;
  header["protocol_version"] = 1;
  header["config_hash"] = config_hash_hex(cfg);
  header["seed"] = seed;
  header["scenario"] = json::parse(serialize_scenario(cfg));
  out_ << header.dump() << "\n";
}

void ReplayWriter::add_step(const std::vector<int>& actions,
                            const StepResult& result, const WorldState& world) {
  json j;
  j["type"] = "step";
  j["step_index"] = world.step_index - 1;
  j["actions"] = actions;
  json events = json::array();
  for (const auto& e : result.events) events.push_back(event_to_json(e));
  j["events"] = events;
  j["reward"] = result.reward;
  j["step_damage"] = result.step_damage;
  json heroes = json::array();
  for (const auto& h : world.heroes) heroes.push_back(snap_to_json(snap_unit(h)));
  j["heroes"] = heroes;
  j["dragon"] = snap_to_json(snap_unit(world.dragon));
  out_ << j.dump() << "\n";

  ++summary_.steps;
  summary_.total_reward += result.reward;
  summary_.total_damage += result.step_damage;
  for (int i = 0; i < n_agents_; ++i) {
    summary_.per_agent_damage[i] += result.per_agent_damage[i];
  }
  summary_.dragon_dead = result.terminated;
}

void ReplayWriter::end(bool interrupted) {
  if (ended_) return;
  ended_ = true;
  summary_.partial = interrupted;
  json j;
  j["type"] = "end";
  j["steps"] = summary_.steps;
  j["total_reward"] = summary_.total_reward;
  j["total_damage"] = summary_.total_damage;
  j["per_agent_damage"] = summary_.per_agent_damage;
  j["dragon_dead"] = summary_.dragon_dead;
  j["partial"] = summary_.partial;
  out_ << j.dump() << "\n";
  out_.flush();
}

ReplayData parse_replay(std::istream& in) {
  ReplayData data;
  std::string line;
  bool have_header = false, have_end = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ReplayError(std::string("replay line is not valid JSON: ") + e.what());
    }
    std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      if (have_header) throw ReplayError("duplicate replay header");
      have_header = true;
      data.version = j.at("version").get<int>();
      if (data.version != kReplayVersion) {
        throw ReplayError("unsupported replay version " +
                          std::to_string(data.version));
      }
      data.protocol_version = j.at("protocol_version").get<int>();
      data.config_hash = j.at("config_hash").get<std::string>();
      data.seed = j.at("seed").get<std::uint64_t>();
      data.scenario = load_scenario(j.at("scenario").dump());
      if (config_hash_hex(data.scenario) != data.config_hash) {
        throw ReplayError("replay config hash mismatch");
      }
    } else if (type == "step") {
      if (!have_header) throw ReplayError("replay step before header");
      ReplayStep step;
      step.step_index = j.at("step_index").get<int>();
      step.actions = j.at("actions").get<std::vector<int>>();
      for (const auto& e : j.at("events")) {
        step.events.push_back(event_from_json(e));
      }
      step.reward = j.at("reward").get<double>();
      step.step_damage = j.at("step_damage").get<long long>();
      for (const auto& h : j.at("heroes")) {
        step.heroes.push_back(snap_from_json(h));
      }
      step.dragon = snap_from_json(j.at("dragon"));
      data.steps.push_back(std::move(step));
    } else if (type == "end") {
      if (!have_header) throw ReplayError("replay footer before header");
      have_end = true;
      data.summary.steps = j.at("steps").get<int>();
      data.summary.total_reward = j.at("total_reward").get<double>();
      data.summary.total_damage = j.at("total_damage").get<long long>();
      data.summary.per_agent_damage =
          j.at("per_agent_damage").get<std::vector<long long>>();
      data.summary.dragon_dead = j.at("dragon_dead").get<bool>();
      data.summary.partial = j.at("partial").get<bool>();
    } else {
      throw ReplayError("unknown replay record type: " + type);
    }
  }
  if (!have_header) throw ReplayError("replay has no header");
  if (!have_end) {
    // Interrupted recording: synthesize what we can and flag it.
    data.summary.partial = true;
    data.summary.steps = static_cast<int>(data.steps.size());
    data.summary.per_agent_damage.assign(data.scenario.n_agents, 0);
    for (const auto& s : data.steps) {
      data.summary.total_reward += s.reward;
      data.summary.total_damage += s.step_damage;
      for (const auto& e : s.events) {
        if (e.target == kDragonActor && e.source >= 0) {
          data.summary.per_agent_damage[e.source] += e.amount;
        }
      }
    }
  }
  return data;
}

ReplayData read_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ReplayError("cannot open replay file: " + path);
  return parse_replay(in);
}

void verify_replay(const ReplayData& replay) {
  Env env(replay.scenario);
  env.reset(replay.seed);
  for (const auto& rec : replay.steps) {
    if (rec.step_index != env.step_index()) {
      throw ReplayError("replay step index out of sequence at " +
                        std::to_string(rec.step_index));
    }
    StepResult res = env.step(rec.actions);
    std::string at = " at step " + std::to_string(rec.step_index);
    if (res.events != rec.events) throw ReplayError("event mismatch" + at);
    if (res.reward != rec.reward) throw ReplayError("reward mismatch" + at);
    if (res.step_damage != rec.step_damage) {
      throw ReplayError("damage mismatch" + at);
    }
    for (int i = 0; i < env.n_agents(); ++i) {
      if (snap_unit(env.world().heroes[i]) != rec.heroes[i]) {
        throw ReplayError("hero state mismatch" + at);
      }
    }
    if (snap_unit(env.world().dragon) != rec.dragon) {
      throw ReplayError("dragon state mismatch" + at);
    }
  }
  if (!replay.summary.partial) {
    if (replay.summary.steps != static_cast<int>(replay.steps.size())) {
      throw ReplayError("footer step count mismatch");
    }
    if (env.episode_active()) {
      throw ReplayError("replay ends before the episode does");
    }
  }
}

std::vector<AgentContribution> damage_breakdown(const ReplayData& replay) {
  int n = replay.scenario.n_agents;
  std::vector<AgentContribution> out(n);
  long long team_total = 0;

  // Reconstruct spawn positions to judge the first step's movement.
  CompiledScenario sc = CompiledScenario::compile(replay.scenario);
  WorldState initial = init_world(sc, replay.seed);
  std::vector<Vec2> prev_pos;
  Vec2 prev_dragon = initial.dragon.pos;
  std::vector<bool> prev_alive(n, true);
  bool prev_dragon_alive = true;
  for (const auto& h : initial.heroes) prev_pos.push_back(h.pos);

  for (int i = 0; i < n; ++i) out[i].agent = i;

  for (const auto& step : replay.steps) {
    std::vector<long long> dealt(n, 0);
    for (const auto& e : step.events) {
      if (e.target == kDragonActor && e.source >= 0) {
        dealt[e.source] += e.amount;
        out[e.source].damage += e.amount;
        team_total += e.amount;
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!prev_alive[i]) continue;
      ++out[i].steps_alive;
      if (!prev_dragon_alive) continue;
      Vec2 now{step.heroes[i].x, step.heroes[i].z};
      Vec2 dragon_now{step.dragon.x, step.dragon.z};
      bool approached =
          distance(now, dragon_now) < distance(prev_pos[i], prev_dragon) - 1e-9;
      if (dealt[i] == 0 && !approached) ++out[i].idle_steps;
    }
    for (int i = 0; i < n; ++i) {
      prev_pos[i] = {step.heroes[i].x, step.heroes[i].z};
      prev_alive[i] = step.heroes[i].alive;
    }
    prev_dragon = {step.dragon.x, step.dragon.z};
    prev_dragon_alive = step.dragon.alive;
  }

  for (auto& c : out) {
    c.share = team_total > 0 ? static_cast<double>(c.damage) / team_total : 0.0;
    c.idle_fraction =
        c.steps_alive > 0 ? static_cast<double>(c.idle_steps) / c.steps_alive : 0.0;
  }
  return out;
}

}  // namespace dragonpit
