#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "swarm/arena/world.hpp"
#include "swarm/harness/config.hpp"
#include "swarm/pfsm/state.hpp"

namespace swarm::harness {

using arena::Team;

inline constexpr int kLogVersion = 1;

struct AgentTick {
  arena::AgentId id{0};
  Team team{Team::kRed};
  Vec2 position;
  Vec2 velocity;
  pfsm::StateId behavior{pfsm::StateId::kSearch};
  pfsm::StateId goal{pfsm::StateId::kSearch};
  int missiles{0};
  bool alive{true};
  bool acted{true};  // alive at the start of the tick, so it perceived and decided
};

struct LogEvent {
  enum class Kind { kFire, kKill, kReject };
  Kind kind{Kind::kFire};
  arena::AgentId shooter{0};
  arena::AgentId target{0};
  std::string reason;  // rejections only
};

struct TickRecord {
  int tick{0};
  std::vector<AgentTick> agents;
  std::vector<LogEvent> events;
};

struct LogHeader {
  std::uint64_t seed{0};
  int red{0};
  int blue{0};
  std::string red_policy;
  std::string blue_policy;
  std::string scenario{"random"};  // "random" spawn or "iv-d"
  std::string checkpoint;
  std::string checkpoint_digest;
  json config;
};

struct Diagnostic {
  std::string code;
  std::string message;
  int tick{0};
};

struct EpisodeLog {
  LogHeader header;
  std::vector<TickRecord> ticks;
  arena::Outcome outcome{arena::Outcome::kOngoing};
  int final_tick{0};
  std::optional<Diagnostic> error;

  int agent_count() const { return header.red + header.blue; }
};

inline std::string_view event_name(LogEvent::Kind k) {
  switch (k) {
    case LogEvent::Kind::kFire: return "fire";
    case LogEvent::Kind::kKill: return "kill";
    case LogEvent::Kind::kReject: return "reject";
  }
  return "?";
}

inline json header_json(const LogHeader& h) {
  return {{"type", "header"},          {"version", kLogVersion},   {"seed", h.seed},
          {"red", h.red},              {"blue", h.blue},           {"red_policy", h.red_policy},
          {"blue_policy", h.blue_policy}, {"scenario", h.scenario}, {"checkpoint", h.checkpoint},
          {"checkpoint_digest", h.checkpoint_digest}, {"config", h.config}};
}

inline json tick_json(const TickRecord& t) {
  json agents = json::array();
  for (const auto& a : t.agents) {
    json actions = json::array();
    if (a.acted)
      for (pfsm::Action act : pfsm::actions_for(a.behavior)) actions.push_back(std::string(pfsm::name(act)));
    agents.push_back({{"id", a.id},
                      {"team", std::string(arena::name(a.team))},
                      {"x", a.position.x},
                      {"y", a.position.y},
                      {"vx", a.velocity.x},
                      {"vy", a.velocity.y},
                      {"behavior", std::string(pfsm::name(a.behavior))},
                      {"goal", std::string(pfsm::name(a.goal))},
                      {"actions", actions},
                      {"missiles", a.missiles},
                      {"alive", a.alive},
                      {"acted", a.acted}});
  }
  json events = json::array();
  for (const auto& e : t.events) {
    json ev = {{"type", std::string(event_name(e.kind))}, {"shooter", e.shooter}, {"target", e.target}};
    if (e.kind == LogEvent::Kind::kReject) ev["reason"] = e.reason;
    events.push_back(ev);
  }
  return {{"tick", t.tick}, {"agents", agents}, {"events", events}};
}

inline json result_json(const EpisodeLog& log) {
  json r = {{"type", "result"}, {"outcome", std::string(arena::name(log.outcome))}, {"ticks", log.final_tick}};
  if (log.error) r["error"] = {{"code", log.error->code}, {"message", log.error->message}, {"tick", log.error->tick}};
  return r;
}

// Line-delimited: header, one record per tick, result.
inline void write_log(const EpisodeLog& log, std::ostream& out) {
  out << header_json(log.header).dump() << '\n';
  for (const auto& t : log.ticks) out << tick_json(t).dump() << '\n';
  out << result_json(log).dump() << '\n';
}

inline std::string log_text(const EpisodeLog& log) {
  std::ostringstream s;
  write_log(log, s);
  return s.str();
}

inline arena::Outcome parse_outcome(const std::string& s) {
  for (auto o : {arena::Outcome::kOngoing, arena::Outcome::kRedWin, arena::Outcome::kBlueWin, arena::Outcome::kDraw})
    if (arena::name(o) == s) return o;
  fail(ErrorCode::kFormat, "unknown outcome '" + s + "'");
}

inline EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool have_header = false, have_result = false;
  int lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (!have_header) {
        require(j.value("type", "") == "header", ErrorCode::kFormat, "log must start with a header");
        require(j.at("version").get<int>() == kLogVersion, ErrorCode::kFormat, "unsupported log version");
        auto& h = log.header;
        h.seed = j.at("seed").get<std::uint64_t>();
        h.red = j.at("red");
        h.blue = j.at("blue");
        h.red_policy = j.at("red_policy");
        h.blue_policy = j.at("blue_policy");
        h.scenario = j.value("scenario", "random");
        h.checkpoint = j.value("checkpoint", "");
        h.checkpoint_digest = j.value("checkpoint_digest", "");
        h.config = j.at("config");
        have_header = true;
        continue;
      }
      if (j.value("type", "") == "result") {
        log.outcome = parse_outcome(j.at("outcome"));
        log.final_tick = j.at("ticks");
        if (j.contains("error"))
          log.error = Diagnostic{j["error"].at("code"), j["error"].at("message"), j["error"].at("tick")};
        have_result = true;
        continue;
      }
      TickRecord t;
      t.tick = j.at("tick");
      for (const auto& a : j.at("agents")) {
        AgentTick r;
        r.id = a.at("id");
        r.team = a.at("team").get<std::string>() == "red" ? Team::kRed : Team::kBlue;
        r.position = {a.at("x"), a.at("y")};
        r.velocity = {a.at("vx"), a.at("vy")};
        const auto b = pfsm::parse_state(a.at("behavior").get<std::string>());
        const auto g = pfsm::parse_state(a.at("goal").get<std::string>());
        require(b && g, ErrorCode::kFormat, "unknown state name");
        r.behavior = *b;
        r.goal = *g;
        r.missiles = a.at("missiles");
        r.alive = a.at("alive");
        r.acted = a.at("acted");
        t.agents.push_back(r);
      }
      for (const auto& e : j.at("events")) {
        LogEvent ev;
        const std::string type = e.at("type");
        ev.kind = type == "fire" ? LogEvent::Kind::kFire : type == "kill" ? LogEvent::Kind::kKill : LogEvent::Kind::kReject;
        ev.shooter = e.at("shooter");
        ev.target = e.at("target");
        ev.reason = e.value("reason", "");
        t.events.push_back(ev);
      }
      log.ticks.push_back(std::move(t));
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kFormat, "log line " + std::to_string(lineno) + ": " + ex.what());
  }
  require(have_header, ErrorCode::kFormat, "empty log");
  require(have_result, ErrorCode::kFormat, "log has no result record");
  return log;
}

}  // namespace swarm::harness
