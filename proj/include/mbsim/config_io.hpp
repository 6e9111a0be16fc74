/**
 * @file config_io.hpp
 * @brief YAML scenario files.
 *
 * Times are integer microseconds (keys ending in _us). Samplers are written
 * as {fixed: X} or {uniform: [LO, HI]}. Unknown keys are rejected so typos
 * surface with their line number.
 */
#pragma once

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mbsim/config.hpp"

namespace mbsim {

/// Malformed or invalid scenario file. what() is "file:line:col: message".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedConfig {
  ScenarioConfig config;
  SourceMap where;
};

namespace detail {

class YamlReader {
 public:
  YamlReader(std::string file, SourceMap& map) : file_(std::move(file)), map_(map) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    std::ostringstream os;
    os << file_ << ":";
    if (n.IsDefined() && n.Mark().line >= 0) os << n.Mark().line + 1 << ":" << n.Mark().column + 1 << ":";
    os << " " << field << ": " << msg;
    throw ConfigError(os.str());
  }

  void note(const YAML::Node& n, const std::string& field) {
    if (n.IsDefined() && n.Mark().line >= 0) map_[field] = {n.Mark().line + 1, n.Mark().column + 1};
  }

  /// Rejects keys of a mapping not in @p known.
  void only(const YAML::Node& n, const std::string& field, std::set<std::string> known) const {
    if (!n.IsMap()) fail(n, field, "expected a mapping");
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (known.count(key) == 0) fail(kv.first, join(field, key), "unknown key");
    }
  }

  template <class T>
  void read(const YAML::Node& parent, const std::string& parent_field, const char* key, T& out) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) return;
    const std::string field = join(parent_field, key);
    note(n, field);
    try {
      out = n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, field, std::string("expected ") + type_name<T>());
    }
  }

  void read_us(const YAML::Node& parent, const std::string& parent_field, const char* key,
               Duration& out) {
    std::int64_t v = out.count();
    read(parent, parent_field, key, v);
    out = Duration{v};
  }

  void read_sampler(const YAML::Node& parent, const std::string& parent_field, const char* key,
                    Sampler& out) {
    const YAML::Node n = parent[key];
    if (!n.IsDefined()) return;
    const std::string field = join(parent_field, key);
    note(n, field);
    if (!n.IsMap() || n.size() != 1) fail(n, field, "expected {fixed: X} or {uniform: [LO, HI]}");
    try {
      if (n["fixed"]) {
        out = Sampler::fixed(Duration{n["fixed"].as<std::int64_t>()});
      } else if (n["uniform"]) {
        const auto& u = n["uniform"];
        if (!u.IsSequence() || u.size() != 2) fail(u, field, "uniform needs [LO, HI]");
        const auto lo = u[0].as<std::int64_t>();
        const auto hi = u[1].as<std::int64_t>();
        if (hi < lo) fail(u, field, "uniform bounds reversed");
        out = Sampler::uniform(Duration{lo}, Duration{hi});
      } else {
        fail(n, field, "expected {fixed: X} or {uniform: [LO, HI]}");
      }
    } catch (const YAML::Exception&) {
      fail(n, field, "sampler values must be integers (microseconds)");
    }
  }

  static std::string join(const std::string& a, const std::string& b) {
    return a.empty() ? b : a + "." + b;
  }

 private:
  template <class T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  std::string file_;
  SourceMap& map_;
};

inline FlowKey read_flow(YamlReader& r, const YAML::Node& n, const std::string& field) {
  r.only(n, field, {"source", "flow"});
  std::uint32_t s = 0, f = 0;
  r.read(n, field, "source", s);
  r.read(n, field, "flow", f);
  return FlowKey{UeId{s}, FlowId{f}};
}

inline ScenarioConfig parse_config(const YAML::Node& root, YamlReader& r) {
  ScenarioConfig c;
  if (root.IsNull()) return c;
  r.only(root, "", {"seed", "duration_us", "cell", "n_ues", "groups", "traffic", "radio", "core",
                    "loss", "policies", "dynamic_events", "mode", "measurement", "deadline_us",
                    "target", "dl_only"});
  r.read(root, "", "seed", c.seed);
  r.read_us(root, "", "duration_us", c.duration);
  r.read(root, "", "n_ues", c.n_ues);
  r.read_us(root, "", "deadline_us", c.deadline);
  r.read(root, "", "target", c.target);
  r.read(root, "", "dl_only", c.dl_only);

  if (const auto n = root["mode"]) {
    r.note(n, "mode");
    const auto s = n.as<std::string>();
    if (s == "local_breakout") c.mode = ScenarioMode::LocalBreakout;
    else if (s == "core_anchored") c.mode = ScenarioMode::CoreAnchored;
    else if (s == "paired") c.mode = ScenarioMode::Paired;
    else r.fail(n, "mode", "expected local_breakout, core_anchored or paired");
  }
  if (const auto n = root["measurement"]) {
    r.note(n, "measurement");
    const auto s = n.as<std::string>();
    if (s == "event") c.measurement = Measurement::Event;
    else if (s == "analytic") c.measurement = Measurement::Analytic;
    else r.fail(n, "measurement", "expected event or analytic");
  }

  if (const auto n = root["cell"]) {
    r.only(n, "cell", {"radius_m", "gnb_pos"});
    r.read(n, "cell", "radius_m", c.cell.radius_m);
    if (const auto p = n["gnb_pos"]) {
      r.note(p, "cell.gnb_pos");
      if (!p.IsSequence() || p.size() != 3) r.fail(p, "cell.gnb_pos", "expected [x, y, z]");
      c.cell.gnb_pos = Position{p[0].as<double>(), p[1].as<double>(), p[2].as<double>()};
    }
  }

  if (const auto gs = root["groups"]) {
    r.note(gs, "groups");
    if (!gs.IsSequence()) r.fail(gs, "groups", "expected a list");
    c.groups.clear();
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const auto& g = gs[i];
      const std::string f = "groups[" + std::to_string(i) + "]";
      r.note(g, f);
      r.only(g, f, {"source", "flow", "receivers", "install_ft", "allowed", "qos_marking"});
      GroupConfig gc;
      r.read(g, f, "source", gc.source);
      r.read(g, f, "flow", gc.flow);
      r.read(g, f, "install_ft", gc.install_ft);
      r.read(g, f, "allowed", gc.allowed);
      r.read(g, f, "qos_marking", gc.qos_marking);
      const auto rs = g["receivers"];
      if (!rs) r.fail(g, f, "missing receivers");
      r.note(rs, f + ".receivers");
      if (rs.IsScalar() && rs.as<std::string>() == "all") {
        gc.all_receivers = true;
      } else if (rs.IsSequence()) {
        for (const auto& v : rs) {
          try {
            gc.receivers.push_back(v.as<std::uint32_t>());
          } catch (const YAML::Exception&) {
            r.fail(v, f + ".receivers", "expected a UE id");
          }
        }
      } else if (rs.IsMap()) {
        r.only(rs, f + ".receivers", {"first", "count"});
        std::uint32_t first = 0, count = 0;
        r.read(rs, f + ".receivers", "first", first);
        r.read(rs, f + ".receivers", "count", count);
        for (std::uint32_t k = 0; k < count; ++k) gc.receivers.push_back(first + k);
      } else {
        r.fail(rs, f + ".receivers", "expected all, a list, or {first, count}");
      }
      c.groups.push_back(std::move(gc));
    }
  }

  if (const auto n = root["traffic"]) {
    r.only(n, "traffic", {"on_time_us", "off_time_us", "data_rate_bps", "packet_bits", "phase",
                          "exp_interarrival"});
    r.read_us(n, "traffic", "on_time_us", c.traffic.on_time);
    r.read_us(n, "traffic", "off_time_us", c.traffic.off_time);
    r.read(n, "traffic", "data_rate_bps", c.traffic.data_rate_bps);
    r.read(n, "traffic", "packet_bits", c.traffic.packet_bits);
    r.read(n, "traffic", "exp_interarrival", c.traffic.exp_interarrival);
    if (const auto p = n["phase"]) {
      r.note(p, "traffic.phase");
      const auto s = p.as<std::string>();
      if (s == "random") c.phase = PhaseMode::Random;
      else if (s == "zero") c.phase = PhaseMode::Zero;
      else r.fail(p, "traffic.phase", "expected random or zero");
    }
  }

  if (const auto n = root["radio"]) {
    r.only(n, "radio", {"slot_us", "ul_grant_mode", "ul_grant_delay_us", "gnb_proc_delay_us",
                        "dl_tx_slots", "ul_tx_slots", "nak_window_us", "repair_proc_delay_us",
                        "max_repair_attempts", "override_bounds"});
    auto& rt = c.radio;
    r.read_us(n, "radio", "slot_us", rt.slot_len);
    r.read_sampler(n, "radio", "ul_grant_delay_us", rt.ul_grant_delay);
    r.read_sampler(n, "radio", "gnb_proc_delay_us", rt.gnb_proc_delay);
    r.read(n, "radio", "dl_tx_slots", rt.dl_tx_slots);
    r.read(n, "radio", "ul_tx_slots", rt.ul_tx_slots);
    r.read_us(n, "radio", "nak_window_us", rt.nak_window);
    r.read_us(n, "radio", "repair_proc_delay_us", rt.repair_proc_delay);
    r.read(n, "radio", "max_repair_attempts", rt.max_repair_attempts);
    r.read(n, "radio", "override_bounds", c.radio_override_bounds);
    if (const auto m = n["ul_grant_mode"]) {
      r.note(m, "radio.ul_grant_mode");
      const auto s = m.as<std::string>();
      if (s == "configured_grant") rt.ul_grant_mode = UlGrantMode::ConfiguredGrant;
      else if (s == "request_based") rt.ul_grant_mode = UlGrantMode::RequestBased;
      else r.fail(m, "radio.ul_grant_mode", "expected configured_grant or request_based");
    }
  }

  if (const auto n = root["core"]) {
    r.only(n, "core", {"delay_us", "override_bounds"});
    r.read_sampler(n, "core", "delay_us", c.core.delay_sampler);
    r.read(n, "core", "override_bounds", c.core_override_bounds);
  }
  if (const auto n = root["loss"]) {
    r.only(n, "loss", {"per_receiver_loss_prob"});
    r.read(n, "loss", "per_receiver_loss_prob", c.loss.per_receiver_loss_prob);
  }
  if (const auto n = root["policies"]) {
    r.only(n, "policies", {"prb_budget", "prb_required"});
    r.read(n, "policies", "prb_budget", c.policies.prb_budget);
    r.read(n, "policies", "prb_required", c.policies.prb_required);
  }

  if (const auto evs = root["dynamic_events"]) {
    r.note(evs, "dynamic_events");
    if (!evs.IsSequence()) r.fail(evs, "dynamic_events", "expected a list");
    for (std::size_t i = 0; i < evs.size(); ++i) {
      const auto& e = evs[i];
      const std::string f = "dynamic_events[" + std::to_string(i) + "]";
      r.note(e, f);
      r.only(e, f, {"at_us", "detach", "attach", "revoke", "grant"});
      if (e.size() != 2 || !e["at_us"]) r.fail(e, f, "expected at_us plus one action");
      Duration at{0};
      r.read_us(e, f, "at_us", at);
      DynamicEvent ev{SimTime{at}, Detach{}};
      std::uint32_t ue = 0;
      if (e["detach"]) {
        r.read(e, f, "detach", ue);
        ev.action = Detach{UeId{ue}};
      } else if (e["attach"]) {
        r.read(e, f, "attach", ue);
        ev.action = Attach{UeId{ue}};
      } else if (e["revoke"]) {
        ev.action = Revoke{read_flow(r, e["revoke"], f + ".revoke")};
      } else {
        ev.action = Grant{read_flow(r, e["grant"], f + ".grant")};
      }
      c.dynamic_events.push_back(ev);
    }
  }
  return c;
}

}  // namespace detail

/// Parses scenario text. @p file only labels diagnostics.
inline LoadedConfig parse_config_text(const std::string& text, const std::string& file = "<config>") {
  LoadedConfig out;
  detail::YamlReader reader(file, out.where);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(file + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  try {
    out.config = detail::parse_config(root, reader);
  } catch (const YAML::Exception& e) {
    throw ConfigError(file + ":" + std::to_string(e.mark.line + 1) + ":" +
                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  return out;
}

inline LoadedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace mbsim
