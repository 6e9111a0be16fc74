/**
 * @file config.hpp
 * @brief Scenario parameterization and its validation.
 *
 * Defaults describe a single private 5G cell: 30 kHz SCS (0.5 ms slots),
 * on/off sources at 1 Mbit/s for 10 ms every 100 ms with 1002-bit packets,
 * UEs uniformly placed within 100 m of a gNB mounted at (0, 0, 30),
 * deadline 5 ms and reliability target 99.999 %.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mbsim/breakout.hpp"
#include "mbsim/corepath.hpp"
#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"
#include "mbsim/ran.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

inline constexpr std::uint32_t kMaxReceivers = 150;
/// Receivers plus the group's source UE.
inline constexpr std::uint32_t kMaxUes = kMaxReceivers + 1;

// Per-component budget rows the radio samplers must stay inside.
inline constexpr Duration kUlGrantMax{1000};
inline constexpr Duration kGnbProcMin{1000};
inline constexpr Duration kGnbProcMax{2000};

enum class ScenarioMode : std::uint8_t { LocalBreakout, CoreAnchored, Paired };
enum class Measurement : std::uint8_t { Event, Analytic };
enum class PhaseMode : std::uint8_t { Random, Zero };

constexpr std::string_view to_string(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::LocalBreakout: return "local_breakout";
    case ScenarioMode::CoreAnchored: return "core_anchored";
    case ScenarioMode::Paired: return "paired";
  }
  return "?";
}
constexpr std::string_view to_string(Measurement m) {
  return m == Measurement::Event ? "event" : "analytic";
}
constexpr std::string_view to_string(PhaseMode m) {
  return m == PhaseMode::Random ? "random" : "zero";
}

struct GroupConfig {
  std::uint32_t source = 0;
  std::uint32_t flow = 0;
  std::vector<std::uint32_t> receivers;
  bool all_receivers = false;  // every UE except the source
  bool install_ft = true;      // FT entry pushed by the control plane
  bool allowed = true;         // flow starts with breakout permission
  std::string qos_marking = "urllc";

  /// Receiver ids with "all" expanded against @p n_ues.
  std::vector<std::uint32_t> resolved_receivers(std::uint32_t n_ues) const {
    if (!all_receivers) return receivers;
    std::vector<std::uint32_t> out;
    for (std::uint32_t u = 0; u < n_ues; ++u) {
      if (u != source) out.push_back(u);
    }
    return out;
  }
};

struct CellConfig {
  double radius_m = 100.0;
  Position gnb_pos{0.0, 0.0, 30.0};
};

struct PolicyConfig {
  std::int64_t prb_budget = 100;
  std::int64_t prb_required = 1;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Duration duration{10'000'000};
  CellConfig cell;
  std::uint32_t n_ues = 11;
  std::vector<GroupConfig> groups{GroupConfig{0, 0, {}, true}};
  OnOffProfile traffic;
  PhaseMode phase = PhaseMode::Random;
  RadioTiming radio;
  bool radio_override_bounds = false;
  CorePathModel core;
  bool core_override_bounds = false;
  LossModel loss;
  PolicyConfig policies;
  std::vector<DynamicEvent> dynamic_events;
  ScenarioMode mode = ScenarioMode::Paired;
  Measurement measurement = Measurement::Event;
  Duration deadline{5000};
  double target = 0.99999;
  bool dl_only = false;
};

/// Configuration key -> (line, column), both 1-based, filled by the loader.
using SourceMap = std::map<std::string, std::pair<int, int>>;

struct Diagnostic {
  std::string field;
  std::string message;
  std::optional<std::pair<int, int>> where;

  std::string format(std::string_view file = {}) const {
    std::string s;
    if (!file.empty()) s += std::string(file) + ":";
    if (where) s += std::to_string(where->first) + ":" + std::to_string(where->second) + ":";
    if (!s.empty()) s += " ";
    return s + field + ": " + message;
  }
};

namespace detail {

inline std::optional<std::pair<int, int>> locate(const SourceMap* map, std::string field) {
  if (map == nullptr) return std::nullopt;
  for (;;) {
    if (auto it = map->find(field); it != map->end()) return it->second;
    const auto cut = field.find_last_of(".[");
    if (cut == std::string::npos) return std::nullopt;
    field.resize(cut);
  }
}

}  // namespace detail

/// Reports every invariant violation of a configuration. Empty result means
/// the scenario is runnable.
inline std::vector<Diagnostic> validate(const ScenarioConfig& c, const SourceMap* where = nullptr) {
  std::vector<Diagnostic> out;
  auto bad = [&](std::string field, std::string msg) {
    auto loc = detail::locate(where, field);
    out.push_back(Diagnostic{std::move(field), std::move(msg), loc});
  };

  if (c.duration < Duration::zero()) bad("duration_us", "must be >= 0");
  if (!(c.cell.radius_m > 0.0)) bad("cell.radius_m", "must be > 0");
  if (c.n_ues < 2) bad("n_ues", "need at least a source and one receiver");
  if (c.n_ues > kMaxUes) {
    bad("n_ues", "at most " + std::to_string(kMaxUes) + " UEs (" + std::to_string(kMaxReceivers) +
                     " receivers plus a source)");
  }

  if (c.groups.empty()) bad("groups", "at least one group is required");
  std::set<std::pair<std::uint32_t, std::uint32_t>> flows;
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    const auto& g = c.groups[i];
    const std::string f = "groups[" + std::to_string(i) + "]";
    if (g.source >= c.n_ues) bad(f + ".source", "UE " + std::to_string(g.source) + " does not exist");
    const auto rs = g.resolved_receivers(c.n_ues);
    if (rs.empty()) bad(f + ".receivers", "receiver set is empty");
    if (rs.size() > kMaxReceivers) {
      bad(f + ".receivers", "more than " + std::to_string(kMaxReceivers) + " receivers");
    }
    std::set<std::uint32_t> seen;
    for (auto r : rs) {
      if (r >= c.n_ues) bad(f + ".receivers", "UE " + std::to_string(r) + " does not exist");
      if (r == g.source) bad(f + ".receivers", "source UE is listed as its own receiver");
      if (!seen.insert(r).second) bad(f + ".receivers", "duplicate receiver " + std::to_string(r));
    }
    if (!flows.insert({g.source, g.flow}).second) {
      bad(f + ".flow", "flow (" + std::to_string(g.source) + ", " + std::to_string(g.flow) +
                           ") already bound to another group");
    }
  }

  const auto& t = c.traffic;
  if (t.on_time <= Duration::zero()) bad("traffic.on_time_us", "must be > 0");
  if (t.off_time <= Duration::zero()) bad("traffic.off_time_us", "must be > 0");
  if (t.data_rate_bps <= 0) bad("traffic.data_rate_bps", "must be > 0");
  if (t.packet_bits <= 0) bad("traffic.packet_bits", "must be > 0");
  if (t.valid() && t.interarrival() <= Duration::zero()) {
    bad("traffic.data_rate_bps", "inter-arrival rounds to zero microseconds");
  }

  const auto& r = c.radio;
  if (r.slot_len <= Duration::zero()) bad("radio.slot_us", "must be > 0");
  if (r.dl_tx_slots < 1) bad("radio.dl_tx_slots", "must be >= 1");
  if (r.ul_tx_slots < 1) bad("radio.ul_tx_slots", "must be >= 1");
  if (r.nak_window < Duration::zero()) bad("radio.nak_window_us", "must be >= 0");
  if (r.repair_proc_delay < Duration::zero()) bad("radio.repair_proc_delay_us", "must be >= 0");
  if (r.max_repair_attempts < 0) bad("radio.max_repair_attempts", "must be >= 0");
  if (r.ul_grant_delay.lo() < Duration::zero()) bad("radio.ul_grant_delay_us", "negative bound");
  if (r.gnb_proc_delay.lo() < Duration::zero()) bad("radio.gnb_proc_delay_us", "negative bound");
  if (!c.radio_override_bounds) {
    if (r.ul_grant_delay.hi() > kUlGrantMax) {
      bad("radio.ul_grant_delay_us", r.ul_grant_delay.describe() + " exceeds the 1000 us uplink row");
    }
    if (r.gnb_proc_delay.lo() < kGnbProcMin || r.gnb_proc_delay.hi() > kGnbProcMax) {
      bad("radio.gnb_proc_delay_us",
          r.gnb_proc_delay.describe() + " outside the [1000, 2000] us gNB processing row");
    }
  }

  const auto& core = c.core.delay_sampler;
  if (core.lo() < Duration::zero()) bad("core.delay_us", "negative bound");
  if (!c.core_override_bounds && (core.lo() < kCoreDelayMin || core.hi() > kCoreDelayMax)) {
    bad("core.delay_us", core.describe() + " outside [5000, 12000] us (set override_bounds)");
  }

  const double p = c.loss.per_receiver_loss_prob;
  if (!(p >= 0.0 && p <= 1.0)) bad("loss.per_receiver_loss_prob", "must lie in [0, 1]");

  if (c.policies.prb_budget < 0) bad("policies.prb_budget", "must be >= 0");
  if (c.policies.prb_required < 1) bad("policies.prb_required", "must be >= 1");

  for (std::size_t i = 0; i < c.dynamic_events.size(); ++i) {
    const auto& ev = c.dynamic_events[i];
    const std::string f = "dynamic_events[" + std::to_string(i) + "]";
    if (ev.at < SimTime{}) bad(f + ".at_us", "must be >= 0");
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Detach> || std::is_same_v<T, Attach>) {
            if (raw(a.ue) >= c.n_ues) bad(f, "UE " + std::to_string(raw(a.ue)) + " does not exist");
          } else {
            if (flows.count({raw(a.flow.source), raw(a.flow.flow)}) == 0) {
              bad(f, "flow (" + std::to_string(raw(a.flow.source)) + ", " +
                         std::to_string(raw(a.flow.flow)) + ") is not bound to any group");
            }
          }
        },
        ev.action);
  }

  if (c.deadline <= Duration::zero()) bad("deadline_us", "must be > 0");
  if (!(c.target >= 0.0 && c.target <= 1.0)) bad("target", "must lie in [0, 1]");
  return out;
}

}  // namespace mbsim
