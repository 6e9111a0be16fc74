/**
 * @file breakout.hpp
 * @brief gNB routing decision for uplink PDUs: pivot onto the group's PTM
 *        bearer locally, or fall back to the core-anchored path.
 */
#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"

namespace mbsim {

/// Which path a run forces. CoreAnchored is the MBS baseline: every PDU goes
/// through the core while FT and policy state stay identical.
enum class PathMode : std::uint8_t { LocalBreakout, CoreAnchored };

constexpr std::string_view to_string(PathMode m) {
  return m == PathMode::LocalBreakout ? "local_breakout" : "core_anchored";
}

enum class RouteReason : std::uint8_t {
  NoFtEntry,
  NotAllowed,
  ReceiversNotAttached,
  PrbExhausted,
  ForcedCoreScenario,
};

constexpr std::string_view to_string(RouteReason r) {
  switch (r) {
    case RouteReason::NoFtEntry: return "NoFtEntry";
    case RouteReason::NotAllowed: return "NotAllowed";
    case RouteReason::ReceiversNotAttached: return "ReceiversNotAttached";
    case RouteReason::PrbExhausted: return "PrbExhausted";
    case RouteReason::ForcedCoreScenario: return "ForcedCoreScenario";
  }
  return "?";
}

struct LocalBreakout {
  GroupId group;
  BearerId bearer;
  friend bool operator==(const LocalBreakout&, const LocalBreakout&) = default;
};

struct SendToCore {
  RouteReason reason;
  friend bool operator==(const SendToCore&, const SendToCore&) = default;
};

using RouteDecision = std::variant<LocalBreakout, SendToCore>;

inline bool is_local(const RouteDecision& d) { return std::holds_alternative<LocalBreakout>(d); }

/// Routing decision for one uplink PDU at gNB ingress. Total: every input
/// maps to a decision.
inline RouteDecision route(const Pdu& pdu, const ForwardingTable& ft, const PolicySet& policies,
                           const CellState& cell, PathMode mode) {
  if (mode == PathMode::CoreAnchored) return SendToCore{RouteReason::ForcedCoreScenario};

  const auto entry = ft.lookup(pdu.key);
  if (!entry) return SendToCore{RouteReason::NoFtEntry};

  switch (eligibility(pdu.key, entry->group, policies, cell)) {
    case Eligibility::NotAllowed: return SendToCore{RouteReason::NotAllowed};
    case Eligibility::ReceiversNotAttached: return SendToCore{RouteReason::ReceiversNotAttached};
    case Eligibility::PrbExhausted: return SendToCore{RouteReason::PrbExhausted};
    case Eligibility::Eligible: break;
  }
  return LocalBreakout{entry->group, entry->bearer};
}

struct Detach {
  UeId ue;
};
struct Attach {
  UeId ue;
};
struct Revoke {
  FlowKey flow;
};
struct Grant {
  FlowKey flow;
};

struct DynamicEvent {
  SimTime at;
  std::variant<Detach, Attach, Revoke, Grant> action;

  bool is_mobility() const {
    return std::holds_alternative<Detach>(action) || std::holds_alternative<Attach>(action);
  }
};

/// Applies a mobility or policy change. PDUs already routed are unaffected;
/// the next route() call sees the new state.
inline void apply_dynamic_event(const DynamicEvent& ev, CellState& cell, PolicySet& policies) {
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, Detach> || std::is_same_v<T, Attach>) {
          if (!cell.has_ue(a.ue)) {
            throw DomainError("dynamic event references unknown UE " + std::to_string(raw(a.ue)));
          }
          cell.ue(a.ue).attached = std::is_same_v<T, Attach>;
        } else if constexpr (std::is_same_v<T, Revoke>) {
          policies.allowed_flows.erase(a.flow);
        } else {
          policies.allowed_flows.insert(a.flow);
        }
      },
      ev.action);
}

}  // namespace mbsim
