/**
 * @file domain.hpp
 * @brief Cell model: UEs, multicast groups, flows, PTM bearers, the local
 *        forwarding table and the breakout policy set.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mbsim/engine.hpp"

namespace mbsim {

enum class UeId : std::uint32_t {};
enum class GroupId : std::uint32_t {};
enum class FlowId : std::uint32_t {};
enum class BearerId : std::uint32_t {};

template <class Id>
constexpr std::uint32_t raw(Id id) {
  return static_cast<std::uint32_t>(id);
}

/// Rejected control-plane style operation (bad install, dangling reference).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Ue {
  UeId id{};
  Position position{};
  bool attached = true;
};

/// Uplink flow identity (source UE, flow id).
struct FlowKey {
  UeId source{};
  FlowId flow{};

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{raw(k.source)} << 32) | raw(k.flow));
  }
};

struct MulticastGroup {
  GroupId id{};
  UeId source{};
  FlowId flow{};
  std::vector<UeId> receivers;  // sorted, unique
  std::vector<UeId> members;    // receivers plus source, sorted

  bool has_member(UeId u) const { return std::binary_search(members.begin(), members.end(), u); }
  bool has_receiver(UeId u) const {
    return std::binary_search(receivers.begin(), receivers.end(), u);
  }
  FlowKey key() const { return FlowKey{source, flow}; }
};

/// Builds a group with normalized (sorted, unique) receiver and member sets.
inline MulticastGroup make_group(GroupId id, UeId source, FlowId flow, std::vector<UeId> receivers) {
  std::sort(receivers.begin(), receivers.end());
  receivers.erase(std::unique(receivers.begin(), receivers.end()), receivers.end());
  MulticastGroup g{id, source, flow, receivers, receivers};
  g.members.insert(std::lower_bound(g.members.begin(), g.members.end(), source), source);
  g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
  return g;
}

struct Pdu {
  std::uint64_t seq = 0;
  FlowKey key{};
  std::int64_t size_bits = 0;
  SimTime created_at{};  // MAC ingress at the source
};

struct QueuedPdu {
  std::size_t pdu_index;
  SimTime enqueued_at;
};

struct PtmBearer {
  BearerId id{};
  GroupId group{};
  std::string qos_marking = "urllc";
  std::deque<QueuedPdu> pdcp_queue;
  SimTime next_free{};  // earliest start of the next PTM transmission
};

struct ForwardingEntry {
  FlowKey key{};
  GroupId group{};
  BearerId bearer{};

  friend bool operator==(const ForwardingEntry&, const ForwardingEntry&) = default;
};

/// UEs, groups and bearers of one cell, indexed by their raw ids.
class CellState {
 public:
  UeId add_ue(Position pos) {
    const UeId id{static_cast<std::uint32_t>(ues_.size())};
    ues_.push_back(Ue{id, pos, true});
    return id;
  }

  /// Registers a group and its PTM bearer (same index). Checks referential
  /// integrity against the UE set.
  GroupId add_group(UeId source, FlowId flow, std::vector<UeId> receivers) {
    const GroupId gid{static_cast<std::uint32_t>(groups_.size())};
    MulticastGroup g = make_group(gid, source, flow, std::move(receivers));
    if (!has_ue(source)) {
      throw DomainError("group " + std::to_string(raw(gid)) + ": unknown source UE " +
                        std::to_string(raw(source)));
    }
    if (g.receivers.empty()) {
      throw DomainError("group " + std::to_string(raw(gid)) + ": empty receiver set");
    }
    for (UeId r : g.receivers) {
      if (!has_ue(r)) {
        throw DomainError("group " + std::to_string(raw(gid)) + ": unknown receiver UE " +
                          std::to_string(raw(r)));
      }
      if (r == source) {
        throw DomainError("group " + std::to_string(raw(gid)) + ": source listed as receiver");
      }
    }
    for (const auto& other : groups_) {
      if (other.key() == g.key()) {
        throw DomainError("group " + std::to_string(raw(gid)) + ": flow already bound to group " +
                          std::to_string(raw(other.id)));
      }
    }
    groups_.push_back(std::move(g));
    PtmBearer b;
    b.id = BearerId{raw(gid)};
    b.group = gid;
    bearers_.push_back(std::move(b));
    return gid;
  }

  bool has_ue(UeId u) const { return raw(u) < ues_.size(); }
  bool has_group(GroupId g) const { return raw(g) < groups_.size(); }

  const std::vector<Ue>& ues() const { return ues_; }
  const std::vector<MulticastGroup>& groups() const { return groups_; }

  Ue& ue(UeId u) { return ues_.at(raw(u)); }
  const Ue& ue(UeId u) const { return ues_.at(raw(u)); }
  const MulticastGroup& group(GroupId g) const { return groups_.at(raw(g)); }
  PtmBearer& bearer(BearerId b) { return bearers_.at(raw(b)); }
  const PtmBearer& bearer(BearerId b) const { return bearers_.at(raw(b)); }

  /// The PTM bearer configured for a group.
  BearerId bearer_of(GroupId g) const { return bearers_.at(raw(g)).id; }

  /// Group bound to a flow in the core's membership view.
  std::optional<GroupId> group_of(const FlowKey& k) const {
    for (const auto& g : groups_) {
      if (g.key() == k) return g.id;
    }
    return std::nullopt;
  }

  bool receivers_attached(GroupId g) const {
    const auto& rs = group(g).receivers;
    return std::all_of(rs.begin(), rs.end(), [&](UeId r) { return ue(r).attached; });
  }

 private:
  std::vector<Ue> ues_;
  std::vector<MulticastGroup> groups_;
  std::vector<PtmBearer> bearers_;
};

/// FT: (source, flow) -> (group, PTM bearer). At most one entry per key.
class ForwardingTable {
 public:
  void install(const ForwardingEntry& e, const CellState& cell) {
    if (entries_.count(e.key) != 0) {
      throw DomainError("ft_install: duplicate entry for flow (" + std::to_string(raw(e.key.source)) +
                        ", " + std::to_string(raw(e.key.flow)) + ")");
    }
    if (!cell.has_group(e.group)) {
      throw DomainError("ft_install: unknown group " + std::to_string(raw(e.group)));
    }
    if (cell.bearer_of(e.group) != e.bearer) {
      throw DomainError("ft_install: bearer " + std::to_string(raw(e.bearer)) +
                        " is not the PTM bearer of group " + std::to_string(raw(e.group)));
    }
    if (!cell.has_ue(e.key.source)) {
      throw DomainError("ft_install: unknown source UE " + std::to_string(raw(e.key.source)));
    }
    entries_.emplace(e.key, e);
  }

  bool remove(const FlowKey& k) { return entries_.erase(k) != 0; }

  std::optional<ForwardingEntry> lookup(const FlowKey& k) const {
    auto it = entries_.find(k);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<FlowKey, ForwardingEntry, FlowKeyHash> entries_;
};

struct PolicySet {
  std::unordered_set<FlowKey, FlowKeyHash> allowed_flows;
  std::int64_t prb_budget = 100;
  std::int64_t prb_required = 1;

  bool allows(const FlowKey& k) const { return allowed_flows.count(k) != 0; }
};

enum class Eligibility : std::uint8_t { Eligible, NotAllowed, ReceiversNotAttached, PrbExhausted };

constexpr std::string_view to_string(Eligibility e) {
  switch (e) {
    case Eligibility::Eligible: return "Eligible";
    case Eligibility::NotAllowed: return "NotAllowed";
    case Eligibility::ReceiversNotAttached: return "ReceiversNotAttached";
    case Eligibility::PrbExhausted: return "PrbExhausted";
  }
  return "?";
}

/// Local breakout eligibility of a flow whose FT entry points at @p group.
/// Failing checks are reported in the order policy, attachment, PRB.
inline Eligibility eligibility(const FlowKey& key, GroupId group, const PolicySet& policies,
                               const CellState& cell) {
  if (!policies.allows(key)) return Eligibility::NotAllowed;
  if (!cell.receivers_attached(group)) return Eligibility::ReceiversNotAttached;
  if (policies.prb_required > policies.prb_budget) return Eligibility::PrbExhausted;
  return Eligibility::Eligible;
}

}  // namespace mbsim
