/**
 * @file simulation.hpp
 * @brief One run of a cell scenario on one forced path mode.
 *
 * Wires traffic, the routing decision, radio timing, the core segment and
 * the ledger onto the event queue. A PDU's journey:
 *
 *   PacketArrival -> UlGrantReady -> UlTxDone (route at gNB ingress)
 *     -> GnbProcDone -> [CorePathDone] -> DlSlotBoundary -> PtmTxDone
 *     -> [NakReport -> RepairTxDone...]
 *
 * In analytic measurement the path after gNB ingress is summed directly:
 * the downlink slot alignment is computed from the core-free ready time and
 * the core delay is added on top, so both paths share every radio term.
 *
 * Random draws use streams keyed by (seed, purpose, source, flow, creation
 * time), so paired runs and different group sizes see identical radio draws
 * for the same PDU.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <variant>
#include <vector>

#include "mbsim/breakout.hpp"
#include "mbsim/config.hpp"
#include "mbsim/corepath.hpp"
#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"
#include "mbsim/metrics.hpp"
#include "mbsim/ran.hpp"
#include "mbsim/rng.hpp"
#include "mbsim/traffic.hpp"

namespace mbsim {

/// Route decisions tallied by outcome.
struct DecisionCounts {
  std::uint64_t local_breakout = 0;
  std::array<std::uint64_t, 5> to_core{};  // indexed by RouteReason

  void add(const RouteDecision& d) {
    if (const auto* c = std::get_if<SendToCore>(&d)) {
      ++to_core[static_cast<std::size_t>(c->reason)];
    } else {
      ++local_breakout;
    }
  }
  std::uint64_t core(RouteReason r) const { return to_core[static_cast<std::size_t>(r)]; }
  std::uint64_t total_core() const {
    std::uint64_t s = 0;
    for (auto v : to_core) s += v;
    return s;
  }
  std::uint64_t total() const { return local_breakout + total_core(); }

  friend bool operator==(const DecisionCounts&, const DecisionCounts&) = default;
};

/// What happened to one PDU at the gNB.
struct PduRecord {
  Pdu pdu;
  std::optional<SimTime> gnb_ingress;
  std::optional<RouteDecision> decision;
  std::uint32_t ptm_transmissions = 0;
  std::uint32_t core_segments = 0;
};

struct PathRun {
  PathMode path = PathMode::LocalBreakout;
  Measurement measurement = Measurement::Event;
  LatencyLedger ledger;
  DecisionCounts decisions;
  std::vector<PduRecord> pdus;
  std::vector<Ue> ues;
  std::uint64_t ptm_transmissions = 0;
  std::uint64_t core_segments = 0;
  std::uint64_t repair_transmissions = 0;
  std::uint64_t nak_reports = 0;
  std::uint64_t events_processed = 0;
  std::vector<TraceEntry> trace;
};

/// Uniform placement in the cell disc, keyed per UE.
inline Position place_ue(const ScenarioConfig& cfg, UeId id) {
  RngStream rng(cfg.seed, "placement", {raw(id)});
  const double r = cfg.cell.radius_m * std::sqrt(rng.uniform01());
  const double theta = 2.0 * std::numbers::pi * rng.uniform01();
  return Position{cfg.cell.gnb_pos.x + r * std::cos(theta), cfg.cell.gnb_pos.y + r * std::sin(theta),
                  0.0};
}

/// PDUs of every configured flow over the horizon, numbered in
/// (creation time, source, flow) order.
inline std::vector<Pdu> generate_pdus(const ScenarioConfig& cfg) {
  std::vector<Pdu> pdus;
  for (const auto& g : cfg.groups) {
    const FlowKey key{UeId{g.source}, FlowId{g.flow}};
    Duration phase{0};
    if (cfg.phase == PhaseMode::Random) {
      RngStream prng(cfg.seed, "traffic", {g.source, g.flow});
      phase = draw_phase(cfg.traffic, prng);
    }
    RngStream gaps(cfg.seed, "traffic-gaps", {g.source, g.flow});
    for (SimTime t : generate_arrivals(cfg.traffic, cfg.duration, phase, &gaps)) {
      pdus.push_back(Pdu{0, key, cfg.traffic.packet_bits, t});
    }
  }
  std::sort(pdus.begin(), pdus.end(), [](const Pdu& a, const Pdu& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.key < b.key;
  });
  for (std::size_t i = 0; i < pdus.size(); ++i) pdus[i].seq = i;
  return pdus;
}

class CellSimulation {
 public:
  CellSimulation(ScenarioConfig cfg, PathMode path) : cfg_(std::move(cfg)) {
    run_.path = path;
    run_.measurement = cfg_.measurement;
    for (std::uint32_t u = 0; u < cfg_.n_ues; ++u) cell_.add_ue(place_ue(cfg_, UeId{u}));
    for (const auto& g : cfg_.groups) {
      std::vector<UeId> rs;
      for (auto r : g.resolved_receivers(cfg_.n_ues)) rs.push_back(UeId{r});
      const FlowKey key{UeId{g.source}, FlowId{g.flow}};
      const GroupId gid = cell_.add_group(key.source, key.flow, std::move(rs));
      cell_.bearer(cell_.bearer_of(gid)).qos_marking = g.qos_marking;
      if (g.install_ft) ft_.install(ForwardingEntry{key, gid, cell_.bearer_of(gid)}, cell_);
      if (g.allowed) policies_.allowed_flows.insert(key);
    }
    policies_.prb_budget = cfg_.policies.prb_budget;
    policies_.prb_required = cfg_.policies.prb_required;
    for (const auto& p : generate_pdus(cfg_)) {
      PduRecord rec;
      rec.pdu = p;
      run_.pdus.push_back(rec);
    }
    state_.resize(run_.pdus.size());
  }

  void enable_trace() { queue_.enable_trace(); }

  const CellState& cell() const { return cell_; }
  const ForwardingTable& forwarding_table() const { return ft_; }
  const PolicySet& policies() const { return policies_; }

  /// Runs the scenario to completion. Every PDU generated before the horizon
  /// is followed until delivered or lost.
  PathRun run() && {
    for (std::size_t i = 0; i < cfg_.dynamic_events.size(); ++i) {
      const auto& ev = cfg_.dynamic_events[i];
      queue_.schedule(ev.at, ev.is_mobility() ? EventKind::MobilityChange : EventKind::PolicyChange,
                      DynRef{i});
    }
    for (std::size_t i = 0; i < run_.pdus.size(); ++i) {
      queue_.schedule(run_.pdus[i].pdu.created_at, EventKind::PacketArrival, PduRef{i});
    }
    queue_.schedule(SimTime{cfg_.duration}, EventKind::ScenarioEnd, std::monostate{});
    queue_.run([this](const Queue::Event& ev) { dispatch(ev); });

    check_copies();
    run_.ledger.finalize();
    run_.ledger.sort();
    run_.ues = cell_.ues();
    run_.events_processed = queue_.processed();
    run_.trace = queue_.trace();
    return std::move(run_);
  }

 private:
  struct PduRef {
    std::size_t pdu;
  };
  struct DynRef {
    std::size_t index;
  };
  struct BearerRef {
    BearerId bearer;
  };
  struct RepairRef {
    std::size_t pdu;
    UeId ue;
    bool success;
    bool final;
  };
  using Payload = std::variant<std::monostate, PduRef, DynRef, BearerRef, RepairRef>;
  using Queue = EventQueue<Payload>;

  struct PduState {
    UlSegment ul{};
    Duration gnb{0};
    std::optional<Duration> core;
    GroupId group{};
    PtmSchedule dl{};
    SimTime ptm_end{};
  };

  RngStream stream(std::string_view purpose, const Pdu& p) const {
    return RngStream(cfg_.seed, purpose,
                     {raw(p.key.source), raw(p.key.flow),
                      static_cast<std::uint64_t>(to_us(p.created_at))});
  }

  void dispatch(const Queue::Event& ev) {
    const SimTime now = ev.fire_at;
    switch (ev.kind) {
      case EventKind::PacketArrival: on_arrival(std::get<PduRef>(ev.payload).pdu, now); break;
      case EventKind::UlGrantReady: {
        const auto i = std::get<PduRef>(ev.payload).pdu;
        queue_.schedule(now + state_[i].ul.tx, EventKind::UlTxDone, PduRef{i});
        break;
      }
      case EventKind::UlTxDone: on_gnb_ingress(std::get<PduRef>(ev.payload).pdu, now); break;
      case EventKind::GnbProcDone: on_gnb_done(std::get<PduRef>(ev.payload).pdu, now); break;
      case EventKind::CorePathDone: {
        const auto i = std::get<PduRef>(ev.payload).pdu;
        enqueue(cell_.bearer_of(state_[i].group), i, now);
        break;
      }
      case EventKind::DlSlotBoundary: on_slot(std::get<BearerRef>(ev.payload).bearer, now); break;
      case EventKind::PtmTxDone: on_ptm_done(std::get<PduRef>(ev.payload).pdu, now); break;
      case EventKind::NakReport: ++run_.nak_reports; break;
      case EventKind::RepairTxDone: on_repair(std::get<RepairRef>(ev.payload), now); break;
      case EventKind::MobilityChange:
      case EventKind::PolicyChange:
        apply_dynamic_event(cfg_.dynamic_events[std::get<DynRef>(ev.payload).index], cell_,
                            policies_);
        break;
      case EventKind::ScenarioEnd: break;
    }
  }

  void on_arrival(std::size_t i, SimTime now) {
    const Pdu& p = run_.pdus[i].pdu;
    auto rng = stream("ul", p);
    state_[i].ul = ul_segment(p, cfg_.radio, rng);
    queue_.schedule(now + state_[i].ul.grant_wait, EventKind::UlGrantReady, PduRef{i});
  }

  void on_gnb_ingress(std::size_t i, SimTime now) {
    auto& rec = run_.pdus[i];
    auto& st = state_[i];
    rec.gnb_ingress = now;
    const RouteDecision d = route(rec.pdu, ft_, policies_, cell_, run_.path);
    rec.decision = d;
    run_.decisions.add(d);
    if (const auto* lb = std::get_if<LocalBreakout>(&d)) {
      st.group = lb->group;
    } else {
      // The core resolves the group from its own membership state.
      const auto g = cell_.group_of(rec.pdu.key);
      if (!g) throw InvariantViolation("flow without a group reached the gNB");
      st.group = *g;
    }
    auto grng = stream("gnb", rec.pdu);
    st.gnb = gnb_processing(cfg_.radio, grng);

    if (cfg_.measurement == Measurement::Analytic) {
      Duration shift{0};
      if (!is_local(d)) shift = draw_core(i);
      st.dl = schedule_ptm_unqueued(now + st.gnb, cfg_.radio);
      ++rec.ptm_transmissions;
      ++run_.ptm_transmissions;
      finish_ptm(i, st.dl.fire_at, shift);
      return;
    }
    queue_.schedule(now + st.gnb, EventKind::GnbProcDone, PduRef{i});
  }

  Duration draw_core(std::size_t i) {
    auto crng = stream("core", run_.pdus[i].pdu);
    const Duration c = core_segment(cfg_.core, crng);
    state_[i].core = c;
    ++run_.pdus[i].core_segments;
    ++run_.core_segments;
    return c;
  }

  void on_gnb_done(std::size_t i, SimTime now) {
    const auto& d = *run_.pdus[i].decision;
    if (const auto* lb = std::get_if<LocalBreakout>(&d)) {
      enqueue(lb->bearer, i, now);
    } else {
      queue_.schedule(now + draw_core(i), EventKind::CorePathDone, PduRef{i});
    }
  }

  void enqueue(BearerId b, std::size_t i, SimTime ready_at) {
    PtmBearer& bearer = cell_.bearer(b);
    bearer.pdcp_queue.push_back(QueuedPdu{i, ready_at});
    state_[i].dl = schedule_ptm(bearer, ready_at, cfg_.radio);
    queue_.schedule(state_[i].dl.start, EventKind::DlSlotBoundary, BearerRef{b});
  }

  void on_slot(BearerId b, SimTime now) {
    PtmBearer& bearer = cell_.bearer(b);
    if (bearer.pdcp_queue.empty()) throw InvariantViolation("PTM slot with an empty PDCP queue");
    const QueuedPdu head = bearer.pdcp_queue.front();
    bearer.pdcp_queue.pop_front();
    if (state_[head.pdu_index].dl.start != now) {
      throw InvariantViolation("PDCP queue head does not own this PTM slot");
    }
    ++run_.pdus[head.pdu_index].ptm_transmissions;
    ++run_.ptm_transmissions;
    queue_.schedule(state_[head.pdu_index].dl.fire_at, EventKind::PtmTxDone, PduRef{head.pdu_index});
  }

  void on_ptm_done(std::size_t i, SimTime now) { finish_ptm(i, now, Duration{0}); }

  /// Opens ledger rows for every receiver, draws PTM loss and plans repairs.
  /// @p shift is added to delivery times (analytic core-anchored runs).
  void finish_ptm(std::size_t i, SimTime ptm_end, Duration shift) {
    const Pdu& p = run_.pdus[i].pdu;
    auto& st = state_[i];
    st.ptm_end = ptm_end;
    const auto& group = cell_.group(st.group);
    auto& ledger = run_.ledger;
    const PathMode path = is_local(*run_.pdus[i].decision) ? PathMode::LocalBreakout
                                                           : PathMode::CoreAnchored;
    for (UeId r : group.receivers) {
      ledger.open(p, r, path);
      ledger.record_component(p.seq, r, Component::Rqt, st.ul.grant_wait);
      ledger.record_component(p.seq, r, Component::Ul, st.ul.tx);
      ledger.record_component(p.seq, r, Component::GnbProc, st.gnb);
      if (st.core) ledger.record_component(p.seq, r, Component::Core, *st.core);
      ledger.record_component(p.seq, r, Component::DlSchd, st.dl.dl_wait);
      ledger.record_component(p.seq, r, Component::Dl, st.dl.dl_tx);
    }

    auto lrng = stream("loss", p);
    const PtmOutcome out = ptm_deliver(group.receivers, cfg_.loss, lrng);
    for (UeId r : out.delivered) {
      ledger.record_component(p.seq, r, Component::Repair, Duration{0});
      ledger.close(p.seq, r, ptm_end + shift);
    }
    if (out.nak.empty()) return;

    const SimTime nak_at = ptm_end + cfg_.radio.nak_window;
    const RepairPlan plan = repair_unicast(out.nak, cfg_.radio, cfg_.loss, nak_at, lrng);
    if (cfg_.measurement == Measurement::Analytic) {
      ++run_.nak_reports;
      run_.repair_transmissions += plan.attempts.size();
      for (const auto& res : plan.results) {
        if (res.delivered_at) {
          ledger.record_component(p.seq, res.ue, Component::Repair, *res.delivered_at - ptm_end);
          ledger.close(p.seq, res.ue, *res.delivered_at + shift);
        } else {
          ledger.mark_lost(p.seq, res.ue);
        }
      }
      return;
    }
    queue_.schedule(nak_at, EventKind::NakReport, std::monostate{});
    for (const auto& a : plan.attempts) {
      const bool final = !a.success && a.attempt >= cfg_.radio.max_repair_attempts;
      queue_.schedule(a.end, EventKind::RepairTxDone, RepairRef{i, a.ue, a.success, final});
    }
    for (const auto& res : plan.results) {
      if (res.attempts == 0) ledger.mark_lost(p.seq, res.ue);
    }
  }

  void on_repair(const RepairRef& r, SimTime now) {
    ++run_.repair_transmissions;
    const Pdu& p = run_.pdus[r.pdu].pdu;
    if (r.success) {
      run_.ledger.record_component(p.seq, r.ue, Component::Repair, now - state_[r.pdu].ptm_end);
      run_.ledger.close(p.seq, r.ue, now);
    } else if (r.final) {
      run_.ledger.mark_lost(p.seq, r.ue);
    }
  }

  // One PTM transmission per PDU; one core segment exactly on the core path.
  void check_copies() const {
    for (const auto& rec : run_.pdus) {
      if (rec.ptm_transmissions != 1) {
        throw InvariantViolation("pdu " + std::to_string(rec.pdu.seq) + " had " +
                                 std::to_string(rec.ptm_transmissions) + " PTM transmissions");
      }
      const std::uint32_t want = (rec.decision && is_local(*rec.decision)) ? 0 : 1;
      if (rec.core_segments != want) {
        throw InvariantViolation("pdu " + std::to_string(rec.pdu.seq) + " traversed the core " +
                                 std::to_string(rec.core_segments) + " times");
      }
    }
  }

  ScenarioConfig cfg_;
  CellState cell_;
  ForwardingTable ft_;
  PolicySet policies_;
  Queue queue_;
  PathRun run_;
  std::vector<PduState> state_;
};

/// Convenience wrapper: builds and runs one path.
inline PathRun run_path(const ScenarioConfig& cfg, PathMode path, bool trace = false) {
  CellSimulation sim(cfg, path);
  if (trace) sim.enable_trace();
  return std::move(sim).run();
}

}  // namespace mbsim
