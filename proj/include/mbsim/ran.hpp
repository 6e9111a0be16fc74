/**
 * @file ran.hpp
 * @brief Radio-segment timing: uplink access and transmission, gNB
 *        processing, PTM downlink scheduling, loss, NAK-driven unicast repair.
 *
 * The PHY is abstracted to slot-granular transmission times. Loss is an
 * independent Bernoulli draw per receiver and transmission attempt.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"
#include "mbsim/rng.hpp"

namespace mbsim {

enum class UlGrantMode : std::uint8_t { ConfiguredGrant, RequestBased };

constexpr std::string_view to_string(UlGrantMode m) {
  return m == UlGrantMode::ConfiguredGrant ? "configured_grant" : "request_based";
}

struct RadioTiming {
  Duration slot_len{500};
  UlGrantMode ul_grant_mode = UlGrantMode::RequestBased;
  Sampler ul_grant_delay = Sampler::uniform(Duration{250}, Duration{1000});
  Sampler gnb_proc_delay = Sampler::uniform(Duration{1000}, Duration{2000});
  std::int64_t dl_tx_slots = 1;
  std::int64_t ul_tx_slots = 1;
  Duration nak_window{500};
  Duration repair_proc_delay{0};
  int max_repair_attempts = 3;

  Duration ul_tx() const { return ul_tx_slots * slot_len; }
  Duration dl_tx() const { return dl_tx_slots * slot_len; }
};

struct LossModel {
  double per_receiver_loss_prob = 0.0;
};

struct UlSegment {
  Duration grant_wait;  // T_rqt
  Duration tx;          // T_UL
};

/**
 * Uplink access wait and transmission time of one PDU.
 *
 * RequestBased: the wait is a full draw from ul_grant_delay.
 * ConfiguredGrant: the UE waits for the next configured occasion (every
 * slot boundary), capped by the draw.
 */
inline UlSegment ul_segment(const Pdu& pdu, const RadioTiming& timing, RngStream& rng) {
  const Duration draw = timing.ul_grant_delay.sample(rng);
  Duration wait = draw;
  if (timing.ul_grant_mode == UlGrantMode::ConfiguredGrant) {
    const Duration align = next_slot_boundary(pdu.created_at, timing.slot_len) - pdu.created_at;
    wait = std::min(align, draw);
  }
  return UlSegment{wait, timing.ul_tx()};
}

inline Duration gnb_processing(const RadioTiming& timing, RngStream& rng) {
  return timing.gnb_proc_delay.sample(rng);
}

struct PtmSchedule {
  Duration dl_wait;  // T_DL_schd
  Duration dl_tx;    // T_DL
  SimTime start;
  SimTime fire_at;  // end of the PTM transmission
};

/// Reserves the next eligible slot on @p bearer for a PDU that became ready
/// at @p ready_at. Transmissions on one bearer are serialized.
inline PtmSchedule schedule_ptm(PtmBearer& bearer, SimTime ready_at, const RadioTiming& timing) {
  if (bearer.pdcp_queue.empty()) {
    throw InvariantViolation("schedule_ptm: bearer " + std::to_string(raw(bearer.id)) +
                             " has an empty PDCP queue");
  }
  const SimTime start = next_slot_boundary(std::max(ready_at, bearer.next_free), timing.slot_len);
  bearer.next_free = start + timing.dl_tx();
  return PtmSchedule{start - ready_at, timing.dl_tx(), start, start + timing.dl_tx()};
}

/// Schedule ignoring bearer occupancy (analytic measurement).
inline PtmSchedule schedule_ptm_unqueued(SimTime ready_at, const RadioTiming& timing) {
  const SimTime start = next_slot_boundary(ready_at, timing.slot_len);
  return PtmSchedule{start - ready_at, timing.dl_tx(), start, start + timing.dl_tx()};
}

struct PtmOutcome {
  std::vector<UeId> delivered;
  std::vector<UeId> nak;
};

/// One PTM transmission reaching every receiver; each receiver is lost
/// independently with the configured probability. Draws follow receiver order.
inline PtmOutcome ptm_deliver(std::span<const UeId> receivers, const LossModel& loss,
                              RngStream& rng) {
  PtmOutcome out;
  out.delivered.reserve(receivers.size());
  for (UeId r : receivers) {
    (rng.bernoulli(loss.per_receiver_loss_prob) ? out.nak : out.delivered).push_back(r);
  }
  return out;
}

struct RepairAttempt {
  UeId ue;
  int attempt;  // 1-based
  SimTime start;
  SimTime end;
  bool success;
};

struct RepairResult {
  UeId ue;
  int attempts;
  std::optional<SimTime> delivered_at;  // empty: lost after all attempts
};

struct RepairPlan {
  std::vector<RepairAttempt> attempts;  // in transmission order
  std::vector<RepairResult> results;    // ascending UeId
};

/**
 * Selective unicast repair for the receivers that NAK'd a PTM transmission.
 *
 * Retransmissions are slot-serialized starting at the first boundary at or
 * after at + repair_proc_delay, first attempts in ascending UeId order. A
 * failed attempt re-queues the receiver at the back until
 * max_repair_attempts is used up.
 */
inline RepairPlan repair_unicast(std::span<const UeId> nak_set, const RadioTiming& timing,
                                 const LossModel& loss, SimTime at, RngStream& rng) {
  RepairPlan plan;
  std::vector<UeId> order(nak_set.begin(), nak_set.end());
  std::sort(order.begin(), order.end());

  struct Pending {
    UeId ue;
    int attempts;
  };
  std::vector<RepairResult> results;
  if (timing.max_repair_attempts <= 0) {
    for (UeId u : order) plan.results.push_back(RepairResult{u, 0, std::nullopt});
    return plan;
  }
  std::deque<Pending> queue;
  for (UeId u : order) queue.push_back({u, 0});

  SimTime cursor = next_slot_boundary(at + timing.repair_proc_delay, timing.slot_len);
  while (!queue.empty()) {
    Pending p = queue.front();
    queue.pop_front();
    ++p.attempts;
    const SimTime end = cursor + timing.dl_tx();
    const bool ok = !rng.bernoulli(loss.per_receiver_loss_prob);
    plan.attempts.push_back(RepairAttempt{p.ue, p.attempts, cursor, end, ok});
    cursor = end;
    if (ok) {
      results.push_back(RepairResult{p.ue, p.attempts, end});
    } else if (p.attempts < timing.max_repair_attempts) {
      queue.push_back(p);
    } else {
      results.push_back(RepairResult{p.ue, p.attempts, std::nullopt});
    }
  }
  std::sort(results.begin(), results.end(),
            [](const RepairResult& a, const RepairResult& b) { return a.ue < b.ue; });
  plan.results = std::move(results);
  return plan;
}

}  // namespace mbsim
