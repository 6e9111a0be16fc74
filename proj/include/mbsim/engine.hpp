/**
 * @file engine.hpp
 * @brief Deterministic discrete-event core: virtual clock, event queue,
 *        slot arithmetic.
 *
 * Time is kept in integer microseconds so that latency components add up
 * exactly. Events with equal timestamps fire in insertion order.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mbsim {

/// Raised when an internal invariant is broken (a programming fault, not a
/// user input problem). The CLI maps this to exit code 2.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Duration = std::chrono::microseconds;

/// Virtual clock. Only its time_point type is used; there is no wall time.
struct SimClock {
  using rep = Duration::rep;
  using period = Duration::period;
  using duration = Duration;
  using time_point = std::chrono::time_point<SimClock, Duration>;
  static constexpr bool is_steady = true;
};

using SimTime = SimClock::time_point;

constexpr SimTime sim_time_us(std::int64_t us) { return SimTime{Duration{us}}; }
constexpr std::int64_t to_us(SimTime t) { return t.time_since_epoch().count(); }
constexpr std::int64_t to_us(Duration d) { return d.count(); }

/// Smallest multiple of @p slot_len that is >= @p t.
constexpr SimTime next_slot_boundary(SimTime t, Duration slot_len) {
  if (slot_len <= Duration::zero()) {
    throw InvariantViolation("next_slot_boundary: slot length must be positive");
  }
  if (t < SimTime{}) {
    throw InvariantViolation("next_slot_boundary: negative time");
  }
  const std::int64_t slot = slot_len.count();
  const std::int64_t us = to_us(t);
  return sim_time_us((us + slot - 1) / slot * slot);
}

enum class EventKind : std::uint8_t {
  PacketArrival,
  UlGrantReady,
  UlTxDone,
  GnbProcDone,
  CorePathDone,
  DlSlotBoundary,
  PtmTxDone,
  NakReport,
  RepairTxDone,
  MobilityChange,
  PolicyChange,
  ScenarioEnd,
};

constexpr std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::PacketArrival: return "PacketArrival";
    case EventKind::UlGrantReady: return "UlGrantReady";
    case EventKind::UlTxDone: return "UlTxDone";
    case EventKind::GnbProcDone: return "GnbProcDone";
    case EventKind::CorePathDone: return "CorePathDone";
    case EventKind::DlSlotBoundary: return "DlSlotBoundary";
    case EventKind::PtmTxDone: return "PtmTxDone";
    case EventKind::NakReport: return "NakReport";
    case EventKind::RepairTxDone: return "RepairTxDone";
    case EventKind::MobilityChange: return "MobilityChange";
    case EventKind::PolicyChange: return "PolicyChange";
    case EventKind::ScenarioEnd: return "ScenarioEnd";
  }
  return "?";
}

struct TraceEntry {
  SimTime at;
  std::uint64_t seq;
  EventKind kind;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/**
 * Time-ordered event queue with a virtual clock.
 *
 * @tparam Payload event-specific data carried to the handler.
 *
 * Ordering key is (fire_at, seq) where seq is a monotone insertion counter,
 * which makes same-timestamp dispatch FIFO. Scheduling before the current
 * clock throws InvariantViolation.
 */
template <class Payload>
class EventQueue {
 public:
  struct Event {
    SimTime fire_at;
    std::uint64_t seq;
    EventKind kind;
    Payload payload;
  };

  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t pending() const { return heap_.size(); }
  std::uint64_t processed() const { return processed_; }

  void enable_trace(bool on = true) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

  void schedule(SimTime fire_at, EventKind kind, Payload payload) {
    if (fire_at < now_) {
      throw InvariantViolation("schedule: event " + std::string(to_string(kind)) + " at " +
                               std::to_string(to_us(fire_at)) + " us is before clock " +
                               std::to_string(to_us(now_)) + " us");
    }
    heap_.push_back(Event{fire_at, next_seq_++, kind, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
  }

  /// Dispatches every event with fire_at <= end, then advances the clock to
  /// end. Returns the number of events dispatched.
  template <class Handler>
  std::size_t run_until(SimTime end, Handler&& handler) {
    std::size_t n = 0;
    while (!heap_.empty() && heap_.front().fire_at <= end) {
      dispatch_one(handler);
      ++n;
    }
    if (now_ < end) now_ = end;
    return n;
  }

  /// Dispatches until the queue drains. The clock stays at the last event.
  template <class Handler>
  std::size_t run(Handler&& handler) {
    std::size_t n = 0;
    while (!heap_.empty()) {
      dispatch_one(handler);
      ++n;
    }
    return n;
  }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  template <class Handler>
  void dispatch_one(Handler& handler) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.fire_at;
    ++processed_;
    if (tracing_) trace_.push_back(TraceEntry{ev.fire_at, ev.seq, ev.kind});
    handler(static_cast<const Event&>(ev));
  }

  std::vector<Event> heap_;
  SimTime now_{};
  std::uint64_t next_seq_ = 0;
  std::uint64_t processed_ = 0;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
};

}  // namespace mbsim
