/**
 * @file metrics.hpp
 * @brief Per-(PDU, receiver) latency ledger, reliability against a deadline,
 *        and latency summaries.
 *
 * The ledger enforces the decomposition identity
 *   delivered_at - created_at = t_rqt + t_ul + t_gnb_proc + t_core
 *                              + t_dl_schd + t_dl + t_repair
 * exactly in integer microseconds, with t_core absent on the local path.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mbsim/breakout.hpp"
#include "mbsim/domain.hpp"
#include "mbsim/engine.hpp"

namespace mbsim {

enum class Component : std::uint8_t { Rqt, Ul, GnbProc, Core, DlSchd, Dl, Repair };
inline constexpr std::size_t kComponentCount = 7;

constexpr std::string_view to_string(Component c) {
  switch (c) {
    case Component::Rqt: return "t_rqt";
    case Component::Ul: return "t_ul";
    case Component::GnbProc: return "t_gnb_proc";
    case Component::Core: return "t_core";
    case Component::DlSchd: return "t_dl_schd";
    case Component::Dl: return "t_dl";
    case Component::Repair: return "t_repair";
  }
  return "?";
}

struct LedgerEntry {
  static constexpr std::int64_t kUnset = -1;

  std::uint64_t pdu_seq = 0;
  FlowKey key{};
  UeId receiver{};
  PathMode path = PathMode::LocalBreakout;
  SimTime created_at{};
  std::array<std::int64_t, kComponentCount> components{kUnset, kUnset, kUnset, kUnset,
                                                       kUnset, kUnset, kUnset};
  std::optional<SimTime> delivered_at;
  bool lost = false;

  bool has(Component c) const { return components[static_cast<std::size_t>(c)] != kUnset; }
  /// Recorded value, zero when never recorded.
  Duration get(Component c) const {
    const auto v = components[static_cast<std::size_t>(c)];
    return Duration{v == kUnset ? 0 : v};
  }
  Duration component_sum() const {
    Duration s{0};
    for (std::size_t i = 0; i < kComponentCount; ++i) s += get(static_cast<Component>(i));
    return s;
  }
  bool closed() const { return delivered_at.has_value() || lost; }
  /// End-to-end latency; only meaningful when delivered.
  Duration latency() const { return *delivered_at - created_at; }
};

/// Which latency an aggregate reports: MAC ingress at the source, or from
/// gNB ingress (uplink terms removed).
enum class LatencyView : std::uint8_t { EndToEnd, FromGnb };

inline Duration view_latency(const LedgerEntry& e, LatencyView v) {
  Duration l = e.latency();
  if (v == LatencyView::FromGnb) l -= e.get(Component::Rqt) + e.get(Component::Ul);
  return l;
}

class LatencyLedger {
 public:
  /// Opens the record for one (pdu, receiver) pair.
  void open(const Pdu& pdu, UeId receiver, PathMode path) {
    const auto k = index_key(pdu.seq, receiver);
    if (index_.count(k) != 0) {
      throw InvariantViolation("ledger: pair (" + std::to_string(pdu.seq) + ", " +
                               std::to_string(raw(receiver)) + ") opened twice");
    }
    LedgerEntry e;
    e.pdu_seq = pdu.seq;
    e.key = pdu.key;
    e.receiver = receiver;
    e.path = path;
    e.created_at = pdu.created_at;
    index_.emplace(k, entries_.size());
    entries_.push_back(e);
  }

  void record_component(std::uint64_t pdu_seq, UeId receiver, Component c, Duration value) {
    LedgerEntry& e = entry(pdu_seq, receiver);
    if (e.closed()) fault(e, "record after close");
    if (value < Duration::zero()) fault(e, "negative " + std::string(to_string(c)));
    if (c == Component::Core && e.path == PathMode::LocalBreakout) {
      fault(e, "core segment recorded on a local-breakout packet");
    }
    auto& slot = e.components[static_cast<std::size_t>(c)];
    if (slot != LedgerEntry::kUnset) fault(e, std::string(to_string(c)) + " recorded twice");
    slot = value.count();
  }

  /// Closes a delivered pair and checks the decomposition identity.
  void close(std::uint64_t pdu_seq, UeId receiver, SimTime delivered_at) {
    LedgerEntry& e = entry(pdu_seq, receiver);
    if (e.closed()) fault(e, "closed twice");
    for (Component c : {Component::Rqt, Component::Ul, Component::GnbProc, Component::DlSchd,
                        Component::Dl}) {
      if (!e.has(c)) fault(e, std::string(to_string(c)) + " missing at close");
    }
    if (e.path == PathMode::CoreAnchored && !e.has(Component::Core)) {
      fault(e, "core-anchored packet closed without a core segment");
    }
    const Duration latency = delivered_at - e.created_at;
    if (latency != e.component_sum()) {
      fault(e, "component sum " + std::to_string(e.component_sum().count()) +
                   " us != end-to-end latency " + std::to_string(latency.count()) + " us");
    }
    e.delivered_at = delivered_at;
    ++delivered_;
  }

  /// Closes a pair whose receiver never got the PDU.
  void mark_lost(std::uint64_t pdu_seq, UeId receiver) {
    LedgerEntry& e = entry(pdu_seq, receiver);
    if (e.closed()) fault(e, "marked lost after close");
    e.lost = true;
    ++lost_;
  }

  /// Asserts that every opened pair is closed. Aggregates require this.
  void finalize() {
    for (const auto& e : entries_) {
      if (!e.closed()) fault(e, "still open at end of run");
    }
    finalized_ = true;
  }

  bool finalized() const { return finalized_; }
  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t delivered() const { return delivered_; }
  std::size_t lost() const { return lost_; }

  const LedgerEntry* find(std::uint64_t pdu_seq, UeId receiver) const {
    auto it = index_.find(index_key(pdu_seq, receiver));
    return it == index_.end() ? nullptr : &entries_[it->second];
  }

  /// Orders entries by (pdu_seq, receiver) for stable output.
  void sort() {
    std::sort(entries_.begin(), entries_.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
      return a.pdu_seq != b.pdu_seq ? a.pdu_seq < b.pdu_seq : a.receiver < b.receiver;
    });
    index_.clear();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      index_.emplace(index_key(entries_[i].pdu_seq, entries_[i].receiver), i);
    }
  }

 private:
  static std::uint64_t index_key(std::uint64_t seq, UeId r) { return (seq << 24) ^ raw(r); }

  LedgerEntry& entry(std::uint64_t pdu_seq, UeId receiver) {
    auto it = index_.find(index_key(pdu_seq, receiver));
    if (it == index_.end()) {
      throw InvariantViolation("ledger: pair (" + std::to_string(pdu_seq) + ", " +
                               std::to_string(raw(receiver)) + ") was never opened");
    }
    return entries_[it->second];
  }

  [[noreturn]] static void fault(const LedgerEntry& e, const std::string& what) {
    throw InvariantViolation("ledger: pdu " + std::to_string(e.pdu_seq) + " receiver " +
                             std::to_string(raw(e.receiver)) + ": " + what);
  }

  std::vector<LedgerEntry> entries_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
  std::size_t delivered_ = 0;
  std::size_t lost_ = 0;
  bool finalized_ = false;
};

struct ReliabilityReport {
  Duration deadline{5000};
  double target = 0.99999;
  double achieved = 1.0;
  bool met = true;
  bool degenerate = false;  // no pairs: achieved reported as 1.0
  std::size_t pairs = 0;
  std::size_t within_deadline = 0;
};

/// Pr[L <= D] over every generated (pdu, receiver) pair of the given ledger
/// entries. Lost pairs count as failures; repaired pairs use their actual
/// delivery time.
template <class Pred>
ReliabilityReport reliability_if(const LatencyLedger& ledger, Duration deadline, double target,
                                 Pred&& include, LatencyView view = LatencyView::EndToEnd) {
  if (!ledger.finalized()) throw InvariantViolation("reliability: ledger not finalized");
  ReliabilityReport r;
  r.deadline = deadline;
  r.target = target;
  for (const auto& e : ledger.entries()) {
    if (!include(e)) continue;
    ++r.pairs;
    if (!e.lost && view_latency(e, view) <= deadline) ++r.within_deadline;
  }
  if (r.pairs == 0) {
    r.degenerate = true;
    r.achieved = 1.0;
  } else {
    r.achieved = static_cast<double>(r.within_deadline) / static_cast<double>(r.pairs);
  }
  r.met = r.achieved >= target;
  return r;
}

inline ReliabilityReport reliability(const LatencyLedger& ledger, Duration deadline, double target,
                                     LatencyView view = LatencyView::EndToEnd) {
  return reliability_if(
      ledger, deadline, target, [](const LedgerEntry&) { return true; }, view);
}

struct LatencyStats {
  std::size_t count = 0;
  std::int64_t sum_us = 0;
  double mean_us = 0.0;
  std::int64_t min_us = 0;
  std::int64_t p50_us = 0;
  std::int64_t p95_us = 0;
  std::int64_t p99_us = 0;
  std::int64_t max_us = 0;
};

/// Nearest-rank percentile of a sorted sample.
inline std::int64_t percentile_sorted(const std::vector<std::int64_t>& sorted, double q) {
  if (sorted.empty()) return 0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

inline LatencyStats summarize(std::vector<std::int64_t> latencies_us) {
  LatencyStats s;
  s.count = latencies_us.size();
  if (latencies_us.empty()) return s;
  std::sort(latencies_us.begin(), latencies_us.end());
  for (auto v : latencies_us) s.sum_us += v;
  // Ratio of two exact integers: identical sums and counts scaled by the
  // same factor give the same double.
  s.mean_us = static_cast<double>(s.sum_us) / static_cast<double>(s.count);
  s.min_us = latencies_us.front();
  s.max_us = latencies_us.back();
  s.p50_us = percentile_sorted(latencies_us, 0.50);
  s.p95_us = percentile_sorted(latencies_us, 0.95);
  s.p99_us = percentile_sorted(latencies_us, 0.99);
  return s;
}

/// Latency summary over delivered pairs of a ledger.
inline LatencyStats summarize(const LatencyLedger& ledger,
                              LatencyView view = LatencyView::EndToEnd) {
  std::vector<std::int64_t> v;
  v.reserve(ledger.delivered());
  for (const auto& e : ledger.entries()) {
    if (e.delivered_at) v.push_back(view_latency(e, view).count());
  }
  return summarize(std::move(v));
}

}  // namespace mbsim
