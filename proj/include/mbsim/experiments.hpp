/**
 * @file experiments.hpp
 * @brief Scenario-level drivers: single/paired runs, per-packet path
 *        comparison, and group-size sweeps.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <optional>
#include <thread>
#include <vector>

#include "mbsim/config.hpp"
#include "mbsim/metrics.hpp"
#include "mbsim/simulation.hpp"

namespace mbsim {

struct RunReport {
  ScenarioConfig config;
  std::vector<PathRun> runs;  // paired mode: core-anchored first
};

inline std::vector<PathMode> paths_of(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::LocalBreakout: return {PathMode::LocalBreakout};
    case ScenarioMode::CoreAnchored: return {PathMode::CoreAnchored};
    case ScenarioMode::Paired: return {PathMode::CoreAnchored, PathMode::LocalBreakout};
  }
  return {};
}

inline RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport r{cfg, {}};
  for (PathMode p : paths_of(cfg.mode)) r.runs.push_back(run_path(cfg, p));
  return r;
}

inline LatencyView view_of(const ScenarioConfig& cfg) {
  return cfg.dl_only ? LatencyView::FromGnb : LatencyView::EndToEnd;
}

struct PairedRow {
  std::uint64_t pdu_seq;
  FlowKey key;
  UeId receiver;
  std::optional<Duration> l_ca;  // empty when lost
  std::optional<Duration> l_lb;
  Duration t_core;

  std::optional<Duration> gap() const {
    if (!l_ca || !l_lb) return std::nullopt;
    return *l_ca - *l_lb;
  }
};

struct PairedResult {
  PathRun ca;
  PathRun lb;
  std::vector<PairedRow> rows;
  double mean_gap_us = 0.0;
  std::size_t matched = 0;
};

/// Runs the scenario once forced through the core and once with local
/// breakout, same seed and same per-PDU radio draws, and matches the pairs.
inline PairedResult paired_compare(const ScenarioConfig& cfg) {
  PairedResult out{run_path(cfg, PathMode::CoreAnchored), run_path(cfg, PathMode::LocalBreakout),
                   {}, 0.0, 0};
  std::int64_t gap_sum = 0;
  for (const auto& ca : out.ca.ledger.entries()) {
    const LedgerEntry* lb = out.lb.ledger.find(ca.pdu_seq, ca.receiver);
    if (lb == nullptr) throw InvariantViolation("paired runs disagree on (pdu, receiver) pairs");
    PairedRow row{ca.pdu_seq, ca.key, ca.receiver, std::nullopt, std::nullopt, ca.get(Component::Core)};
    if (ca.delivered_at) row.l_ca = ca.latency();
    if (lb->delivered_at) row.l_lb = lb->latency();
    if (auto g = row.gap()) {
      gap_sum += g->count();
      ++out.matched;
    }
    out.rows.push_back(row);
  }
  if (out.matched != 0) out.mean_gap_us = static_cast<double>(gap_sum) / static_cast<double>(out.matched);
  return out;
}

struct PathSummary {
  LatencyStats stats;
  ReliabilityReport reliability;
};

struct SweepPoint {
  std::uint32_t n_receivers = 0;
  std::optional<PathSummary> ca;
  std::optional<PathSummary> lb;

  /// mean_ca - mean_lb, when both paths ran.
  std::optional<double> gap_us() const {
    if (!ca || !lb) return std::nullopt;
    return ca->stats.mean_us - lb->stats.mean_us;
  }
};

/// Base scenario reshaped to one group: UE 0 sources flow 0 to UEs 1..n.
inline ScenarioConfig sized_config(const ScenarioConfig& base, std::uint32_t n_receivers) {
  ScenarioConfig c = base;
  c.n_ues = n_receivers + 1;
  GroupConfig g = base.groups.empty() ? GroupConfig{} : base.groups.front();
  g.source = 0;
  g.flow = 0;
  g.receivers.clear();
  g.all_receivers = true;
  c.groups = {g};
  std::erase_if(c.dynamic_events, [&](const DynamicEvent& ev) {
    return std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Detach> || std::is_same_v<T, Attach>) {
            return raw(a.ue) >= c.n_ues;
          } else {
            return a.flow != FlowKey{UeId{0}, FlowId{0}};
          }
        },
        ev.action);
  });
  return c;
}

namespace detail {

struct PathSample {
  std::vector<std::int64_t> latencies;
  std::size_t pairs = 0;
  std::size_t within = 0;
};

inline PathSample sample_of(const PathRun& run, const ScenarioConfig& cfg) {
  PathSample s;
  const auto view = view_of(cfg);
  const auto rel = reliability(run.ledger, cfg.deadline, cfg.target, view);
  s.pairs = rel.pairs;
  s.within = rel.within_deadline;
  for (const auto& e : run.ledger.entries()) {
    if (e.delivered_at) s.latencies.push_back(view_latency(e, view).count());
  }
  return s;
}

inline PathSummary pooled(const ScenarioConfig& cfg, std::vector<PathSample>& parts) {
  std::vector<std::int64_t> all;
  ReliabilityReport rel;
  rel.deadline = cfg.deadline;
  rel.target = cfg.target;
  for (auto& p : parts) {
    all.insert(all.end(), p.latencies.begin(), p.latencies.end());
    rel.pairs += p.pairs;
    rel.within_deadline += p.within;
  }
  rel.degenerate = rel.pairs == 0;
  rel.achieved = rel.degenerate ? 1.0
                                : static_cast<double>(rel.within_deadline) /
                                      static_cast<double>(rel.pairs);
  rel.met = rel.achieved >= rel.target;
  return PathSummary{summarize(std::move(all)), rel};
}

}  // namespace detail

/**
 * One SweepPoint per group size, pooled over seeds base.seed .. base.seed +
 * n_seeds - 1. Runs fan out over @p jobs threads; results are reduced in
 * (size, seed) order so the output does not depend on scheduling.
 */
inline std::vector<SweepPoint> sweep(const ScenarioConfig& base,
                                     const std::vector<std::uint32_t>& sizes,
                                     std::uint32_t n_seeds, unsigned jobs = 0) {
  if (sizes.empty()) throw std::invalid_argument("sweep: no group sizes");
  if (n_seeds == 0) throw std::invalid_argument("sweep: need at least one seed");
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto paths = paths_of(base.mode);

  struct Task {
    std::size_t size_idx;
    std::uint32_t seed_idx;
    PathMode path;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < sizes.size(); ++s)
    for (std::uint32_t k = 0; k < n_seeds; ++k)
      for (PathMode p : paths) tasks.push_back({s, k, p});

  std::vector<detail::PathSample> samples(tasks.size());
  auto work = [&](std::size_t t) {
    ScenarioConfig c = sized_config(base, sizes[tasks[t].size_idx]);
    c.seed = base.seed + tasks[t].seed_idx;
    samples[t] = detail::sample_of(run_path(c, tasks[t].path), c);
  };
  for (std::size_t begin = 0; begin < tasks.size(); begin += jobs) {
    std::vector<std::future<void>> batch;
    const std::size_t end = std::min(tasks.size(), begin + jobs);
    for (std::size_t t = begin; t < end; ++t) batch.push_back(std::async(std::launch::async, work, t));
    for (auto& f : batch) f.get();
  }

  std::vector<SweepPoint> out;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    SweepPoint pt;
    pt.n_receivers = sizes[s];
    for (PathMode p : paths) {
      std::vector<detail::PathSample> parts;
      for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].size_idx == s && tasks[t].path == p) parts.push_back(std::move(samples[t]));
      }
      auto summary = detail::pooled(base, parts);
      (p == PathMode::CoreAnchored ? pt.ca : pt.lb) = std::move(summary);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace mbsim
