/**
 * @file report.hpp
 * @brief CSV and text output. Column layouts are a stable contract for
 *        plotting tools.
 */
#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mbsim/experiments.hpp"
#include "mbsim/metrics.hpp"
#include "mbsim/simulation.hpp"

namespace mbsim {

inline constexpr const char* kPacketCsvHeader =
    "pdu_seq,source,receiver,path,t_rqt_us,t_ul_us,t_gnb_us,t_core_us,t_dlschd_us,t_dl_us,"
    "t_repair_us,latency_us,met_deadline,lost";
inline constexpr const char* kSweepCsvHeader =
    "n_receivers,path,mean_us,p50_us,p95_us,p99_us,reliability";
inline constexpr const char* kCompareCsvHeader =
    "pdu_seq,source,flow,receiver,t_core_us,l_ca_us,l_lb_us,gap_us";

namespace detail {

// Fixed-format doubles so output bytes do not depend on stream state.
inline std::string fmt_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

/// Per-(pdu, receiver) rows. Paired runs are written one path after the other.
inline void write_packets_csv(std::ostream& os, const std::vector<PathRun>& runs, Duration deadline) {
  os << kPacketCsvHeader << '\n';
  for (const auto& run : runs) {
    for (const auto& e : run.ledger.entries()) {
      os << e.pdu_seq << ',' << raw(e.key.source) << ',' << raw(e.receiver) << ','
         << to_string(e.path);
      for (Component c : {Component::Rqt, Component::Ul, Component::GnbProc, Component::Core,
                          Component::DlSchd, Component::Dl, Component::Repair}) {
        os << ',' << e.get(c).count();
      }
      os << ',';
      if (e.delivered_at) os << e.latency().count();
      const bool met = e.delivered_at && e.latency() <= deadline;
      os << ',' << (met ? 1 : 0) << ',' << (e.lost ? 1 : 0) << '\n';
    }
  }
}

inline void write_ues_csv(std::ostream& os, const std::vector<Ue>& ues) {
  os << "ue,x_m,y_m,z_m\n";
  for (const auto& u : ues) {
    os << raw(u.id) << ',' << detail::fmt_double(u.position.x, 3) << ','
       << detail::fmt_double(u.position.y, 3) << ',' << detail::fmt_double(u.position.z, 3) << '\n';
  }
}

inline void write_compare_csv(std::ostream& os, const PairedResult& r) {
  os << kCompareCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << row.pdu_seq << ',' << raw(row.key.source) << ',' << raw(row.key.flow) << ','
       << raw(row.receiver) << ',' << row.t_core.count() << ',';
    if (row.l_ca) os << row.l_ca->count();
    os << ',';
    if (row.l_lb) os << row.l_lb->count();
    os << ',';
    if (auto g = row.gap()) os << g->count();
    os << '\n';
  }
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << kSweepCsvHeader << '\n';
  auto row = [&](std::uint32_t n, PathMode p, const PathSummary& s) {
    os << n << ',' << to_string(p) << ',' << detail::fmt_double(s.stats.mean_us, 3) << ','
       << s.stats.p50_us << ',' << s.stats.p95_us << ',' << s.stats.p99_us << ','
       << detail::fmt_double(s.reliability.achieved, 6) << '\n';
  };
  for (const auto& pt : points) {
    if (pt.ca) row(pt.n_receivers, PathMode::CoreAnchored, *pt.ca);
    if (pt.lb) row(pt.n_receivers, PathMode::LocalBreakout, *pt.lb);
  }
}

/// Human-readable run summary: decisions, latency, reliability per path.
inline void write_summary(std::ostream& os, const RunReport& report) {
  const auto& cfg = report.config;
  const auto view = view_of(cfg);
  os << "seed " << cfg.seed << ", mode " << to_string(cfg.mode) << ", measurement "
     << to_string(cfg.measurement) << (cfg.dl_only ? ", latency from gNB ingress" : "") << '\n';
  for (const auto& run : report.runs) {
    const auto stats = summarize(run.ledger, view);
    const auto rel = reliability(run.ledger, cfg.deadline, cfg.target, view);
    os << "[" << to_string(run.path) << "]\n";
    os << "  pdus " << run.pdus.size() << ", pairs " << run.ledger.size() << ", delivered "
       << run.ledger.delivered() << ", lost " << run.ledger.lost() << '\n';
    os << "  decisions: local_breakout " << run.decisions.local_breakout;
    for (RouteReason r : {RouteReason::NoFtEntry, RouteReason::NotAllowed,
                          RouteReason::ReceiversNotAttached, RouteReason::PrbExhausted,
                          RouteReason::ForcedCoreScenario}) {
      os << ", " << to_string(r) << ' ' << run.decisions.core(r);
    }
    os << '\n';
    os << "  ptm " << run.ptm_transmissions << ", core segments " << run.core_segments
       << ", nak reports " << run.nak_reports << ", repairs " << run.repair_transmissions << '\n';
    os << "  latency us: mean " << detail::fmt_double(stats.mean_us, 3) << ", p50 " << stats.p50_us
       << ", p95 " << stats.p95_us << ", p99 " << stats.p99_us << ", min " << stats.min_us
       << ", max " << stats.max_us << '\n';
    os << "  reliability: Pr[L <= " << cfg.deadline.count() << " us] = "
       << detail::fmt_double(rel.achieved, 6) << " (target " << detail::fmt_double(rel.target, 6)
       << ", " << (rel.met ? "met" : "not met") << (rel.degenerate ? ", degenerate" : "") << ")\n";
  }
}

}  // namespace mbsim
