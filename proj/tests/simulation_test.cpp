#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "mbsim/mbsim.hpp"
#include "scenario_helpers.hpp"

namespace mbsim {
namespace {

using testing::fixed_config;

std::string packets_csv(const ScenarioConfig& cfg) {
  std::ostringstream os;
  write_packets_csv(os, run_scenario(cfg).runs, cfg.deadline);
  return os.str();
}

TEST(Simulation, FixedTimingBreakoutLatency) {
  // 0 -> grant 250 -> ul 500 -> gNB 1000 = 1750, next slot 2000, PTM end 2500.
  auto cfg = fixed_config(3, Duration{1});
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  ASSERT_EQ(run.ledger.size(), 2u);
  for (const auto& e : run.ledger.entries()) {
    EXPECT_EQ(e.latency(), Duration{2500});
    EXPECT_EQ(e.get(Component::DlSchd), Duration{250});
  }
}

TEST(Simulation, FixedTimingAnchoredLatency) {
  // 1750 + core 7500 = 9250, next slot 9500, PTM end 10000.
  auto cfg = fixed_config(3, Duration{1});
  const auto run = run_path(cfg, PathMode::CoreAnchored);
  for (const auto& e : run.ledger.entries()) EXPECT_EQ(e.latency(), Duration{10000});
}

TEST(Simulation, LedgerIdentityWithLossAndRepair) {
  auto cfg = fixed_config(8, Duration{1'000'000});
  cfg.radio.ul_grant_delay = Sampler::uniform(Duration{0}, Duration{1000});
  cfg.radio.gnb_proc_delay = Sampler::uniform(Duration{1000}, Duration{2000});
  cfg.core.delay_sampler = Sampler::uniform(Duration{5000}, Duration{10000});
  cfg.phase = PhaseMode::Random;
  cfg.loss.per_receiver_loss_prob = 0.2;
  for (PathMode p : {PathMode::LocalBreakout, PathMode::CoreAnchored}) {
    for (Measurement m : {Measurement::Event, Measurement::Analytic}) {
      cfg.measurement = m;
      const auto run = run_path(cfg, p);
      ASSERT_GT(run.ledger.lost(), 0u);
      ASSERT_GT(run.repair_transmissions, 0u);
      EXPECT_EQ(run.ledger.delivered() + run.ledger.lost(), run.ledger.size());
      for (const auto& e : run.ledger.entries()) {
        if (!e.delivered_at) continue;
        ASSERT_EQ(e.latency(), e.component_sum());
        ASSERT_EQ(e.get(Component::Core) > Duration{0}, p == PathMode::CoreAnchored);
      }
    }
  }
}

TEST(Simulation, OnePtmCopyAndPathPurity) {
  auto cfg = fixed_config(6, Duration{500'000});
  for (PathMode p : {PathMode::LocalBreakout, PathMode::CoreAnchored}) {
    const auto run = run_path(cfg, p);
    EXPECT_EQ(run.ptm_transmissions, run.pdus.size());
    EXPECT_EQ(run.core_segments, p == PathMode::CoreAnchored ? run.pdus.size() : 0u);
    for (const auto& rec : run.pdus) {
      EXPECT_EQ(rec.ptm_transmissions, 1u);
      EXPECT_EQ(rec.core_segments, p == PathMode::CoreAnchored ? 1u : 0u);
    }
  }
}

TEST(Simulation, NoLossDeliversEachPduOnceToEveryReceiver) {
  auto cfg = fixed_config(6, Duration{500'000});
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  std::map<std::pair<std::uint64_t, std::uint32_t>, int> seen;
  for (const auto& e : run.ledger.entries()) {
    ASSERT_TRUE(e.delivered_at.has_value());
    ++seen[{e.pdu_seq, raw(e.receiver)}];
  }
  EXPECT_EQ(seen.size(), run.pdus.size() * 5);
  for (const auto& [k, n] : seen) EXPECT_EQ(n, 1);
}

TEST(Simulation, TraceIsReproducible) {
  auto cfg = ScenarioConfig{};
  cfg.duration = Duration{1'000'000};
  cfg.loss.per_receiver_loss_prob = 0.05;
  const auto a = run_path(cfg, PathMode::LocalBreakout, true);
  const auto b = run_path(cfg, PathMode::LocalBreakout, true);
  EXPECT_FALSE(a.trace.empty());
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(packets_csv(cfg), packets_csv(cfg));
}

TEST(Simulation, SeedChangesOnlyRandomParts) {
  auto cfg = fixed_config(5, Duration{1'000'000});
  auto other = cfg;
  other.seed = 99;
  const auto a = run_scenario(cfg), b = run_scenario(other);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].pdus.size(), b.runs[i].pdus.size());
    EXPECT_EQ(a.runs[i].ledger.size(), b.runs[i].ledger.size());
    EXPECT_EQ(a.runs[i].decisions, b.runs[i].decisions);
  }
}

TEST(Simulation, BreakoutLatencyIndependentOfGroupSize) {
  auto base = ScenarioConfig{};
  base.duration = Duration{2'000'000};
  std::optional<LatencyStats> first;
  for (std::uint32_t n : {1u, 10u, 75u, 150u}) {
    const auto run = run_path(sized_config(base, n), PathMode::LocalBreakout);
    const auto s = summarize(run.ledger);
    if (!first) first = s;
    EXPECT_EQ(s.mean_us, first->mean_us) << "n=" << n;
    EXPECT_EQ(s.p99_us, first->p99_us) << "n=" << n;
  }
}

TEST(Simulation, AnalyticGapEqualsCoreSegment) {
  auto cfg = ScenarioConfig{};
  cfg.duration = Duration{2'000'000};
  cfg.measurement = Measurement::Analytic;
  const auto r = paired_compare(cfg);
  ASSERT_GT(r.matched, 0u);
  for (const auto& row : r.rows) ASSERT_EQ(row.gap(), row.t_core);
}

TEST(Simulation, GenerousRepairBudgetLosesNothing) {
  auto cfg = fixed_config(11, Duration{1'000'000});
  cfg.loss.per_receiver_loss_prob = 0.3;
  cfg.radio.max_repair_attempts = 60;
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  EXPECT_EQ(run.ledger.lost(), 0u);
  EXPECT_GT(run.repair_transmissions, 0u);
}

TEST(Simulation, DetachedReceiverFallsBackThenReturns) {
  auto cfg = fixed_config(4, Duration{300'000});
  cfg.dynamic_events = {testing::at_us(50'000, Detach{UeId{2}}),
                        testing::at_us(150'000, Attach{UeId{2}})};
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  for (const auto& rec : run.pdus) {
    const auto t = *rec.gnb_ingress;
    const bool detached = t >= sim_time_us(50'000) && t < sim_time_us(150'000);
    EXPECT_EQ(!is_local(*rec.decision), detached);
  }
  EXPECT_EQ(run.ledger.delivered(), run.pdus.size() * 3);
}

TEST(Simulation, ZeroDurationIsDegenerate) {
  auto cfg = ScenarioConfig{};
  cfg.duration = Duration{0};
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  EXPECT_TRUE(run.pdus.empty());
  EXPECT_TRUE(reliability(run.ledger, cfg.deadline, cfg.target).degenerate);
}

TEST(Simulation, FromGnbViewDropsUplinkPart) {
  auto cfg = fixed_config(3, Duration{1});
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  for (const auto& e : run.ledger.entries()) {
    EXPECT_EQ(view_latency(e, LatencyView::FromGnb), Duration{2500 - 750});
  }
}

}  // namespace
}  // namespace mbsim
