#include <gtest/gtest.h>

#include "mbsim/breakout.hpp"
#include "scenario_helpers.hpp"

namespace mbsim {
namespace {

const FlowKey kFlow{UeId{0}, FlowId{0}};

struct Cell {
  CellState cell;
  ForwardingTable ft;
  PolicySet policies;
  GroupId g{};

  Cell(bool ft_entry, bool allowed, bool attached, bool prb_ok) {
    for (int i = 0; i < 4; ++i) cell.add_ue({});
    g = cell.add_group(UeId{0}, FlowId{0}, {UeId{1}, UeId{2}, UeId{3}});
    if (ft_entry) ft.install({kFlow, g, cell.bearer_of(g)}, cell);
    if (allowed) policies.allowed_flows.insert(kFlow);
    cell.ue(UeId{2}).attached = attached;
    policies.prb_budget = 10;
    policies.prb_required = prb_ok ? 10 : 11;
  }
};

// Reference decision written out as a plain lookup over the four inputs.
RouteDecision expected(bool ft_entry, bool allowed, bool attached, bool prb_ok, PathMode mode,
                       GroupId g, BearerId b) {
  if (mode == PathMode::CoreAnchored) return SendToCore{RouteReason::ForcedCoreScenario};
  if (!ft_entry) return SendToCore{RouteReason::NoFtEntry};
  if (!allowed) return SendToCore{RouteReason::NotAllowed};
  if (!attached) return SendToCore{RouteReason::ReceiversNotAttached};
  if (!prb_ok) return SendToCore{RouteReason::PrbExhausted};
  return LocalBreakout{g, b};
}

TEST(Route, TruthTableIsTotal) {
  int cases = 0;
  const Pdu pdu{0, kFlow, 1002, sim_time_us(0)};
  for (int bits = 0; bits < 16; ++bits) {
    const bool ft = bits & 1, allowed = bits & 2, attached = bits & 4, prb = bits & 8;
    Cell c(ft, allowed, attached, prb);
    const auto want = expected(ft, allowed, attached, prb, PathMode::LocalBreakout, c.g,
                               c.cell.bearer_of(c.g));
    EXPECT_EQ(route(pdu, c.ft, c.policies, c.cell, PathMode::LocalBreakout), want) << "case " << bits;
    ++cases;
  }
  Cell c(true, true, true, true);
  EXPECT_EQ(route(pdu, c.ft, c.policies, c.cell, PathMode::CoreAnchored),
            RouteDecision{SendToCore{RouteReason::ForcedCoreScenario}});
  ++cases;
  EXPECT_EQ(cases, 17);
}

TEST(Route, Examples) {
  const Pdu pdu{0, kFlow, 1002, sim_time_us(0)};
  Cell all(true, true, true, true);
  EXPECT_TRUE(is_local(route(pdu, all.ft, all.policies, all.cell, PathMode::LocalBreakout)));
  Cell no_ft(false, true, true, true);
  EXPECT_EQ(route(pdu, no_ft.ft, no_ft.policies, no_ft.cell, PathMode::LocalBreakout),
            RouteDecision{SendToCore{RouteReason::NoFtEntry}});
  Cell detached(true, true, false, true);
  EXPECT_EQ(route(pdu, detached.ft, detached.policies, detached.cell, PathMode::LocalBreakout),
            RouteDecision{SendToCore{RouteReason::ReceiversNotAttached}});
}

TEST(DynamicEvents, DetachAttachRevokeGrant) {
  Cell c(true, true, true, true);
  const Pdu pdu{0, kFlow, 1002, sim_time_us(0)};
  apply_dynamic_event(testing::at_us(0, Detach{UeId{1}}), c.cell, c.policies);
  EXPECT_FALSE(is_local(route(pdu, c.ft, c.policies, c.cell, PathMode::LocalBreakout)));
  apply_dynamic_event(testing::at_us(0, Attach{UeId{1}}), c.cell, c.policies);
  EXPECT_TRUE(is_local(route(pdu, c.ft, c.policies, c.cell, PathMode::LocalBreakout)));
  apply_dynamic_event(testing::at_us(0, Revoke{kFlow}), c.cell, c.policies);
  EXPECT_EQ(route(pdu, c.ft, c.policies, c.cell, PathMode::LocalBreakout),
            RouteDecision{SendToCore{RouteReason::NotAllowed}});
  apply_dynamic_event(testing::at_us(0, Grant{kFlow}), c.cell, c.policies);
  EXPECT_TRUE(is_local(route(pdu, c.ft, c.policies, c.cell, PathMode::LocalBreakout)));
  EXPECT_THROW(apply_dynamic_event(testing::at_us(0, Detach{UeId{40}}), c.cell, c.policies),
               DomainError);
}

// Revoking the flow halfway through an ON burst: earlier PDUs break out,
// later ones go through the core, and every receiver gets each PDU once.
TEST(DynamicEvents, RevokeMidBurst) {
  auto cfg = testing::fixed_config(4, Duration{10'000});
  cfg.mode = ScenarioMode::LocalBreakout;
  cfg.dynamic_events = {testing::at_us(5000, Revoke{kFlow})};
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  ASSERT_EQ(run.pdus.size(), 10u);
  for (const auto& rec : run.pdus) {
    const bool before = *rec.gnb_ingress < sim_time_us(5000);
    EXPECT_EQ(is_local(*rec.decision), before) << "pdu " << rec.pdu.seq;
    if (!before) {
      EXPECT_EQ(*rec.decision, RouteDecision{SendToCore{RouteReason::NotAllowed}});
    }
  }
  EXPECT_GT(run.decisions.local_breakout, 0u);
  EXPECT_GT(run.decisions.core(RouteReason::NotAllowed), 0u);
  EXPECT_EQ(run.ledger.size(), 30u);
  EXPECT_EQ(run.ledger.delivered(), 30u);
}

TEST(DynamicEvents, MissingFtEntryFallsBackToCore) {
  auto cfg = testing::fixed_config(3, Duration{10'000});
  cfg.groups.front().install_ft = false;
  const auto run = run_path(cfg, PathMode::LocalBreakout);
  EXPECT_EQ(run.decisions.core(RouteReason::NoFtEntry), run.pdus.size());
  EXPECT_EQ(run.core_segments, run.pdus.size());
  EXPECT_EQ(run.ledger.delivered(), run.ledger.size());
}

}  // namespace
}  // namespace mbsim
