#include <gtest/gtest.h>

#include "mbsim/metrics.hpp"

namespace mbsim {
namespace {

const Pdu kPdu{1, {UeId{0}, FlowId{0}}, 1002, sim_time_us(1000)};
const UeId kRx{2};

void record_base(LatencyLedger& l, std::int64_t each = 100) {
  for (Component c : {Component::Rqt, Component::Ul, Component::GnbProc, Component::DlSchd,
                      Component::Dl, Component::Repair}) {
    l.record_component(kPdu.seq, kRx, c, Duration{each});
  }
}

TEST(Ledger, SumIdentityHoldsOnClose) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::CoreAnchored);
  record_base(l);
  l.record_component(kPdu.seq, kRx, Component::Core, Duration{7500});
  l.close(kPdu.seq, kRx, sim_time_us(1000 + 600 + 7500));
  const auto* e = l.find(kPdu.seq, kRx);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->latency(), Duration{8100});
  EXPECT_EQ(e->component_sum(), e->latency());
}

TEST(Ledger, SumMismatchIsAFault) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::LocalBreakout);
  record_base(l);
  EXPECT_THROW(l.close(kPdu.seq, kRx, sim_time_us(1000 + 601)), InvariantViolation);
}

TEST(Ledger, CoreOnBreakoutPacketIsAFault) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::LocalBreakout);
  EXPECT_THROW(l.record_component(kPdu.seq, kRx, Component::Core, Duration{1}), InvariantViolation);
}

TEST(Ledger, DoubleAndNegativeRecordsAreFaults) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::LocalBreakout);
  l.record_component(kPdu.seq, kRx, Component::Ul, Duration{500});
  EXPECT_THROW(l.record_component(kPdu.seq, kRx, Component::Ul, Duration{500}), InvariantViolation);
  EXPECT_THROW(l.record_component(kPdu.seq, kRx, Component::Dl, Duration{-1}), InvariantViolation);
  EXPECT_THROW(l.open(kPdu, kRx, PathMode::LocalBreakout), InvariantViolation);
}

TEST(Ledger, AnchoredPacketNeedsCoreSegment) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::CoreAnchored);
  record_base(l);
  EXPECT_THROW(l.close(kPdu.seq, kRx, sim_time_us(1600)), InvariantViolation);
}

TEST(Ledger, OpenPairAtFinalizeIsAFault) {
  LatencyLedger l;
  l.open(kPdu, kRx, PathMode::LocalBreakout);
  EXPECT_THROW(l.finalize(), InvariantViolation);
  EXPECT_THROW(reliability(l, Duration{5000}, 0.99), InvariantViolation);
}

/// Ledger of delivered pairs with the given latencies (ms) plus @p lost
/// undelivered pairs.
LatencyLedger ledger_of(const std::vector<std::int64_t>& latencies_ms, int lost = 0) {
  LatencyLedger l;
  std::uint64_t seq = 0;
  for (auto ms : latencies_ms) {
    const Pdu p{seq, {}, 1002, sim_time_us(0)};
    l.open(p, kRx, PathMode::LocalBreakout);
    for (Component c : {Component::Rqt, Component::Ul, Component::GnbProc, Component::DlSchd,
                        Component::Repair}) {
      l.record_component(seq, kRx, c, Duration{0});
    }
    l.record_component(seq, kRx, Component::Dl, Duration{ms * 1000});
    l.close(seq, kRx, sim_time_us(ms * 1000));
    ++seq;
  }
  for (int i = 0; i < lost; ++i) {
    l.open(Pdu{seq, {}, 1002, sim_time_us(0)}, kRx, PathMode::LocalBreakout);
    l.mark_lost(seq++, kRx);
  }
  l.finalize();
  return l;
}

TEST(Reliability, AllWithinDeadline) {
  const auto r = reliability(ledger_of({1, 2, 3}), Duration{5000}, 0.99999);
  EXPECT_EQ(r.achieved, 1.0);
  EXPECT_TRUE(r.met);
}

TEST(Reliability, HalfWithinDeadline) {
  const auto r = reliability(ledger_of({4, 6}), Duration{5000}, 0.99999);
  EXPECT_EQ(r.achieved, 0.5);
  EXPECT_FALSE(r.met);
}

TEST(Reliability, DeadlineIsInclusive) {
  EXPECT_EQ(reliability(ledger_of({5}), Duration{5000}, 1.0).achieved, 1.0);
}

TEST(Reliability, LostPairsCountAsFailures) {
  const auto r = reliability(ledger_of({1, 1, 1}, 1), Duration{5000}, 0.5);
  EXPECT_EQ(r.pairs, 4u);
  EXPECT_EQ(r.achieved, 0.75);
}

TEST(Reliability, EmptyLedgerIsDegenerate) {
  const auto r = reliability(ledger_of({}), Duration{5000}, 0.99999);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.achieved, 1.0);
}

TEST(Stats, NearestRankPercentiles) {
  std::vector<std::int64_t> v;
  for (std::int64_t i = 100; i >= 1; --i) v.push_back(i);
  const auto s = summarize(v);
  EXPECT_EQ(s.count, 100u);
  EXPECT_EQ(s.p50_us, 50);
  EXPECT_EQ(s.p95_us, 95);
  EXPECT_EQ(s.p99_us, 99);
  EXPECT_EQ(s.min_us, 1);
  EXPECT_EQ(s.max_us, 100);
  EXPECT_DOUBLE_EQ(s.mean_us, 50.5);
  EXPECT_EQ(summarize(std::vector<std::int64_t>{7}).p99_us, 7);
}

TEST(Stats, MeanIsScaleInvariantBitForBit) {
  const std::vector<std::int64_t> base{1817, 1830, 1840, 1799, 1801, 1833, 1802};
  std::vector<std::int64_t> big;
  for (int k = 0; k < 137; ++k) big.insert(big.end(), base.begin(), base.end());
  EXPECT_EQ(summarize(base).mean_us, summarize(big).mean_us);
}

}  // namespace
}  // namespace mbsim
