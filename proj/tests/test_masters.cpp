#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "qbsim/masters.hpp"
#include "qbsim/system.hpp"
#include "support/oracles.hpp"

using namespace qbsim;

namespace {

// Standalone generator harness: a master wired to a real bus stack, queried
// via next_stimulus without stepping the world.
struct GenRig {
  AddressMap map;
  TxnTable table;
  WriteBuffer wb{true, 4};
  Ddrc ddrc;
  Bus bus;
  TrafficMaster master;

  GenRig(const MasterModel& model)
      : ddrc(map, DdrTiming{}, DdrcOptions{}, table),
        bus(BusConfig{}, map, table, ddrc, wb, 1),
        master(model, bus, table, map) {}
};

MasterModel base_model(PatternKind kind, OpMix op, std::uint64_t count, std::uint64_t seed) {
  MasterModel m;
  m.id = 0;
  m.pattern = make_pattern(kind, op, count, seed);
  m.base_addr = 0;
  m.region_bytes = 32768;
  return m;
}

}  // namespace

TEST_CASE("make_pattern validates and fills a deterministic spec") {
  const PatternSpec spec = make_pattern(PatternKind::Burst4, OpMix::ReadOnly, 200, 7);
  CHECK(spec.kind == PatternKind::Burst4);
  CHECK(spec.txn_count == 200);
  CHECK(spec.stream_seed == 7);

  CHECK_THROWS_AS(make_pattern(PatternKind::Mixed, OpMix::WriteOnly, 0, 1), SimError);
  try {
    make_pattern(PatternKind::Mixed, OpMix::WriteOnly, 0, 1);
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::InvalidSpec);
  }
}

TEST_CASE("a burst4 read pattern emits only 4-beat reads") {
  GenRig rig(base_model(PatternKind::Burst4, OpMix::ReadOnly, 50, 3));
  for (int i = 0; i < 50; ++i) {
    auto s = rig.master.next_stimulus(i);
    REQUIRE(s.has_value());
    CHECK(s->op == Op::Read);
    CHECK(s->burst == BurstKind::Incr4);
  }
}

TEST_CASE("identical seeds give identical mixed write sequences") {
  GenRig a(base_model(PatternKind::Mixed, OpMix::WriteOnly, 200, 0x5e5e));
  GenRig b(base_model(PatternKind::Mixed, OpMix::WriteOnly, 200, 0x5e5e));
  for (int i = 0; i < 200; ++i) {
    auto sa = a.master.next_stimulus(i);
    auto sb = b.master.next_stimulus(i);
    REQUIRE(sa.has_value());
    REQUIRE(sb.has_value());
    CHECK(sa->op == sb->op);
    CHECK(sa->addr == sb->addr);
    CHECK(sa->burst == sb->burst);
    CHECK(sa->op == Op::Write);
  }
}

TEST_CASE("different seeds give different mixed sequences") {
  GenRig a(base_model(PatternKind::Mixed, OpMix::ReadOnly, 100, 1));
  GenRig b(base_model(PatternKind::Mixed, OpMix::ReadOnly, 100, 2));
  int differing = 0;
  for (int i = 0; i < 100; ++i) {
    auto sa = a.master.next_stimulus(i);
    auto sb = b.master.next_stimulus(i);
    if (sa->burst != sb->burst) differing++;
  }
  CHECK(differing > 10);
}

TEST_CASE("mixed burst draw is uniform within 2% over 30000 draws") {
  // Chi-square style bound frozen from the seeded stream: each kind within
  // 1/3 +- 2% absolute.
  MasterModel model = base_model(PatternKind::Mixed, OpMix::ReadOnly, 30000, 0xd1ce);
  model.region_bytes = 1u << 20;
  GenRig rig(model);
  std::map<BurstKind, int> counts;
  for (int i = 0; i < 30000; ++i) {
    auto s = rig.master.next_stimulus(i);
    REQUIRE(s.has_value());
    counts[s->burst]++;
  }
  for (auto [kind, n] : counts) {
    const double freq = n / 30000.0;
    CHECK(std::abs(freq - 1.0 / 3.0) < 0.02);
  }
}

TEST_CASE("a one-row stride rotates through the banks") {
  // Consecutive transactions land on consecutive banks under the default
  // address map; the decode oracle confirms the bank walk.
  MasterModel model = base_model(PatternKind::Single, OpMix::ReadOnly, 64, 9);
  model.pattern.addr_stride = {2048, 2048};
  GenRig rig(model);
  unsigned expected_bank = 0;  // master 0 starts at its region base
  for (int i = 0; i < 16; ++i) {
    auto s = rig.master.next_stimulus(i);
    REQUIRE(s.has_value());
    const auto d = qbsim::test::decode_oracle(s->addr, 64, 8, 2);
    CHECK(d.bank == expected_bank);
    expected_bank = (expected_bank + 1) % 4;
  }
}

TEST_CASE("generators stay inside their region and rows") {
  MasterModel model = base_model(PatternKind::Mixed, OpMix::WriteOnly, 5000, 77);
  model.base_addr = 3 * 32768;
  model.region_bytes = 32768;
  GenRig rig(model);
  const std::uint64_t row = rig.map.row_bytes();
  for (int i = 0; i < 5000; ++i) {
    auto s = rig.master.next_stimulus(i);
    REQUIRE(s.has_value());
    const std::uint64_t bytes = beats_of(s->burst) * rig.map.bytes_per_beat();
    CHECK(s->addr >= model.base_addr);
    CHECK(s->addr + bytes <= model.base_addr + model.region_bytes);
    CHECK(s->addr / row == (s->addr + bytes - 1) / row);
  }
}

TEST_CASE("a done master never emits again") {
  GenRig rig(base_model(PatternKind::Single, OpMix::ReadOnly, 3, 5));
  for (int i = 0; i < 3; ++i) CHECK(rig.master.next_stimulus(i).has_value());
  // The pattern count is exhausted on the issue counter, not completion, so
  // drive the model as the component would.
  CHECK(rig.master.next_stimulus(3).has_value() == false);
}

TEST_CASE("zero gap reissues the cycle after completion; each master completes txn_count") {
  SimConfig cfg;
  MasterConfig mc;
  mc.pattern = PatternKind::Single;
  mc.op = OpMix::ReadOnly;
  mc.txn_count = 5;
  cfg.masters = {mc};
  cfg.max_cycles = 4000;

  RunResult r = run_simulation(cfg);
  CHECK(r.summary.terminated_reason == StopReason::AllMastersDone);
  CHECK(r.summary.completed_transactions == 5);

  // Reissue gap: next issue exactly one cycle after the previous completion.
  System sys(cfg);
  RunResult rr = sys.run();
  (void)rr;
  const auto& all = sys.table().all();
  REQUIRE(all.size() == 5);
  for (std::size_t i = 1; i < all.size(); ++i) {
    REQUIRE(all[i - 1].done_cycle.has_value());
    CHECK(*all[i].issue_cycle == *all[i - 1].done_cycle + 1);
  }
}

TEST_CASE("a fixed inter-arrival gap delays the next issue") {
  SimConfig cfg;
  MasterConfig mc;
  mc.pattern = PatternKind::Single;
  mc.op = OpMix::ReadOnly;
  mc.txn_count = 3;
  mc.inter_arrival = {10, 10};
  cfg.masters = {mc};
  cfg.max_cycles = 4000;

  System sys(cfg);
  sys.run();
  const auto& all = sys.table().all();
  REQUIRE(all.size() == 3);
  CHECK(*all[0].issue_cycle == 10);
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(*all[i].issue_cycle == *all[i - 1].done_cycle + 1 + 10);
  }
}
