#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>

#include "qbsim/rng.hpp"
#include "qbsim/write_buffer.hpp"

using namespace qbsim;

namespace {

Transaction make_write(TxnId id, std::uint64_t addr, BurstKind burst) {
  Transaction t;
  t.id = id;
  t.master = 1;
  t.op = Op::Write;
  t.addr = addr;
  t.burst = burst;
  return t;
}

void commit(WriteBuffer& wb, Cycle c) {
  wb.eval(c);
  wb.commit(c);
}

}  // namespace

TEST_CASE("a losing write is absorbed when the buffer has space") {
  WriteBuffer wb(true, 4);
  CHECK(wb.try_posted_write(make_write(0, 0x100, BurstKind::Incr4), 3));
  commit(wb, 3);
  CHECK(wb.occupancy() == 1);
  CHECK(wb.entries().front().enqueue_cycle == 3);
}

TEST_CASE("a full buffer rejects the posting") {
  WriteBuffer wb(true, 4);
  for (TxnId i = 0; i < 4; ++i) {
    CHECK(wb.try_posted_write(make_write(i, 0x100 * i, BurstKind::Single), 0));
  }
  commit(wb, 0);
  CHECK(wb.occupancy() == 4);
  CHECK_FALSE(wb.try_posted_write(make_write(9, 0x900, BurstKind::Single), 1));
}

TEST_CASE("a disabled buffer rejects postings regardless of occupancy") {
  WriteBuffer wb(false, 4);
  CHECK_FALSE(wb.try_posted_write(make_write(0, 0x100, BurstKind::Single), 0));
  commit(wb, 0);
  CHECK(wb.occupancy() == 0);
}

TEST_CASE("staged capacity is respected within one cycle") {
  WriteBuffer wb(true, 2);
  CHECK(wb.try_posted_write(make_write(0, 0x0, BurstKind::Single), 0));
  CHECK(wb.try_posted_write(make_write(1, 0x40, BurstKind::Single), 0));
  CHECK_FALSE(wb.try_posted_write(make_write(2, 0x80, BurstKind::Single), 0));
  commit(wb, 0);
  CHECK(wb.occupancy() == 2);
}

TEST_CASE("drain_request surfaces the head only when occupied") {
  WriteBuffer wb(true, 4);
  CHECK_FALSE(wb.drain_request().has_value());

  wb.try_posted_write(make_write(7, 0x700, BurstKind::Incr4), 2);
  wb.try_posted_write(make_write(8, 0x800, BurstKind::Incr8), 2);
  commit(wb, 2);
  auto head = wb.drain_request();
  REQUIRE(head.has_value());
  CHECK(head->txn == 7);
  CHECK(head->beats == 4);
}

TEST_CASE("a drain pop takes effect at that cycle's commit; the next head surfaces after") {
  WriteBuffer wb(true, 4);
  wb.try_posted_write(make_write(1, 0x100, BurstKind::Single), 0);
  wb.try_posted_write(make_write(2, 0x200, BurstKind::Single), 0);
  commit(wb, 0);
  CHECK(wb.occupancy() == 2);

  // Grant for the pseudo-master at cycle 5: occupancy drops at commit 5.
  wb.stage_drain_pop();
  CHECK(wb.occupancy() == 2);  // not yet committed
  commit(wb, 5);
  CHECK(wb.occupancy() == 1);
  CHECK(wb.drain_request()->txn == 2);
}

TEST_CASE("FIFO order is preserved against a reference queue") {
  WriteBuffer wb(true, 4);
  std::deque<TxnId> committed_ref;
  std::vector<TxnId> staged_ref;
  Rng rng(0xabcd);
  TxnId next = 0;
  std::vector<TxnId> drained, expected;

  for (Cycle c = 0; c < 400; ++c) {
    bool popped = false;
    if (rng.below(2) == 0) {
      const Transaction t = make_write(next, 0x40 * next, BurstKind::Single);
      if (wb.try_posted_write(t, c)) staged_ref.push_back(next);
      ++next;
    }
    if (rng.below(3) == 0) {
      if (const auto head = wb.drain_request()) {
        drained.push_back(head->txn);
        expected.push_back(committed_ref.front());
        wb.stage_drain_pop();
        popped = true;
      }
    }
    commit(wb, c);
    if (popped) committed_ref.pop_front();
    for (TxnId id : staged_ref) committed_ref.push_back(id);
    staged_ref.clear();
    CHECK(wb.occupancy() == committed_ref.size());
    CHECK(wb.occupancy() <= wb.depth());
  }
  CHECK(drained == expected);
}

TEST_CASE("occupancy histogram counts one sample per commit") {
  WriteBuffer wb(true, 4);
  commit(wb, 0);  // occupancy 0
  wb.try_posted_write(make_write(0, 0x0, BurstKind::Single), 1);
  commit(wb, 1);  // occupancy 1
  wb.try_posted_write(make_write(1, 0x40, BurstKind::Single), 2);
  commit(wb, 2);  // occupancy 2
  commit(wb, 3);  // occupancy 2
  const auto& h = wb.occupancy_histogram();
  CHECK(h[0] == 1);
  CHECK(h[1] == 1);
  CHECK(h[2] == 2);
  CHECK(h[3] == 0);
}
