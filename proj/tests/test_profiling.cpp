#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "qbsim/profiling.hpp"
#include "qbsim/system.hpp"

using namespace qbsim;

namespace {

ProfileEvent ev(Cycle c, ProfileEventKind k, std::optional<MasterId> m = std::nullopt,
                std::optional<TxnId> t = std::nullopt, std::uint64_t arg = 0) {
  return {c, k, m, t, arg};
}

}  // namespace

TEST_CASE("an empty accumulator finalizes to zeros") {
  Profiler prof(2, 64, 4);
  TxnTable table;
  const MetricsReport r = prof.finalize(table, 100);
  CHECK(r.utilization == 0.0);
  CHECK(r.contention == 0.0);
  CHECK(r.total_beats == 0);
  CHECK(r.per_master.size() == 2);
  CHECK(r.per_master[0].completed == 0);
}

TEST_CASE("finalize rejects a zero-cycle run") {
  Profiler prof(1, 64, 4);
  TxnTable table;
  CHECK_THROWS_AS(prof.finalize(table, 0), SimError);
}

TEST_CASE("event cycles must be non-decreasing") {
  Profiler prof(1, 64, 4);
  prof.record(ev(5, ProfileEventKind::BufferOccupancy));
  CHECK_THROWS_AS(prof.record(ev(4, ProfileEventKind::BufferOccupancy)), SimError);
}

TEST_CASE("utilization counts beat-carrying cycles over total") {
  // 100 cycles, beats on 50 distinct cycles -> 0.5.
  Profiler prof(1, 64, 4);
  TxnTable table;
  for (Cycle c = 0; c < 50; ++c) {
    prof.record(ev(2 * c, ProfileEventKind::BeatDelivered, 0, 0, 0));
  }
  const MetricsReport r = prof.finalize(table, 100);
  CHECK(r.utilization == doctest::Approx(0.5));
  CHECK(r.beat_cycles == 50);
  CHECK(r.total_beats == 50);
}

TEST_CASE("a never-blocked single master sees zero contention") {
  Profiler prof(1, 64, 4);
  TxnTable table;
  for (Cycle c = 0; c < 20; ++c) {
    prof.record(ev(c, ProfileEventKind::RequestPending, 0));
    prof.record(ev(c, ProfileEventKind::Granted, 0, 0));
  }
  const MetricsReport r = prof.finalize(table, 20);
  CHECK(r.contention == doctest::Approx(0.0));
}

TEST_CASE("three always-requesting masters with one grant per cycle converge to contention 2") {
  // Closed form: every cycle leaves exactly two requesters waiting.
  Profiler prof(3, 64, 4);
  TxnTable table;
  const Cycle total = 300;
  for (Cycle c = 0; c < total; ++c) {
    for (MasterId m = 0; m < 3; ++m) prof.record(ev(c, ProfileEventKind::RequestPending, m));
    prof.record(ev(c, ProfileEventKind::Granted, static_cast<MasterId>(c % 3), c));
  }
  const MetricsReport r = prof.finalize(table, total);
  CHECK(r.contention == doctest::Approx(2.0));
}

TEST_CASE("beat events accumulate bytes per originating master") {
  Profiler prof(2, 64, 4);
  TxnTable table;
  for (int i = 0; i < 3; ++i) prof.record(ev(i, ProfileEventKind::BeatDelivered, 0, 0, i));
  for (int i = 3; i < 5; ++i) prof.record(ev(i, ProfileEventKind::BeatDelivered, 1, 1, i - 3));
  const MetricsReport r = prof.finalize(table, 10);
  CHECK(r.per_master[0].bytes == 3 * 8);
  CHECK(r.per_master[1].bytes == 2 * 8);
  CHECK(r.per_master[0].throughput_bytes_per_cycle == doctest::Approx(2.4));
}

TEST_CASE("trace stream carries the documented CSV schema") {
  Profiler prof(1, 64, 4);
  std::ostringstream sink;
  prof.set_trace_sink(&sink);
  prof.record(ev(3, ProfileEventKind::RequestPending, 0));
  prof.record(ev(3, ProfileEventKind::Granted, 0, 7));
  prof.record(ev(4, ProfileEventKind::BeatDelivered, 0, 7, 2));
  prof.record(ev(4, ProfileEventKind::BufferOccupancy, std::nullopt, std::nullopt, 1));
  CHECK(sink.str() ==
        "3,request_pending,0,,0\n"
        "3,granted,0,7,0\n"
        "4,beat_delivered,0,7,2\n"
        "4,buffer_occupancy,,,1\n");
  CHECK(Profiler::trace_header() == "cycle,event,master,txn,arg");
}

TEST_CASE("report metrics agree with a recount of the raw trace") {
  // Run a real mix, stream the trace, and recount utilization/bytes from the
  // raw events; the report must match the recount exactly.
  SimConfig cfg;
  for (int i = 0; i < 4; ++i) {
    MasterConfig mc;
    mc.pattern = PatternKind::Mixed;
    mc.op = i % 2 ? OpMix::WriteOnly : OpMix::ReadOnly;
    mc.txn_count = 40;
    cfg.masters.push_back(mc);
  }
  cfg.max_cycles = 100000;

  std::ostringstream trace;
  RunOptions opts;
  opts.trace_sink = &trace;
  const RunResult r = run_simulation(cfg, opts);
  REQUIRE(r.summary.terminated_reason == StopReason::AllMastersDone);

  std::istringstream in(trace.str());
  std::string line;
  std::getline(in, line);  // header
  std::uint64_t beat_cycles = 0, beats = 0, pending_sum = 0, granted_sum = 0;
  std::vector<std::uint64_t> bytes(4, 0);
  std::int64_t last_beat_cycle = -1;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cyc, kind, master, txn, arg;
    std::getline(ls, cyc, ',');
    std::getline(ls, kind, ',');
    std::getline(ls, master, ',');
    std::getline(ls, txn, ',');
    std::getline(ls, arg, ',');
    if (kind == "beat_delivered") {
      beats++;
      bytes[std::stoul(master)] += 8;
      if (std::stoll(cyc) != last_beat_cycle) {
        beat_cycles++;
        last_beat_cycle = std::stoll(cyc);
      }
    } else if (kind == "request_pending") {
      pending_sum++;
    } else if (kind == "granted") {
      granted_sum++;
    }
  }
  CHECK(r.metrics.total_beats == beats);
  CHECK(r.metrics.beat_cycles == beat_cycles);
  CHECK(r.metrics.utilization ==
        doctest::Approx(double(beat_cycles) / double(r.summary.total_cycles)));
  std::uint64_t total_master_bytes = 0;
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(r.metrics.per_master[m].bytes == bytes[m]);
    total_master_bytes += r.metrics.per_master[m].bytes;
  }
  // Master-side bytes equal bus-level bytes delivered.
  CHECK(total_master_bytes == beats * 8);
  CHECK(pending_sum >= granted_sum);
}

TEST_CASE("throughput times total cycles reproduces the byte count") {
  SimConfig cfg;
  MasterConfig mc;
  mc.pattern = PatternKind::Burst8;
  mc.op = OpMix::ReadOnly;
  mc.txn_count = 25;
  cfg.masters = {mc};
  cfg.max_cycles = 100000;
  const RunResult r = run_simulation(cfg);
  const auto& pm = r.metrics.per_master[0];
  CHECK(pm.throughput_bytes_per_cycle * double(r.summary.total_cycles) ==
        doctest::Approx(double(pm.bytes)).epsilon(1e-12));
  CHECK(pm.bytes == 25ull * 8 * 8);
}
