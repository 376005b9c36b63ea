#include "qbsim/profiling.hpp"

#include <algorithm>
#include <ostream>

namespace qbsim {

const char* to_string(ProfileEventKind kind) {
  switch (kind) {
    case ProfileEventKind::RequestPending: return "request_pending";
    case ProfileEventKind::Granted: return "granted";
    case ProfileEventKind::BeatDelivered: return "beat_delivered";
    case ProfileEventKind::BufferOccupancy: return "buffer_occupancy";
    case ProfileEventKind::QosViolation: return "qos_violation";
  }
  return "?";
}

Profiler::Profiler(std::size_t n_masters, unsigned bus_width_bits, std::size_t wb_depth)
    : n_masters_(n_masters), width_bits_(bus_width_bits) {
  bytes_per_master_.assign(n_masters_ + 1, 0);  // pseudo-master slot unused
  qos_violations_per_master_.assign(n_masters_ + 1, 0);
  occupancy_histogram_.assign(wb_depth + 1, 0);
}

void Profiler::set_trace_sink(std::ostream* sink) { sink_ = sink; }

std::string Profiler::trace_header() { return "cycle,event,master,txn,arg"; }

void Profiler::fold_cycle() {
  if (!current_cycle_) return;
  const std::uint64_t granted = cycle_granted_;
  if (cycle_pending_ > granted) contention_sum_ += cycle_pending_ - granted;
  if (cycle_has_beat_) beat_cycles_++;
  cycle_pending_ = 0;
  cycle_granted_ = 0;
  cycle_has_beat_ = false;
}

void Profiler::record(const ProfileEvent& ev) {
  if (current_cycle_ && ev.cycle < *current_cycle_) {
    throw SimError(Errc::Precondition, "profile event cycles must be non-decreasing");
  }
  if (!current_cycle_ || ev.cycle != *current_cycle_) {
    fold_cycle();
    current_cycle_ = ev.cycle;
  }
  events_++;

  switch (ev.kind) {
    case ProfileEventKind::RequestPending:
      cycle_pending_++;
      break;
    case ProfileEventKind::Granted:
      cycle_granted_++;
      break;
    case ProfileEventKind::BeatDelivered:
      cycle_has_beat_ = true;
      total_beats_++;
      if (ev.master && *ev.master < bytes_per_master_.size()) {
        bytes_per_master_[*ev.master] += width_bits_ / 8;
      }
      break;
    case ProfileEventKind::BufferOccupancy:
      if (ev.arg < occupancy_histogram_.size()) occupancy_histogram_[ev.arg]++;
      break;
    case ProfileEventKind::QosViolation:
      if (ev.master && *ev.master < qos_violations_per_master_.size()) {
        qos_violations_per_master_[*ev.master]++;
      }
      break;
  }

  if (sink_) {
    (*sink_) << ev.cycle << ',' << to_string(ev.kind) << ',';
    if (ev.master) (*sink_) << *ev.master;
    (*sink_) << ',';
    if (ev.txn) (*sink_) << *ev.txn;
    (*sink_) << ',' << ev.arg << '\n';
  }
}

void Profiler::record_cycle(const CycleSnapshot& snap) {
  // Canonical event order per cycle: pendings (by master), grant, beats,
  // occupancy, QoS crossings.
  for (MasterId m : snap.requesters) {
    record({snap.cycle, ProfileEventKind::RequestPending, m, std::nullopt, 0});
  }
  for (MasterId m : snap.granted) {
    std::optional<TxnId> txn;
    if (snap.decision && snap.decision->granted && *snap.decision->granted == m) {
      txn = snap.decision->txn;
    }
    record({snap.cycle, ProfileEventKind::Granted, m, txn, 0});
  }
  for (const BeatEvent& b : snap.beats) {
    record({snap.cycle, ProfileEventKind::BeatDelivered, b.master, b.txn, b.index});
  }
  record({snap.cycle, ProfileEventKind::BufferOccupancy, std::nullopt, std::nullopt,
          snap.wb_occupancy});
  for (const auto& q : snap.qos) {
    if (q.crossed_now) {
      record({snap.cycle, ProfileEventKind::QosViolation, q.master, std::nullopt, 0});
    }
  }
}

MetricsReport Profiler::finalize(const TxnTable& table, Cycle total_cycles) const {
  if (total_cycles == 0) {
    throw SimError(Errc::ZeroCycles, "cannot finalize metrics over zero cycles");
  }
  // Fold the still-open cycle into a copy so finalize stays const.
  std::uint64_t contention_sum = contention_sum_;
  std::uint64_t beat_cycles = beat_cycles_;
  if (current_cycle_) {
    if (cycle_pending_ > cycle_granted_) contention_sum += cycle_pending_ - cycle_granted_;
    if (cycle_has_beat_) beat_cycles++;
  }

  MetricsReport r;
  r.total_cycles = total_cycles;
  r.total_beats = total_beats_;
  r.beat_cycles = beat_cycles;
  r.utilization = static_cast<double>(beat_cycles) / static_cast<double>(total_cycles);
  r.contention = static_cast<double>(contention_sum) / static_cast<double>(total_cycles);
  r.buffer_occupancy_histogram = occupancy_histogram_;

  struct Latency {
    std::uint64_t grant_sum = 0, grant_n = 0, done_sum = 0, done_n = 0;
    Cycle grant_max = 0, done_max = 0;
    std::uint64_t completed = 0;
  };
  std::vector<Latency> lat(n_masters_);
  for (const Transaction& t : table.all()) {
    if (t.master >= n_masters_ || !t.issue_cycle) continue;
    if (t.grant_cycle) {
      const Cycle d = *t.grant_cycle - *t.issue_cycle;
      lat[t.master].grant_sum += d;
      lat[t.master].grant_n++;
      lat[t.master].grant_max = std::max(lat[t.master].grant_max, d);
    }
    if (t.master_done()) {
      const Cycle d = t.master_done_cycle() - *t.issue_cycle;
      lat[t.master].done_sum += d;
      lat[t.master].done_n++;
      lat[t.master].done_max = std::max(lat[t.master].done_max, d);
      lat[t.master].completed++;
    }
  }

  for (std::size_t m = 0; m < n_masters_; ++m) {
    PerMasterMetrics pm;
    pm.master = static_cast<MasterId>(m);
    pm.completed = lat[m].completed;
    pm.bytes = bytes_per_master_[m];
    pm.throughput_bytes_per_cycle = static_cast<double>(pm.bytes) / static_cast<double>(total_cycles);
    pm.grant_latency_mean =
        lat[m].grant_n ? static_cast<double>(lat[m].grant_sum) / static_cast<double>(lat[m].grant_n) : 0.0;
    pm.grant_latency_max = lat[m].grant_max;
    pm.completion_latency_mean =
        lat[m].done_n ? static_cast<double>(lat[m].done_sum) / static_cast<double>(lat[m].done_n) : 0.0;
    pm.completion_latency_max = lat[m].done_max;
    pm.qos_violations = qos_violations_per_master_[m];
    r.per_master.push_back(pm);
  }
  return r;
}

}  // namespace qbsim
