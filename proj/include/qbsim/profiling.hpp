#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qbsim/errors.hpp"
#include "qbsim/snapshot.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

enum class ProfileEventKind { RequestPending, Granted, BeatDelivered, BufferOccupancy, QosViolation };

const char* to_string(ProfileEventKind kind);

struct ProfileEvent {
  Cycle cycle = 0;
  ProfileEventKind kind = ProfileEventKind::RequestPending;
  std::optional<MasterId> master;
  std::optional<TxnId> txn;
  std::uint64_t arg = 0;  // beat index / occupancy level
};

struct PerMasterMetrics {
  MasterId master = 0;
  std::uint64_t completed = 0;
  std::uint64_t bytes = 0;
  double throughput_bytes_per_cycle = 0.0;
  double grant_latency_mean = 0.0;
  Cycle grant_latency_max = 0;
  double completion_latency_mean = 0.0;
  Cycle completion_latency_max = 0;
  std::uint64_t qos_violations = 0;
};

struct MetricsReport {
  Cycle total_cycles = 0;
  double utilization = 0.0;  // beat-carrying cycles / total cycles
  double contention = 0.0;   // mean waiting requesters per cycle
  std::uint64_t total_beats = 0;
  std::uint64_t beat_cycles = 0;
  std::vector<std::uint64_t> buffer_occupancy_histogram;
  std::vector<PerMasterMetrics> per_master;
};

// Event accumulator plus optional raw CSV trace stream. Events must arrive
// with non-decreasing cycle stamps.
class Profiler {
 public:
  Profiler(std::size_t n_masters, unsigned bus_width_bits, std::size_t wb_depth);

  void set_trace_sink(std::ostream* sink);
  static std::string trace_header();

  void record(const ProfileEvent& ev);
  // Derives this cycle's events from the committed snapshot in a canonical
  // order and records each of them.
  void record_cycle(const CycleSnapshot& snap);

  MetricsReport finalize(const TxnTable& table, Cycle total_cycles) const;

  std::uint64_t events_recorded() const { return events_; }

 private:
  void fold_cycle();

  std::size_t n_masters_;
  unsigned width_bits_;
  std::ostream* sink_ = nullptr;

  std::uint64_t events_ = 0;
  std::optional<Cycle> current_cycle_;
  std::uint64_t cycle_pending_ = 0;
  std::uint64_t cycle_granted_ = 0;
  bool cycle_has_beat_ = false;

  std::uint64_t contention_sum_ = 0;
  std::uint64_t beat_cycles_ = 0;
  std::uint64_t total_beats_ = 0;
  std::vector<std::uint64_t> bytes_per_master_;
  std::vector<std::uint64_t> qos_violations_per_master_;
  std::vector<std::uint64_t> occupancy_histogram_;
};

}  // namespace qbsim
