#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbsim/bus.hpp"
#include "qbsim/checker.hpp"
#include "qbsim/config.hpp"
#include "qbsim/ddrc.hpp"
#include "qbsim/kernel.hpp"
#include "qbsim/masters.hpp"
#include "qbsim/profiling.hpp"
#include "qbsim/snapshot.hpp"
#include "qbsim/write_buffer.hpp"

namespace qbsim {

struct RunOptions {
  // Permutation of component registration order (test hook; results must not
  // depend on it). Values index the natural order: masters, wb, ddrc, bus.
  std::optional<std::vector<std::size_t>> registration_order;
  // When set, eval/commit additionally walk components in this per-step
  // shuffled order (seeded); the reference-stepper suites use it.
  std::optional<std::uint64_t> step_shuffle_seed;
  std::ostream* trace_sink = nullptr;
  bool collect_digests = false;  // per-cycle snapshot lines, for equivalence
  std::function<void(const CycleSnapshot&)> snapshot_tap;
};

struct RunResult {
  SimSummary summary;
  MetricsReport metrics;
  std::vector<Violation> violations;
  Json resolved_config;
  std::map<std::uint64_t, std::uint64_t> final_memory;  // functional memory
  std::vector<std::string> digests;
  double wall_seconds = 0.0;
};

// Owns one fully wired simulation: masters, write buffer, DDRC, bus, checker
// and profiler, assembled from a validated config.
class System {
 public:
  explicit System(const SimConfig& cfg, const RunOptions& opts = {});

  RunResult run();

  SimWorld& world() { return world_; }
  Bus& bus() { return *bus_; }
  Ddrc& ddrc() { return *ddrc_; }
  WriteBuffer& write_buffer() { return *wb_; }
  TxnTable& table() { return table_; }
  Checker& checker() { return checker_; }
  TrafficMaster& master(std::size_t i) { return *masters_.at(i); }
  std::size_t master_count() const { return masters_.size(); }

  CycleSnapshot make_snapshot(Cycle cycle) const;

 private:
  SimConfig cfg_;
  RunOptions opts_;
  AddressMap map_;
  TxnTable table_;

  std::unique_ptr<WriteBuffer> wb_;
  std::unique_ptr<Ddrc> ddrc_;
  std::unique_ptr<Bus> bus_;
  std::vector<std::unique_ptr<TrafficMaster>> masters_;

  Profiler profiler_;
  Checker checker_;
  SimWorld world_;

  std::vector<std::string> digests_;
  std::vector<MasterId> prev_pending_;
};

RunResult run_simulation(const SimConfig& cfg, const RunOptions& opts = {});

}  // namespace qbsim
