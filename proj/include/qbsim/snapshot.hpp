#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qbsim/bus.hpp"
#include "qbsim/ddrc.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

// Committed state of one cycle, assembled after all commits in a canonical
// order (independent of component registration order). Feeds the checker,
// the profiler, the trace writer, and the equivalence digests.
struct CycleSnapshot {
  Cycle cycle = 0;

  std::vector<MasterId> granted;  // grants visible this cycle (<=1 when legal)
  std::optional<GrantDecision> decision;
  std::vector<MasterId> requesters;  // candidate universe presented to filter 1

  struct PendingView {
    MasterId master = 0;
    TxnId txn = 0;
    Cycle issue_cycle = 0;
  };
  std::vector<PendingView> pending;  // still-waiting requests after this cycle

  std::vector<BankState> banks;
  std::vector<DdrCommand> commands;  // non-nop commands issued (<=1 when legal)
  std::vector<BeatEvent> beats;

  std::size_t wb_occupancy = 0;
  std::size_t wb_depth = 0;

  struct QosView {
    MasterId master = 0;
    bool rt = false;
    Cycle objective = 0;
    Cycle since_last_grant = 0;
    std::uint64_t violations = 0;
    bool crossed_now = false;
  };
  std::vector<QosView> qos;

  bool memory_fault = false;
  std::uint64_t memory_fault_addr = 0;

  // Stable single-line rendering; equality of rendered streams is the
  // bit-exact trace equivalence used by the kernel oracle suites.
  std::string to_line() const;
};

}  // namespace qbsim
