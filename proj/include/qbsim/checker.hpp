#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qbsim/ddrc.hpp"
#include "qbsim/snapshot.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

enum class ViolationKind { FatalSelfCheck, ProtocolProperty };

const char* to_string(ViolationKind kind);

struct Violation {
  Cycle cycle = 0;
  ViolationKind kind = ViolationKind::FatalSelfCheck;
  std::string rule;
  std::string message;
};

struct CheckerConfig {
  bool enabled = true;
  // No requester may wait longer than this between issue and grant.
  // 0 = auto: 10 x the largest QoS objective (or 1000 if none).
  Cycle starvation_bound = 0;
};

// Test-only hook: doctors the snapshot seen by the checker at one cycle so a
// rule fires without corrupting the simulation state itself.
struct FaultInjection {
  std::string rule;
  Cycle cycle = 0;
};

// phase 0 = the injection cycle itself; phase 1 = the cycle after (only the
// multi-step timing fault uses it).
void inject_fault(CycleSnapshot& snap, const std::string& rule, unsigned phase = 0);

// All checker rule ids, in report order. Fatal rules abort the run
// (type-1 self-checks); property rules are recorded and the run continues.
const std::vector<std::string>& checker_rule_ids();
bool checker_rule_is_fatal(const std::string& rule);

// Protocol monitor fed one committed snapshot per cycle. Fatal violations
// throw AbortSimulation after being recorded.
class Checker {
 public:
  Checker(CheckerConfig cfg, const DdrTiming& timing, const AddressMap& map);

  void check_cycle(const CycleSnapshot& snap);
  const std::vector<Violation>& violations() const { return violations_; }
  Cycle starvation_bound() const { return bound_; }
  void resolve_starvation_bound(const std::vector<QosRecord>& qos);

 private:
  void fail(ViolationKind kind, const std::string& rule, Cycle cycle, const std::string& msg);

  void check_grants(const CycleSnapshot& snap);
  void check_filter_trace(const CycleSnapshot& snap);
  void check_fsm(const CycleSnapshot& snap);
  void check_beats(const CycleSnapshot& snap);
  void check_buffer(const CycleSnapshot& snap);
  void check_qos(const CycleSnapshot& snap);
  void check_starvation(const CycleSnapshot& snap);

  CheckerConfig cfg_;
  DdrTiming timing_;
  AddressMap map_;
  Cycle bound_ = 0;

  std::vector<Violation> violations_;

  // previous-cycle context for transition and timing checks
  std::vector<BankState> prev_banks_;
  std::vector<DdrCommand> prev_cmds_;
  bool have_prev_ = false;
  struct BankTimes {
    std::optional<Cycle> last_activate;
    std::optional<Cycle> last_precharge;
  };
  std::vector<BankTimes> bank_times_;
  struct TxnBeats {
    unsigned delivered = 0;
    std::optional<Cycle> last_beat_cycle;
    std::optional<Cycle> col_cycle;
    Op op = Op::Read;
    unsigned expected = 0;
  };
  std::map<TxnId, TxnBeats> txn_beats_;
  std::set<TxnId> starved_flagged_;
};

}  // namespace qbsim
