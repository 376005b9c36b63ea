#pragma once

#include <array>
#include <optional>
#include <set>
#include <vector>

#include "qbsim/ddrc.hpp"
#include "qbsim/errors.hpp"
#include "qbsim/kernel.hpp"
#include "qbsim/types.hpp"
#include "qbsim/write_buffer.hpp"

namespace qbsim {

// Per-master QoS register. objective is the largest tolerated inter-grant gap
// (in cycles) while the master is requesting; the gap counter freezes while
// the master is not requesting and resets on grant.
struct QosRecord {
  bool rt = false;
  Cycle objective = 0;
  Cycle since_last_grant = 0;
  std::uint64_t violations = 0;
};

// Arbiter output for one cycle: the surviving candidate set after each of the
// seven filters, and the single grantee (if any candidate passed filter 1).
struct GrantDecision {
  std::optional<MasterId> granted;
  TxnId txn = 0;
  Cycle cycle = 0;
  std::array<std::vector<MasterId>, 7> filter_trace;
};

struct BusConfig {
  unsigned width_bits = 64;
  // Granted-but-incomplete transactions allowed in flight toward the DDRC
  // (1 = no request pipelining; >=2 overlaps arbitration with data phases).
  unsigned pipeline_depth = 6;
  MasterId rr_pointer_init = 0;
  Cycle qos_urgency_threshold = 16;
  // Rank per master id (missing = 0); larger rank wins filter 6.
  std::vector<int> static_priority;
  // Filters 1..7 at indices 0..6. Filters 1 and 7 must stay enabled.
  std::array<bool, 7> filter_enabled{{true, true, true, true, true, true, true}};
};

struct Candidate {
  MasterId master = 0;
  TxnId txn = 0;
  Op op = Op::Read;
  std::uint64_t addr = 0;
  unsigned beats = 0;
  DecodedAddr loc;
};

struct FilterContext {
  const std::array<bool, 7>* enabled = nullptr;
  const std::vector<BankReportEntry>* bank_report = nullptr;
  const std::vector<QosRecord>* qos = nullptr;  // indexed by master id, pseudo last
  const std::vector<int>* static_priority = nullptr;
  const std::set<MasterId>* hazard_blocked = nullptr;  // reads held for RAW
  Cycle qos_urgency_threshold = 0;
  MasterId rr_pointer = 0;
  MasterId pseudo_master = 0;
  bool buffer_pressure = false;  // occupancy at watermark or RAW urgency
};

// One stage of the arbitration chain. Filters 2..6 return their input
// unchanged when disabled or when their rule would empty a non-empty set;
// filter 1 defines the candidate universe and may return empty; filter 7
// always narrows to a singleton.
std::vector<Candidate> apply_filter(unsigned k, const std::vector<Candidate>& in,
                                    const FilterContext& ctx);

// Handle for observing a transaction's completion through the TxnTable.
struct Completion {
  TxnId txn = 0;
};

// AHB-style main bus: transaction-level master ports, the 7-filter arbiter
// with QoS registers, grant pipelining toward the DDRC, and the posted-write
// hand-off to the write buffer.
class Bus final : public Component {
 public:
  Bus(const BusConfig& cfg, const AddressMap& map, TxnTable& table, Ddrc& ddrc,
      WriteBuffer& wb, std::size_t n_masters);

  std::string_view name() const override { return "bus"; }
  void eval(Cycle cycle) override;
  void commit(Cycle cycle) override;
  bool idle() const override { return cur_.pool.empty() && staged_requests_.empty(); }

  // -- master port operations (called during the masters' Eval)
  void set_qos(MasterId master, bool rt, Cycle objective);
  void request(MasterId master, TxnId txn);
  bool check_grant(MasterId master) const;
  Completion read(MasterId master, std::uint64_t addr, BurstKind burst);
  Completion write(MasterId master, std::uint64_t addr, BurstKind burst, unsigned beats);

  // -- committed views
  const std::optional<GrantDecision>& decision() const { return cur_.decision; }
  const std::vector<QosRecord>& qos() const { return cur_.qos; }
  const std::vector<MasterId>& requesters_last_cycle() const { return cur_.requesters; }
  const std::vector<MasterId>& qos_crossings_last_cycle() const { return cur_.qos_crossed; }
  const std::vector<TxnId>& posted_last_cycle() const { return cur_.posted; }
  std::size_t pool_size() const { return cur_.pool.size(); }
  struct PoolEntry {
    MasterId master = 0;
    TxnId txn = 0;
  };
  std::vector<PoolEntry> pool_view() const;
  MasterId rr_pointer() const { return cur_.rr_pointer; }

  MasterId pseudo_master() const { return static_cast<MasterId>(n_masters_); }
  const BusConfig& config() const { return cfg_; }

  // Port calls may arrive from components evaluated before this one; the
  // world's cycle counter is the stable clock for stamping them.
  void attach_clock(const SimWorld& world) { clock_ = &world; }

 private:
  struct Pending {
    TxnId txn = 0;
    MasterId master = 0;
    Op op = Op::Read;
    std::uint64_t addr = 0;
    unsigned beats = 0;
    DecodedAddr loc;
    Cycle issue = 0;
  };

  struct State {
    std::vector<Pending> pool;  // sorted by master id; at most one per master
    std::optional<GrantDecision> decision;
    std::vector<QosRecord> qos;         // n_masters + 1 (pseudo last)
    std::vector<MasterId> requesters;   // candidate universe this cycle
    std::vector<MasterId> qos_crossed;  // deadline crossings this cycle
    std::vector<TxnId> posted;          // writes absorbed this cycle
    MasterId rr_pointer = 0;
  };

  void validate_address(std::uint64_t addr, unsigned beats) const;
  std::set<MasterId> hazard_blocked_masters() const;
  Candidate pending_to_candidate(const Pending& p) const;

  BusConfig cfg_;
  AddressMap map_;
  TxnTable* table_;
  Ddrc* ddrc_;
  WriteBuffer* wb_;
  std::size_t n_masters_;
  const SimWorld* clock_ = nullptr;
  Cycle now_ = 0;

  Cycle now() const { return clock_ ? clock_->cycle() : now_; }

  State cur_;

  // staged during eval, folded at commit
  std::vector<Pending> staged_requests_;
  std::optional<GrantDecision> staged_decision_;
  bool staged_granted_is_pseudo_ = false;
  std::vector<TxnId> staged_posted_;
  std::vector<MasterId> staged_requesters_;
  // Last issued transaction per master; a port is free once that transaction
  // reads complete from committed state (done or posted).
  std::vector<std::optional<TxnId>> busy_txn_;
};

}  // namespace qbsim
