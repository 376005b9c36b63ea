#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "qbsim/errors.hpp"
#include "qbsim/kernel.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

// Byte address -> (row, bank, col) split. Beats index a bus-width word; the
// low col_bits of the beat index select the column, the next bank_bits the
// bank, the rest the row. Consecutive rows of one bank are banks()*row_bytes
// apart, so striding by row_bytes rotates through the banks.
struct AddressMap {
  unsigned bus_width_bits = 64;
  unsigned col_bits = 8;
  unsigned bank_bits = 2;
  unsigned row_bits = 13;

  unsigned beat_offset_bits() const;
  unsigned banks() const { return 1u << bank_bits; }
  std::uint64_t bytes_per_beat() const { return bus_width_bits / 8; }
  std::uint64_t row_bytes() const { return (1ull << col_bits) * bytes_per_beat(); }
  std::uint64_t memory_bytes() const {
    return (1ull << (col_bits + bank_bits + row_bits)) * bytes_per_beat();
  }
};

struct DecodedAddr {
  std::uint64_t row = 0;
  unsigned bank = 0;
  unsigned col = 0;
};

// Throws AddressOutOfRange if addr falls outside the mapped memory.
DecodedAddr decode_address(std::uint64_t addr, const AddressMap& map);

// Core timing constraints, in bus cycles. One beat transfers per cycle.
struct DdrTiming {
  unsigned t_rcd = 3;  // Activate -> column command
  unsigned t_rp = 3;   // Precharge -> bank idle
  unsigned t_cl = 3;   // column read -> first data beat
  unsigned t_ras = 7;  // Activate -> earliest Precharge
};

enum class BankPhase { Idle, Activating, Active, Bursting, Precharging };

const char* to_string(BankPhase phase);

struct BankState {
  BankPhase phase = BankPhase::Idle;
  std::uint64_t open_row = 0;  // meaningful outside Idle/Precharging
  unsigned remaining = 0;      // countdown for Activating/Precharging
  Cycle active_since = 0;      // cycle the Activate command was issued
  Cycle burst_last_beat = 0;   // meaningful while Bursting
  TxnId burst_txn = 0;
};

struct DdrCommand {
  enum class Kind { Nop, Activate, ColRead, ColWrite, Precharge };
  Kind kind = Kind::Nop;
  unsigned bank = 0;
  std::uint64_t row = 0;
  unsigned col = 0;
  unsigned beats = 0;
  TxnId txn = 0;

  bool is_nop() const { return kind == Kind::Nop; }
  bool is_column() const { return kind == Kind::ColRead || kind == Kind::ColWrite; }
};

const char* to_string(DdrCommand::Kind kind);
std::string to_string(const DdrCommand& cmd);

// Advance one cycle without a command (counter decrements, burst expiry).
BankState bank_tick(const BankState& bank, Cycle now);

// Per-bank FSM step: advance one cycle, then apply cmd if present. Throws
// SimError(IllegalCommand) when cmd is not legal for the post-tick state;
// the caller treats that as a fatal model self-check.
BankState bank_step(const BankState& bank, const std::optional<DdrCommand>& cmd,
                    const DdrTiming& timing, Cycle now);

// Pipelined next-transaction hint pushed by the arbiter ahead of the data
// phase so the controller can precharge/activate the target bank early.
struct NextTxnInfo {
  unsigned bank = 0;
  std::uint64_t row = 0;
  Op op = Op::Read;
  MasterId master = 0;
  TxnId txn = 0;
};

// Granted transaction as queued inside the controller.
struct QueuedTxn {
  TxnId id = 0;
  MasterId master = 0;
  Op op = Op::Read;
  std::uint64_t addr = 0;
  unsigned beats = 0;
  DecodedAddr loc;
  bool hinted = false;      // NextTxnInfo received for this entry
  bool col_issued = false;
  Cycle first_beat = 0;     // valid once col_issued
  Cycle last_beat = 0;
};

struct BankReportEntry {
  bool idle = false;
  std::optional<std::uint64_t> open_row;
  bool blocked = false;  // no new access permitted (Bursting/Precharging)
};

// Status snapshot consumed by the arbiter filters one cycle later.
std::vector<BankReportEntry> idle_bank_report(const std::vector<BankState>& banks, Cycle now);

struct BeatEvent {
  TxnId txn = 0;
  MasterId master = 0;
  unsigned index = 0;
  unsigned bank = 0;
  std::uint64_t addr = 0;
  Op op = Op::Read;
};

// One beat per cycle per bursting transaction; issue order keeps beat windows
// disjoint so at most one transaction carries data on any cycle.
std::vector<BeatEvent> deliver_beats(const std::deque<QueuedTxn>& queue, Cycle now,
                                     std::uint64_t bytes_per_beat);

struct DdrcOptions {
  bool lookahead_hints = true;    // act on NextTxnInfo (and early columns)
  bool functional_memory = false; // store/check address tokens on beats
  unsigned queue_capacity = 8;    // grant queue bound (bus pipeline depth <= this)
};

// Transaction-level DDR controller: demand/hint command scheduler in front of
// per-bank FSMs, with an abstracted data path (beats are tokens).
class Ddrc final : public Component {
 public:
  Ddrc(const AddressMap& map, const DdrTiming& timing, const DdrcOptions& opts, TxnTable& table);

  std::string_view name() const override { return "ddrc"; }
  void eval(Cycle cycle) override;
  void commit(Cycle cycle) override;
  bool idle() const override { return cur_.queue.empty(); }

  // -- eval-phase pushes from the bus / master ports (take effect at commit)
  void enqueue_grant(const QueuedTxn& txn);
  void accept_next_info(const NextTxnInfo& info);
  void authorize_data(TxnId txn);

  // -- committed views (state as of the end of the previous cycle)
  const std::vector<BankState>& banks() const { return cur_.banks; }
  const std::vector<BankReportEntry>& bank_report() const { return cur_.report; }
  const std::vector<TxnId>& completed_last_cycle() const { return cur_.completed; }
  const std::vector<BeatEvent>& beats_last_cycle() const { return cur_.beats; }
  const DdrCommand& command_last_cycle() const { return cur_.command; }
  const std::deque<QueuedTxn>& queue() const { return cur_.queue; }
  std::optional<std::uint64_t> memory_fault_addr() const { return cur_.memory_fault; }

  // Single command per cycle, picked from committed state by priority:
  // column (row hit) > demand activate > hint activate > demand precharge >
  // hint precharge > nop; ties go to the lowest bank index.
  DdrCommand schedule_command(Cycle now) const;

  const AddressMap& map() const { return map_; }
  const DdrTiming& timing() const { return timing_; }
  const DdrcOptions& options() const { return opts_; }

  // Functional memory contents (beat address -> token); empty unless enabled.
  const std::map<std::uint64_t, std::uint64_t>& memory() const { return memory_; }

 private:
  struct State {
    std::vector<BankState> banks;
    std::vector<BankReportEntry> report;
    std::deque<QueuedTxn> queue;
    std::vector<TxnId> completed;   // popped this cycle
    std::vector<BeatEvent> beats;   // delivered this cycle
    DdrCommand command;             // issued this cycle
    Cycle data_busy_until = 0;      // last scheduled beat cycle
    std::optional<std::uint64_t> memory_fault;
  };

  // Index of the first queue entry whose column has not issued, if any.
  std::optional<std::size_t> next_column_index() const;
  bool bank_leader(std::size_t index) const;

  AddressMap map_;
  DdrTiming timing_;
  DdrcOptions opts_;
  TxnTable* table_;

  State cur_;
  DdrCommand pending_cmd_;
  std::set<TxnId> authorized_;  // committed; merged from inbox at commit

  // inboxes (filled during peers' eval, folded at our commit)
  std::vector<QueuedTxn> inbox_grants_;
  std::vector<NextTxnInfo> inbox_hints_;
  std::vector<TxnId> inbox_auth_;

  std::map<std::uint64_t, std::uint64_t> memory_;
};

}  // namespace qbsim
