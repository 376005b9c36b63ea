#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qbsim {

using Cycle = std::uint64_t;
using MasterId = std::uint32_t;
using TxnId = std::uint64_t;

enum class Op : std::uint8_t { Read, Write };

// Burst kinds map to AHB SINGLE/INCR4/INCR8; the enum value is the beat count.
enum class BurstKind : std::uint8_t { Single = 1, Incr4 = 4, Incr8 = 8 };

constexpr unsigned beats_of(BurstKind b) { return static_cast<unsigned>(b); }

const char* to_string(Op op);
const char* to_string(BurstKind b);
std::optional<BurstKind> burst_from_beats(unsigned beats);

// One bus transaction and its lifecycle timestamps. Stamped in order:
// issue <= grant <= first_data <= done. posted_cycle is set only for writes
// absorbed by the write buffer and marks the master-visible completion.
struct Transaction {
  TxnId id = 0;
  MasterId master = 0;
  Op op = Op::Read;
  std::uint64_t addr = 0;
  BurstKind burst = BurstKind::Single;

  std::optional<Cycle> issue_cycle;
  std::optional<Cycle> grant_cycle;
  std::optional<Cycle> first_data_cycle;
  std::optional<Cycle> done_cycle;
  std::optional<Cycle> posted_cycle;
  unsigned beats_delivered = 0;

  unsigned beats() const { return beats_of(burst); }
  bool master_done() const { return posted_cycle.has_value() || done_cycle.has_value(); }
  Cycle master_done_cycle() const;
};

// Central transaction registry. Ids are dense in allocation order. Fields are
// written at creation and during commit phases only; eval-phase code reads
// committed fields of transactions it learned about from committed state.
class TxnTable {
 public:
  TxnId create(MasterId master, Op op, std::uint64_t addr, BurstKind burst);
  Transaction& at(TxnId id);
  const Transaction& at(TxnId id) const;
  std::size_t size() const { return txns_.size(); }
  const std::vector<Transaction>& all() const { return txns_; }

 private:
  std::vector<Transaction> txns_;
};

}  // namespace qbsim
