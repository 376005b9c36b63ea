#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "qbsim/kernel.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

struct WriteBufferEntry {
  TxnId txn = 0;
  MasterId master = 0;
  std::uint64_t addr = 0;
  unsigned beats = 0;
  Cycle enqueue_cycle = 0;
};

// Posted-write FIFO. Absorbs writes whose master lost arbitration and drains
// by competing for the bus as a pseudo-master. All mutations are staged by
// the bus during Eval and folded here at Commit: pops (drain grants) first,
// then pushes, so occupancy never exceeds depth at any commit.
class WriteBuffer final : public Component {
 public:
  WriteBuffer(bool enabled, std::size_t depth);

  std::string_view name() const override { return "write-buffer"; }
  void eval(Cycle cycle) override;
  void commit(Cycle cycle) override;
  bool idle() const override { return cur_.entries.empty(); }

  bool enabled() const { return enabled_; }
  std::size_t depth() const { return depth_; }

  // -- committed views
  std::size_t occupancy() const { return cur_.entries.size(); }
  const std::deque<WriteBufferEntry>& entries() const { return cur_.entries; }
  // Head entry surfaced as the pseudo-master's pending request, if occupied.
  std::optional<WriteBufferEntry> drain_request() const;
  // histogram[k] = number of commits observed at occupancy k.
  const std::vector<std::uint64_t>& occupancy_histogram() const { return histogram_; }

  // -- bus-staged operations (Eval phase)
  // Accepts the losing write if enabled and space remains after earlier
  // postings this cycle; a same-cycle drain does not free space for posting.
  bool try_posted_write(const Transaction& txn, Cycle cycle);
  // Pseudo-master granted: pop the head at this cycle's commit.
  void stage_drain_pop();

 private:
  struct State {
    std::deque<WriteBufferEntry> entries;
  };

  bool enabled_;
  std::size_t depth_;

  State cur_;
  std::vector<WriteBufferEntry> staged_pushes_;
  bool staged_pop_ = false;
  std::vector<std::uint64_t> histogram_;
};

}  // namespace qbsim
