#include "qbsim/write_buffer.hpp"

namespace qbsim {

WriteBuffer::WriteBuffer(bool enabled, std::size_t depth) : enabled_(enabled), depth_(depth) {
  histogram_.assign(depth_ + 1, 0);
}

std::optional<WriteBufferEntry> WriteBuffer::drain_request() const {
  if (cur_.entries.empty()) return std::nullopt;
  return cur_.entries.front();
}

bool WriteBuffer::try_posted_write(const Transaction& txn, Cycle cycle) {
  if (!enabled_) return false;
  if (cur_.entries.size() + staged_pushes_.size() >= depth_) return false;
  WriteBufferEntry e;
  e.txn = txn.id;
  e.master = txn.master;
  e.addr = txn.addr;
  e.beats = txn.beats();
  e.enqueue_cycle = cycle;
  staged_pushes_.push_back(e);
  return true;
}

void WriteBuffer::stage_drain_pop() { staged_pop_ = true; }

void WriteBuffer::eval(Cycle) {}

void WriteBuffer::commit(Cycle) {
  if (staged_pop_) {
    cur_.entries.pop_front();
    staged_pop_ = false;
  }
  for (const WriteBufferEntry& e : staged_pushes_) cur_.entries.push_back(e);
  staged_pushes_.clear();
  histogram_.at(cur_.entries.size())++;
}

}  // namespace qbsim
