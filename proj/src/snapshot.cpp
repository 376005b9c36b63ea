#include "qbsim/snapshot.hpp"

#include <sstream>

namespace qbsim {

std::string CycleSnapshot::to_line() const {
  std::ostringstream os;
  os << "c" << cycle << "|g:";
  for (MasterId m : granted) os << m << ",";
  os << "|req:";
  for (MasterId m : requesters) os << m << ",";
  if (decision) {
    os << "|ft:";
    for (const auto& stage : decision->filter_trace) {
      for (MasterId m : stage) os << m << ",";
      os << ";";
    }
    os << "t" << decision->txn;
  }
  os << "|pend:";
  for (const auto& p : pending) os << p.master << ":" << p.txn << ",";
  os << "|banks:";
  for (const auto& b : banks) {
    os << to_string(b.phase)[0] << b.open_row << "." << b.remaining << "." << b.active_since
       << "." << b.burst_last_beat << ",";
  }
  os << "|cmd:";
  for (const auto& c : commands) os << to_string(c) << ",";
  os << "|beat:";
  for (const auto& b : beats) os << b.txn << "." << b.index << "." << b.addr << ",";
  os << "|wb:" << wb_occupancy << "/" << wb_depth;
  os << "|qos:";
  for (const auto& q : qos) {
    os << q.master << "." << (q.rt ? "r" : "n") << q.since_last_grant << "." << q.violations
       << (q.crossed_now ? "!" : "") << ",";
  }
  if (memory_fault) os << "|memfault:" << memory_fault_addr;
  return os.str();
}

}  // namespace qbsim
