#include "qbsim/types.hpp"

#include "qbsim/errors.hpp"

namespace qbsim {

const char* to_string(Op op) { return op == Op::Read ? "read" : "write"; }

const char* to_string(BurstKind b) {
  switch (b) {
    case BurstKind::Single: return "single";
    case BurstKind::Incr4: return "incr4";
    case BurstKind::Incr8: return "incr8";
  }
  return "?";
}

std::optional<BurstKind> burst_from_beats(unsigned beats) {
  switch (beats) {
    case 1: return BurstKind::Single;
    case 4: return BurstKind::Incr4;
    case 8: return BurstKind::Incr8;
    default: return std::nullopt;
  }
}

Cycle Transaction::master_done_cycle() const {
  if (posted_cycle) return *posted_cycle;
  return done_cycle.value();
}

TxnId TxnTable::create(MasterId master, Op op, std::uint64_t addr, BurstKind burst) {
  Transaction t;
  t.id = static_cast<TxnId>(txns_.size());
  t.master = master;
  t.op = op;
  t.addr = addr;
  t.burst = burst;
  txns_.push_back(t);
  return t.id;
}

Transaction& TxnTable::at(TxnId id) { return txns_.at(id); }

const Transaction& TxnTable::at(TxnId id) const { return txns_.at(id); }

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::RegistrationAfterStart: return "RegistrationAfterStart";
    case Errc::OutstandingRequest: return "OutstandingRequest";
    case Errc::UnknownMaster: return "UnknownMaster";
    case Errc::NotGranted: return "NotGranted";
    case Errc::AddressOutOfRange: return "AddressOutOfRange";
    case Errc::MisalignedAddress: return "MisalignedAddress";
    case Errc::BurstCrossesRow: return "BurstCrossesRow";
    case Errc::IllegalCommand: return "IllegalCommand";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::ZeroCycles: return "ZeroCycles";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::Precondition: return "Precondition";
  }
  return "Unknown";
}

}  // namespace qbsim
