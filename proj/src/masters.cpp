#include "qbsim/masters.hpp"

namespace qbsim {

const char* to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::Single: return "single";
    case PatternKind::Burst4: return "burst4";
    case PatternKind::Burst8: return "burst8";
    case PatternKind::Mixed: return "mixed";
  }
  return "?";
}

const char* to_string(OpMix mix) { return mix == OpMix::ReadOnly ? "read" : "write"; }

PatternSpec make_pattern(PatternKind kind, OpMix op_mix, std::uint64_t txn_count,
                         std::uint64_t seed) {
  if (txn_count == 0) {
    throw SimError(Errc::InvalidSpec, "txn_count must be > 0");
  }
  PatternSpec spec;
  spec.kind = kind;
  spec.op_mix = op_mix;
  spec.txn_count = txn_count;
  spec.stream_seed = seed;
  return spec;
}

TrafficMaster::TrafficMaster(const MasterModel& model, Bus& bus, TxnTable& table,
                             const AddressMap& map)
    : model_(model),
      name_("master" + std::to_string(model.id)),
      bus_(&bus),
      table_(&table),
      map_(map),
      rng_(model.pattern.stream_seed) {
  // Stagger starting banks so same-region master groups spread across banks.
  cursor_ = ((model_.id % map_.banks()) * map_.row_bytes()) % model_.region_bytes;
  next_issue_at_ = model_.pattern.inter_arrival.fixed()
                       ? model_.pattern.inter_arrival.min
                       : rng_.range(model_.pattern.inter_arrival.min, model_.pattern.inter_arrival.max);
}

BurstKind TrafficMaster::draw_burst() {
  switch (model_.pattern.kind) {
    case PatternKind::Single: return BurstKind::Single;
    case PatternKind::Burst4: return BurstKind::Incr4;
    case PatternKind::Burst8: return BurstKind::Incr8;
    case PatternKind::Mixed: {
      // Uniform over the three kinds, on the master's seeded stream.
      switch (rng_.below(3)) {
        case 0: return BurstKind::Single;
        case 1: return BurstKind::Incr4;
        default: return BurstKind::Incr8;
      }
    }
  }
  return BurstKind::Single;
}

std::uint64_t TrafficMaster::advance_cursor(unsigned beats) {
  const std::uint64_t beat_bytes = map_.bytes_per_beat();
  const std::uint64_t bytes = beats * beat_bytes;
  const std::uint64_t row = map_.row_bytes();
  const std::uint64_t region = model_.region_bytes;

  // Keep every burst inside one row (bases are row-aligned by validation).
  if (cursor_ % row + bytes > row) {
    cursor_ = (cursor_ / row + 1) * row;
  }
  if (cursor_ + bytes > region) cursor_ = 0;
  const std::uint64_t addr = model_.base_addr + cursor_;

  const RangeSpec& stride = model_.pattern.addr_stride;
  std::uint64_t step;
  if (stride.fixed() && stride.min == 0) {
    step = bytes;
  } else {
    step = stride.fixed() ? stride.min : rng_.range(stride.min, stride.max);
    step -= step % beat_bytes;
    if (step == 0) step = beat_bytes;
  }
  cursor_ = (cursor_ + step) % region;
  return addr;
}

std::optional<TrafficMaster::Stimulus> TrafficMaster::next_stimulus(Cycle cycle) {
  if (model_.issued >= model_.pattern.txn_count || inflight_.has_value() ||
      cycle < next_issue_at_) {
    return std::nullopt;
  }
  Stimulus s;
  s.op = model_.pattern.op_mix == OpMix::ReadOnly ? Op::Read : Op::Write;
  s.burst = draw_burst();
  s.addr = advance_cursor(beats_of(s.burst));
  model_.issued++;
  return s;
}

void TrafficMaster::eval(Cycle cycle) {
  // Completion observation frees the port; with a zero gap the next request
  // goes out this same cycle.
  if (inflight_) {
    const Transaction& t = table_->at(*inflight_);
    if (t.master_done()) {
      model_.completed++;
      inflight_.reset();
      data_started_ = false;
      const RangeSpec& gap = model_.pattern.inter_arrival;
      const Cycle g = gap.fixed() ? gap.min : rng_.range(gap.min, gap.max);
      next_issue_at_ = cycle + g;
    }
  }

  // Reads start their data phase on the observed grant.
  if (inflight_ && !data_started_ && bus_->check_grant(model_.id)) {
    const Transaction& t = table_->at(*inflight_);
    if (t.op == Op::Read) {
      bus_->read(model_.id, t.addr, t.burst);
      data_started_ = true;
    }
  }

  if (auto s = next_stimulus(cycle)) {
    const TxnId txn = table_->create(model_.id, s->op, s->addr, s->burst);
    bus_->request(model_.id, txn);
    inflight_ = txn;
    if (s->op == Op::Write) {
      // Writes post their data phase up front; a buffered completion needs
      // no grant observation.
      bus_->write(model_.id, s->addr, s->burst, beats_of(s->burst));
      data_started_ = true;
    }
  }
}

void TrafficMaster::commit(Cycle) {}

}  // namespace qbsim
