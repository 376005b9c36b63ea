#pragma once

#include <optional>
#include <string>

#include "qbsim/bus.hpp"
#include "qbsim/kernel.hpp"
#include "qbsim/rng.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

enum class PatternKind { Single, Burst4, Burst8, Mixed };
enum class OpMix { ReadOnly, WriteOnly };

const char* to_string(PatternKind kind);
const char* to_string(OpMix mix);

// Fixed value when min == max, otherwise a per-draw seeded uniform range.
struct RangeSpec {
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  bool fixed() const { return min == max; }
};

struct PatternSpec {
  PatternKind kind = PatternKind::Single;
  OpMix op_mix = OpMix::ReadOnly;
  std::uint64_t txn_count = 200;
  RangeSpec addr_stride{0, 0};    // 0 = advance by this transaction's bytes
  RangeSpec inter_arrival{0, 0};  // cycles from observed completion to next issue
  std::uint64_t stream_seed = 0;  // seeds burst/stride/gap draws
};

// Validates and fills a deterministic pattern; throws SimError(InvalidSpec).
PatternSpec make_pattern(PatternKind kind, OpMix op_mix, std::uint64_t txn_count,
                         std::uint64_t seed);

struct MasterModel {
  MasterId id = 0;
  PatternSpec pattern;
  bool rt = false;
  Cycle qos_objective = 0;
  int priority = 0;
  std::uint64_t base_addr = 0;
  std::uint64_t region_bytes = 0;  // addresses wrap inside [base, base+region)
  std::uint64_t seed = 0;
  std::uint64_t issued = 0;
  std::uint64_t completed = 0;
};

// Deterministic, seeded traffic generator driving one master port. One
// transaction outstanding at a time; writes post their data phase up front,
// reads start theirs on the observed grant.
class TrafficMaster final : public Component {
 public:
  TrafficMaster(const MasterModel& model, Bus& bus, TxnTable& table, const AddressMap& map);

  std::string_view name() const override { return name_; }
  void eval(Cycle cycle) override;
  void commit(Cycle cycle) override;
  bool idle() const override { return done() && !inflight_.has_value(); }

  bool done() const { return model_.completed >= model_.pattern.txn_count; }
  const MasterModel& model() const { return model_; }

  // Next transaction parameters if the master would issue at `cycle`;
  // advances the generator state when it fires.
  struct Stimulus {
    Op op;
    std::uint64_t addr;
    BurstKind burst;
  };
  std::optional<Stimulus> next_stimulus(Cycle cycle);

 private:
  BurstKind draw_burst();
  std::uint64_t advance_cursor(unsigned beats);

  MasterModel model_;
  std::string name_;
  Bus* bus_;
  TxnTable* table_;
  AddressMap map_;
  Rng rng_;

  std::optional<TxnId> inflight_;
  bool data_started_ = false;
  std::uint64_t cursor_ = 0;  // offset inside the region
  Cycle next_issue_at_ = 0;
};

}  // namespace qbsim
