#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbsim/checker.hpp"
#include "qbsim/ddrc.hpp"
#include "qbsim/masters.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

using Json = nlohmann::ordered_json;

enum class ReportFormat { Struct, Table };

const char* to_string(ReportFormat fmt);

struct MasterConfig {
  PatternKind pattern = PatternKind::Single;
  OpMix op = OpMix::ReadOnly;
  bool rt = false;
  Cycle qos_objective = 0;
  std::uint64_t txn_count = 200;
  RangeSpec inter_arrival{0, 0};
  std::optional<RangeSpec> addr_stride;    // default: this transaction's bytes
  std::optional<std::uint64_t> base_addr;  // default: id * row_bytes
  std::optional<std::uint64_t> region_bytes;  // default: one row
  int priority = 0;
};

struct SimConfig {
  // bus
  unsigned bus_width_bits = 64;
  unsigned pipeline_depth = 6;
  MasterId rr_pointer_init = 0;
  Cycle qos_urgency_threshold = 16;
  // filters 1..7 (indices 0..6); 1 and 7 are validated always-on
  std::array<bool, 7> filters{{true, true, true, true, true, true, true}};
  // write buffer
  bool wb_enabled = true;
  std::size_t wb_depth = 4;
  // ddr
  DdrTiming timing;
  unsigned banks = 4;
  unsigned col_bits = 8;
  unsigned row_bits = 13;
  bool lookahead_hints = true;
  bool functional_memory = false;
  // masters
  std::vector<MasterConfig> masters;
  // run
  Cycle max_cycles = 1'000'000;
  std::uint64_t seed = 1;
  bool stop_when_idle = true;
  // outputs
  ReportFormat format = ReportFormat::Struct;
  bool trace = false;
  // checking
  CheckerConfig checker;
  std::optional<FaultInjection> fault_injection;

  AddressMap address_map() const;
  BusConfig bus_config() const;
  DdrcOptions ddrc_options() const;
};

// Parse + validate a config document. Defaults are filled, unknown keys are
// rejected. Throws SimError(ParseError) on malformed text and
// SimError(ValidationError) on schema violations. A report file (object with
// a top-level "config" key) is accepted and re-runs its embedded config.
SimConfig parse_config(const std::string& text);
SimConfig config_from_json(const Json& doc);

// `key=value` override on the raw document, dotted path addressing
// (e.g. filters.F5=off, masters.2.rt=true, ddr.t_rcd=4).
void apply_override(Json& doc, const std::string& assignment);

// Fully resolved document (user keys + defaults): parsing it again yields an
// identical config, which is what the report echoes for reproducibility.
Json resolved_json(const SimConfig& cfg);

}  // namespace qbsim
