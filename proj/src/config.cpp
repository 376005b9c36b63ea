#include "qbsim/config.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace qbsim {

const char* to_string(ReportFormat fmt) { return fmt == ReportFormat::Struct ? "struct" : "table"; }

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& reason) {
  throw SimError(Errc::ValidationError, path + ": " + reason);
}

void expect_object(const Json& j, const std::string& path) {
  if (!j.is_object()) invalid(path, "expected an object");
}

void check_known_keys(const Json& j, const std::string& path,
                      const std::vector<std::string>& known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      invalid(path.empty() ? key : path + "." + key, "unknown key");
    }
  }
}

std::uint64_t get_uint(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    invalid(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool get_bool(const Json& j, const std::string& path) {
  if (!j.is_boolean()) invalid(path, "expected true or false");
  return j.get<bool>();
}

RangeSpec get_range(const Json& j, const std::string& path) {
  RangeSpec r;
  if (j.is_number()) {
    r.min = r.max = get_uint(j, path);
    return r;
  }
  if (!j.is_object()) invalid(path, "expected an integer or {min, max}");
  check_known_keys(j, path, {"min", "max"});
  if (!j.contains("min") || !j.contains("max")) invalid(path, "needs both min and max");
  r.min = get_uint(j.at("min"), path + ".min");
  r.max = get_uint(j.at("max"), path + ".max");
  if (r.min > r.max) invalid(path, "min exceeds max");
  return r;
}

PatternKind parse_pattern(const std::string& s, const std::string& path) {
  if (s == "single") return PatternKind::Single;
  if (s == "burst4") return PatternKind::Burst4;
  if (s == "burst8") return PatternKind::Burst8;
  if (s == "mixed") return PatternKind::Mixed;
  invalid(path, "unknown pattern '" + s + "' (single|burst4|burst8|mixed)");
}

OpMix parse_op(const std::string& s, const std::string& path) {
  if (s == "read") return OpMix::ReadOnly;
  if (s == "write") return OpMix::WriteOnly;
  invalid(path, "unknown op '" + s + "' (read|write)");
}

// Canonical filter key order = filter index order.
const std::vector<std::string> kFilterKeys = {
    "request_valid",  "access_permission", "qos_urgent", "write_buffer_pressure",
    "idle_bank",      "static_priority",   "round_robin"};

}  // namespace

AddressMap SimConfig::address_map() const {
  AddressMap m;
  m.bus_width_bits = bus_width_bits;
  m.col_bits = col_bits;
  m.bank_bits = static_cast<unsigned>(std::countr_zero(banks));
  m.row_bits = row_bits;
  return m;
}

BusConfig SimConfig::bus_config() const {
  BusConfig b;
  b.width_bits = bus_width_bits;
  b.pipeline_depth = pipeline_depth;
  b.rr_pointer_init = rr_pointer_init;
  b.qos_urgency_threshold = qos_urgency_threshold;
  b.filter_enabled = filters;
  for (const MasterConfig& m : masters) b.static_priority.push_back(m.priority);
  return b;
}

DdrcOptions SimConfig::ddrc_options() const {
  DdrcOptions o;
  o.lookahead_hints = lookahead_hints;
  o.functional_memory = functional_memory;
  o.queue_capacity = std::max(8u, pipeline_depth);
  return o;
}

SimConfig config_from_json(const Json& input) {
  Json doc = input;
  // A report re-runs its own embedded resolved config.
  if (doc.is_object() && doc.contains("schema_version") && doc.contains("config")) {
    doc = doc.at("config");
  }
  expect_object(doc, "");
  check_known_keys(doc, "",
                   {"bus", "filters", "write_buffer", "ddr", "masters", "run", "outputs",
                    "checker", "fault_injection"});

  SimConfig cfg;

  if (doc.contains("bus")) {
    const Json& j = doc.at("bus");
    expect_object(j, "bus");
    check_known_keys(j, "bus",
                     {"width_bits", "pipeline_depth", "rr_pointer_init", "qos_urgency_threshold"});
    if (j.contains("width_bits")) {
      cfg.bus_width_bits = static_cast<unsigned>(get_uint(j.at("width_bits"), "bus.width_bits"));
      if (cfg.bus_width_bits != 32 && cfg.bus_width_bits != 64 && cfg.bus_width_bits != 128) {
        invalid("bus.width_bits", "must be 32, 64 or 128");
      }
    }
    if (j.contains("pipeline_depth")) {
      cfg.pipeline_depth =
          static_cast<unsigned>(get_uint(j.at("pipeline_depth"), "bus.pipeline_depth"));
      if (cfg.pipeline_depth < 1 || cfg.pipeline_depth > 8) {
        invalid("bus.pipeline_depth", "must be in 1..8");
      }
    }
    if (j.contains("rr_pointer_init")) {
      cfg.rr_pointer_init =
          static_cast<MasterId>(get_uint(j.at("rr_pointer_init"), "bus.rr_pointer_init"));
    }
    if (j.contains("qos_urgency_threshold")) {
      cfg.qos_urgency_threshold = get_uint(j.at("qos_urgency_threshold"), "bus.qos_urgency_threshold");
    }
  }

  if (doc.contains("filters")) {
    const Json& j = doc.at("filters");
    expect_object(j, "filters");
    check_known_keys(j, "filters", kFilterKeys);
    for (std::size_t k = 0; k < kFilterKeys.size(); ++k) {
      if (j.contains(kFilterKeys[k])) {
        cfg.filters[k] = get_bool(j.at(kFilterKeys[k]), "filters." + kFilterKeys[k]);
      }
    }
    if (!cfg.filters[0]) invalid("filters.request_valid", "filter 1 cannot be disabled");
    if (!cfg.filters[6]) invalid("filters.round_robin", "filter 7 cannot be disabled");
  }

  if (doc.contains("write_buffer")) {
    const Json& j = doc.at("write_buffer");
    expect_object(j, "write_buffer");
    check_known_keys(j, "write_buffer", {"enabled", "depth"});
    if (j.contains("enabled")) cfg.wb_enabled = get_bool(j.at("enabled"), "write_buffer.enabled");
    if (j.contains("depth")) cfg.wb_depth = get_uint(j.at("depth"), "write_buffer.depth");
    if (cfg.wb_enabled && cfg.wb_depth == 0) {
      invalid("write_buffer.depth", "must be >= 1 while the buffer is enabled");
    }
    if (cfg.wb_depth > 64) invalid("write_buffer.depth", "must be <= 64");
  }

  if (doc.contains("ddr")) {
    const Json& j = doc.at("ddr");
    expect_object(j, "ddr");
    check_known_keys(j, "ddr",
                     {"t_rcd", "t_rp", "t_cl", "t_ras", "banks", "col_bits", "row_bits",
                      "lookahead_hints", "functional_memory"});
    auto timing_field = [&](const char* key, unsigned& out) {
      if (j.contains(key)) {
        out = static_cast<unsigned>(get_uint(j.at(key), std::string("ddr.") + key));
        if (out < 1 || out > 64) invalid(std::string("ddr.") + key, "must be in 1..64");
      }
    };
    timing_field("t_rcd", cfg.timing.t_rcd);
    timing_field("t_rp", cfg.timing.t_rp);
    timing_field("t_cl", cfg.timing.t_cl);
    timing_field("t_ras", cfg.timing.t_ras);
    if (cfg.timing.t_ras < cfg.timing.t_rcd) invalid("ddr.t_ras", "must be >= t_rcd");
    if (j.contains("banks")) {
      cfg.banks = static_cast<unsigned>(get_uint(j.at("banks"), "ddr.banks"));
      if (!std::has_single_bit(cfg.banks) || cfg.banks < 1 || cfg.banks > 16) {
        invalid("ddr.banks", "must be a power of two in 1..16");
      }
    }
    if (j.contains("col_bits")) {
      cfg.col_bits = static_cast<unsigned>(get_uint(j.at("col_bits"), "ddr.col_bits"));
      if (cfg.col_bits < 3 || cfg.col_bits > 12) invalid("ddr.col_bits", "must be in 3..12");
    }
    if (j.contains("row_bits")) {
      cfg.row_bits = static_cast<unsigned>(get_uint(j.at("row_bits"), "ddr.row_bits"));
      if (cfg.row_bits < 1 || cfg.row_bits > 20) invalid("ddr.row_bits", "must be in 1..20");
    }
    if (j.contains("lookahead_hints")) {
      cfg.lookahead_hints = get_bool(j.at("lookahead_hints"), "ddr.lookahead_hints");
    }
    if (j.contains("functional_memory")) {
      cfg.functional_memory = get_bool(j.at("functional_memory"), "ddr.functional_memory");
    }
  }

  if (doc.contains("masters")) {
    const Json& arr = doc.at("masters");
    if (!arr.is_array()) invalid("masters", "expected an array");
    const AddressMap map = cfg.address_map();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const Json& j = arr.at(i);
      const std::string path = "masters." + std::to_string(i);
      expect_object(j, path);
      check_known_keys(j, path,
                       {"pattern", "op", "rt", "qos_objective", "txn_count", "inter_arrival",
                        "addr_stride", "base_addr", "region_bytes", "priority"});
      MasterConfig m;
      if (j.contains("pattern")) {
        m.pattern = parse_pattern(j.at("pattern").get<std::string>(), path + ".pattern");
      }
      if (j.contains("op")) m.op = parse_op(j.at("op").get<std::string>(), path + ".op");
      if (j.contains("rt")) m.rt = get_bool(j.at("rt"), path + ".rt");
      if (j.contains("qos_objective")) {
        m.qos_objective = get_uint(j.at("qos_objective"), path + ".qos_objective");
      }
      if (m.rt && m.qos_objective == 0) {
        invalid(path + ".qos_objective", "an RT master needs a positive objective");
      }
      if (j.contains("txn_count")) {
        m.txn_count = get_uint(j.at("txn_count"), path + ".txn_count");
        if (m.txn_count == 0) invalid(path + ".txn_count", "must be >= 1");
      }
      if (j.contains("inter_arrival")) {
        m.inter_arrival = get_range(j.at("inter_arrival"), path + ".inter_arrival");
      }
      if (j.contains("addr_stride") && !j.at("addr_stride").is_null()) {
        m.addr_stride = get_range(j.at("addr_stride"), path + ".addr_stride");
        if (m.addr_stride->max != 0 && m.addr_stride->min % map.bytes_per_beat() != 0) {
          invalid(path + ".addr_stride", "must be a multiple of the bus width");
        }
      }
      if (j.contains("base_addr") && !j.at("base_addr").is_null()) {
        m.base_addr = get_uint(j.at("base_addr"), path + ".base_addr");
        if (*m.base_addr % map.row_bytes() != 0) {
          invalid(path + ".base_addr", "must be row-aligned (multiple of " +
                                           std::to_string(map.row_bytes()) + ")");
        }
      }
      if (j.contains("region_bytes") && !j.at("region_bytes").is_null()) {
        m.region_bytes = get_uint(j.at("region_bytes"), path + ".region_bytes");
        if (*m.region_bytes < map.row_bytes() || *m.region_bytes % map.row_bytes() != 0) {
          invalid(path + ".region_bytes", "must be a positive multiple of the row size");
        }
      }
      if (j.contains("priority")) {
        if (!j.at("priority").is_number_integer()) invalid(path + ".priority", "expected an integer");
        m.priority = j.at("priority").get<int>();
      }
      cfg.masters.push_back(m);
    }
  }

  if (doc.contains("run")) {
    const Json& j = doc.at("run");
    expect_object(j, "run");
    check_known_keys(j, "run", {"max_cycles", "seed", "stop_when_idle"});
    if (j.contains("max_cycles")) {
      cfg.max_cycles = get_uint(j.at("max_cycles"), "run.max_cycles");
      if (cfg.max_cycles == 0) invalid("run.max_cycles", "must be >= 1");
    }
    if (j.contains("seed")) cfg.seed = get_uint(j.at("seed"), "run.seed");
    if (j.contains("stop_when_idle")) {
      cfg.stop_when_idle = get_bool(j.at("stop_when_idle"), "run.stop_when_idle");
    }
  }

  if (doc.contains("outputs")) {
    const Json& j = doc.at("outputs");
    expect_object(j, "outputs");
    check_known_keys(j, "outputs", {"format", "trace"});
    if (j.contains("format")) {
      const std::string f = j.at("format").get<std::string>();
      if (f == "struct") {
        cfg.format = ReportFormat::Struct;
      } else if (f == "table") {
        cfg.format = ReportFormat::Table;
      } else {
        invalid("outputs.format", "must be 'struct' or 'table'");
      }
    }
    if (j.contains("trace")) cfg.trace = get_bool(j.at("trace"), "outputs.trace");
  }

  if (doc.contains("checker")) {
    const Json& j = doc.at("checker");
    expect_object(j, "checker");
    check_known_keys(j, "checker", {"enabled", "starvation_bound"});
    if (j.contains("enabled")) cfg.checker.enabled = get_bool(j.at("enabled"), "checker.enabled");
    if (j.contains("starvation_bound")) {
      cfg.checker.starvation_bound = get_uint(j.at("starvation_bound"), "checker.starvation_bound");
    }
  }

  if (doc.contains("fault_injection") && !doc.at("fault_injection").is_null()) {
    const Json& j = doc.at("fault_injection");
    expect_object(j, "fault_injection");
    check_known_keys(j, "fault_injection", {"rule", "cycle"});
    if (!j.contains("rule")) invalid("fault_injection.rule", "required");
    FaultInjection f;
    f.rule = j.at("rule").get<std::string>();
    const auto& rules = checker_rule_ids();
    if (std::find(rules.begin(), rules.end(), f.rule) == rules.end()) {
      invalid("fault_injection.rule", "unknown rule '" + f.rule + "'");
    }
    if (j.contains("cycle")) f.cycle = get_uint(j.at("cycle"), "fault_injection.cycle");
    cfg.fault_injection = f;
  }

  return cfg;
}

SimConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SimError(Errc::ParseError, e.what());
  }
  return config_from_json(doc);
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw SimError(Errc::ValidationError, "override must look like key.path=value: " + assignment);
  }
  std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  // F1..F7 aliases for the filter flags.
  for (std::size_t k = 0; k < kFilterKeys.size(); ++k) {
    const std::string upper = "filters.F" + std::to_string(k + 1);
    const std::string lower = "filters.f" + std::to_string(k + 1);
    if (path == upper || path == lower) path = "filters." + kFilterKeys[k];
  }

  Json value;
  if (raw == "on" || raw == "ON") {
    value = true;
  } else if (raw == "off" || raw == "OFF") {
    value = false;
  } else {
    try {
      value = Json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      value = raw;  // plain string
    }
  }

  Json* node = &doc;
  std::istringstream tokens(path);
  std::string tok;
  std::vector<std::string> parts;
  while (std::getline(tokens, tok, '.')) parts.push_back(tok);
  if (parts.empty()) throw SimError(Errc::ValidationError, "empty override path");

  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& p = parts[i];
    const bool is_index = !p.empty() && std::all_of(p.begin(), p.end(), ::isdigit);
    if (is_index) {
      if (!node->is_array()) throw SimError(Errc::ValidationError, p + ": not an array");
      const std::size_t idx = std::stoul(p);
      if (idx >= node->size()) throw SimError(Errc::ValidationError, p + ": index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) throw SimError(Errc::ValidationError, p + ": not an object");
      node = &(*node)[p];  // creates an object slot if missing
    }
  }
  const std::string& last = parts.back();
  if (!last.empty() && std::all_of(last.begin(), last.end(), ::isdigit) && node->is_array()) {
    const std::size_t idx = std::stoul(last);
    if (idx >= node->size()) throw SimError(Errc::ValidationError, last + ": index out of range");
    (*node)[idx] = value;
  } else {
    (*node)[last] = value;
  }
}

Json resolved_json(const SimConfig& cfg) {
  const AddressMap map = cfg.address_map();
  Json doc;
  doc["bus"] = {{"width_bits", cfg.bus_width_bits},
                {"pipeline_depth", cfg.pipeline_depth},
                {"rr_pointer_init", cfg.rr_pointer_init},
                {"qos_urgency_threshold", cfg.qos_urgency_threshold}};
  Json filters;
  for (std::size_t k = 0; k < kFilterKeys.size(); ++k) filters[kFilterKeys[k]] = cfg.filters[k];
  doc["filters"] = filters;
  doc["write_buffer"] = {{"enabled", cfg.wb_enabled}, {"depth", cfg.wb_depth}};
  doc["ddr"] = {{"t_rcd", cfg.timing.t_rcd},
                {"t_rp", cfg.timing.t_rp},
                {"t_cl", cfg.timing.t_cl},
                {"t_ras", cfg.timing.t_ras},
                {"banks", cfg.banks},
                {"col_bits", cfg.col_bits},
                {"row_bits", cfg.row_bits},
                {"lookahead_hints", cfg.lookahead_hints},
                {"functional_memory", cfg.functional_memory}};
  Json masters = Json::array();
  for (std::size_t i = 0; i < cfg.masters.size(); ++i) {
    const MasterConfig& m = cfg.masters[i];
    Json jm;
    jm["pattern"] = to_string(m.pattern);
    jm["op"] = to_string(m.op);
    jm["rt"] = m.rt;
    jm["qos_objective"] = m.qos_objective;
    jm["txn_count"] = m.txn_count;
    if (m.inter_arrival.fixed()) {
      jm["inter_arrival"] = m.inter_arrival.min;
    } else {
      jm["inter_arrival"] = {{"min", m.inter_arrival.min}, {"max", m.inter_arrival.max}};
    }
    if (m.addr_stride) {
      if (m.addr_stride->fixed()) {
        jm["addr_stride"] = m.addr_stride->min;
      } else {
        jm["addr_stride"] = {{"min", m.addr_stride->min}, {"max", m.addr_stride->max}};
      }
    } else {
      jm["addr_stride"] = nullptr;
    }
    const std::uint64_t region = m.region_bytes.value_or(map.row_bytes());
    jm["base_addr"] = m.base_addr ? Json(*m.base_addr) : Json(i * region);
    jm["region_bytes"] = region;
    jm["priority"] = m.priority;
    masters.push_back(jm);
  }
  doc["masters"] = masters;
  doc["run"] = {{"max_cycles", cfg.max_cycles},
                {"seed", cfg.seed},
                {"stop_when_idle", cfg.stop_when_idle}};
  doc["outputs"] = {{"format", to_string(cfg.format)}, {"trace", cfg.trace}};
  doc["checker"] = {{"enabled", cfg.checker.enabled},
                    {"starvation_bound", cfg.checker.starvation_bound}};
  if (cfg.fault_injection) {
    doc["fault_injection"] = {{"rule", cfg.fault_injection->rule},
                              {"cycle", cfg.fault_injection->cycle}};
  }
  return doc;
}

}  // namespace qbsim
