#include "qbsim/presets.hpp"

#include <algorithm>

namespace qbsim {

namespace {

// Row-sized strides walk the banks transaction by transaction (bank-conflict
// rich, no master parks on one row); staggered start banks come from the
// generator. 32 KiB regions keep the 12 masters' footprints disjoint.
Json master_entry(const char* pattern, const char* op, std::uint64_t txn_count) {
  Json m;
  m["pattern"] = pattern;
  m["op"] = op;
  m["txn_count"] = txn_count;
  m["addr_stride"] = 2048;
  m["region_bytes"] = 32768;
  return m;
}

Json mix_preset(const char* pattern, int readers, int writers) {
  Json doc;
  Json masters = Json::array();
  for (int i = 0; i < readers; ++i) masters.push_back(master_entry(pattern, "read", 200));
  for (int i = 0; i < writers; ++i) masters.push_back(master_entry(pattern, "write", 200));
  doc["masters"] = masters;
  doc["run"] = {{"max_cycles", 500000}, {"seed", 1}, {"stop_when_idle", true}};
  return doc;
}

// One real-time single-beat reader against eleven saturating readers that
// outrank it statically. Only the QoS-urgency filter stands between the RT
// master and its objective.
Json qos_stress_preset() {
  Json doc;
  Json masters = Json::array();
  Json rt = master_entry("single", "read", 300);
  rt["rt"] = true;
  rt["qos_objective"] = 60;
  masters.push_back(rt);
  for (int i = 0; i < 11; ++i) {
    Json nrt = master_entry("burst4", "read", 300);
    nrt["priority"] = 1;
    masters.push_back(nrt);
  }
  doc["masters"] = masters;
  doc["bus"] = {{"qos_urgency_threshold", 24}};
  doc["run"] = {{"max_cycles", 500000}, {"seed", 1}, {"stop_when_idle", true}};
  return doc;
}

struct PresetDef {
  std::string name;
  Json doc;
};

const std::vector<PresetDef>& presets() {
  static const std::vector<PresetDef> defs = [] {
    std::vector<PresetDef> v;
    const char* kinds[] = {"single", "burst4", "burst8", "mixed"};
    for (const char* k : kinds) v.push_back({std::string("read_") + k, mix_preset(k, 12, 0)});
    for (const char* k : kinds) v.push_back({std::string("write_") + k, mix_preset(k, 0, 12)});
    for (const char* k : kinds) v.push_back({std::string("rw_") + k, mix_preset(k, 8, 4)});
    v.push_back({"qos_stress", qos_stress_preset()});
    return v;
  }();
  return defs;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& p : presets()) v.push_back(p.name);
    return v;
  }();
  return names;
}

bool is_preset(const std::string& name) {
  const auto& defs = presets();
  return std::any_of(defs.begin(), defs.end(),
                     [&](const PresetDef& p) { return p.name == name; });
}

std::string preset_text(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p.doc.dump(2) + "\n";
  }
  throw SimError(Errc::ValidationError, "unknown preset '" + name + "'");
}

SimConfig preset_config(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return config_from_json(p.doc);
  }
  throw SimError(Errc::ValidationError, "unknown preset '" + name + "'");
}

}  // namespace qbsim
