#pragma once

#include <map>
#include <string>
#include <vector>

#include "qbsim/config.hpp"
#include "qbsim/system.hpp"

namespace qbsim {

// Serialized run report. Struct = JSON with stable key order; Table = flat
// CSV (`section,key,value` rows). Both carry the resolved config and the
// override list so a report regenerates its own run. Output depends only on
// (config, seed): no wall-clock or host information is included.
std::string emit_report(const RunResult& result, ReportFormat format,
                        const std::vector<std::string>& overrides = {});

// Reimports a table-format report into section/key -> value form; the
// round-trip suites compare it against the struct export.
std::map<std::string, std::string> parse_table_report(const std::string& text);

Json report_json(const RunResult& result, const std::vector<std::string>& overrides);

}  // namespace qbsim
