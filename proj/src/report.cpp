#include "qbsim/report.hpp"

#include <sstream>

namespace qbsim {

namespace {

Json metrics_json(const MetricsReport& m) {
  Json j;
  j["total_cycles"] = m.total_cycles;
  j["utilization"] = m.utilization;
  j["contention"] = m.contention;
  j["total_beats"] = m.total_beats;
  j["beat_cycles"] = m.beat_cycles;
  j["buffer_occupancy_histogram"] = m.buffer_occupancy_histogram;
  Json per_master = Json::array();
  for (const PerMasterMetrics& pm : m.per_master) {
    Json e;
    e["master"] = pm.master;
    e["completed"] = pm.completed;
    e["bytes"] = pm.bytes;
    e["throughput_bytes_per_cycle"] = pm.throughput_bytes_per_cycle;
    e["grant_latency_mean"] = pm.grant_latency_mean;
    e["grant_latency_max"] = pm.grant_latency_max;
    e["completion_latency_mean"] = pm.completion_latency_mean;
    e["completion_latency_max"] = pm.completion_latency_max;
    e["qos_violations"] = pm.qos_violations;
    per_master.push_back(e);
  }
  j["per_master"] = per_master;
  return j;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void emit_scalar_row(std::ostream& os, const std::string& section, const std::string& key,
                     const Json& v) {
  os << section << ',' << key << ',';
  if (v.is_string()) {
    os << v.get<std::string>();
  } else if (v.is_number_float()) {
    os << fmt_double(v.get<double>());
  } else {
    os << v.dump();
  }
  os << '\n';
}

}  // namespace

Json report_json(const RunResult& result, const std::vector<std::string>& overrides) {
  Json doc;
  doc["schema_version"] = 1;
  doc["config"] = result.resolved_config;
  doc["overrides"] = overrides;
  Json summary;
  summary["total_cycles"] = result.summary.total_cycles;
  summary["completed_transactions"] = result.summary.completed_transactions;
  summary["terminated_reason"] = to_string(result.summary.terminated_reason);
  doc["summary"] = summary;
  doc["metrics"] = metrics_json(result.metrics);
  Json violations = Json::array();
  for (const Violation& v : result.violations) {
    Json e;
    e["cycle"] = v.cycle;
    e["kind"] = to_string(v.kind);
    e["rule"] = v.rule;
    e["message"] = v.message;
    violations.push_back(e);
  }
  doc["violations"] = violations;
  return doc;
}

std::string emit_report(const RunResult& result, ReportFormat format,
                        const std::vector<std::string>& overrides) {
  const Json doc = report_json(result, overrides);
  switch (format) {
    case ReportFormat::Struct:
      return doc.dump(2) + "\n";
    case ReportFormat::Table: {
      // Flat CSV: section,key,value. The config travels as one JSON cell so
      // the table re-imports losslessly.
      std::ostringstream os;
      os << "section,key,value\n";
      emit_scalar_row(os, "report", "schema_version", doc.at("schema_version"));
      os << "report,config," << doc.at("config").dump() << '\n';
      os << "report,overrides," << doc.at("overrides").dump() << '\n';
      for (const auto& [key, value] : doc.at("summary").items()) {
        emit_scalar_row(os, "summary", key, value);
      }
      const Json& m = doc.at("metrics");
      for (const auto& [key, value] : m.items()) {
        if (key == "per_master") continue;
        if (key == "buffer_occupancy_histogram") {
          os << "metrics," << key << ',' << value.dump() << '\n';
          continue;
        }
        emit_scalar_row(os, "metrics", key, value);
      }
      for (const Json& pm : m.at("per_master")) {
        const std::string section = "master." + pm.at("master").dump();
        for (const auto& [key, value] : pm.items()) {
          if (key == "master") continue;
          emit_scalar_row(os, section, key, value);
        }
      }
      for (std::size_t i = 0; i < doc.at("violations").size(); ++i) {
        os << "violation." << i << ",record," << doc.at("violations")[i].dump() << '\n';
      }
      return os.str();
    }
  }
  throw SimError(Errc::UnknownFormat, "unsupported report format");
}

std::map<std::string, std::string> parse_table_report(const std::string& text) {
  std::map<std::string, std::string> rows;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      if (line != "section,key,value") {
        throw SimError(Errc::ParseError, "missing table report header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw SimError(Errc::ParseError, "malformed table row: " + line);
    }
    rows[line.substr(0, c1) + "/" + line.substr(c1 + 1, c2 - c1 - 1)] = line.substr(c2 + 1);
  }
  return rows;
}

}  // namespace qbsim
