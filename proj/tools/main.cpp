#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbsim/presets.hpp"
#include "qbsim/report.hpp"
#include "qbsim/system.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qbsim::SimError(qbsim::Errc::ValidationError, "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Relative outputs land in QBSIM_OUT_DIR when it is set.
fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_absolute()) return p;
  if (const char* dir = std::getenv("QBSIM_OUT_DIR")) return fs::path(dir) / p;
  return p;
}

int run_command(const std::string& config_path, const std::string& preset,
                const std::vector<std::string>& overrides, const std::string& out_path,
                const std::string& trace_path, const std::string& format_flag,
                std::uint64_t seed, bool seed_set, std::uint64_t max_cycles,
                bool max_cycles_set) {
  using namespace qbsim;

  Json doc;
  if (!preset.empty()) {
    doc = Json::parse(preset_text(preset));
  } else if (config_path.rfind("preset:", 0) == 0) {
    doc = Json::parse(preset_text(config_path.substr(7)));
  } else {
    try {
      doc = Json::parse(read_file(config_path));
    } catch (const nlohmann::json::parse_error& e) {
      throw SimError(Errc::ParseError, e.what());
    }
  }
  if (doc.is_object() && doc.contains("schema_version") && doc.contains("config")) {
    doc = doc.at("config");
  }

  for (const std::string& assignment : overrides) apply_override(doc, assignment);
  if (seed_set) apply_override(doc, "run.seed=" + std::to_string(seed));
  if (max_cycles_set) apply_override(doc, "run.max_cycles=" + std::to_string(max_cycles));

  SimConfig cfg = config_from_json(doc);
  if (!format_flag.empty()) {
    if (format_flag == "struct") {
      cfg.format = ReportFormat::Struct;
    } else if (format_flag == "table") {
      cfg.format = ReportFormat::Table;
    } else {
      throw SimError(Errc::UnknownFormat, "--format must be struct or table");
    }
  }

  RunOptions opts;
  std::ofstream trace_file;
  std::string trace_target = trace_path;
  if (trace_target.empty() && cfg.trace) trace_target = "trace.csv";
  if (!trace_target.empty()) {
    const fs::path p = resolve_output(trace_target);
    trace_file.open(p, std::ios::binary);
    if (!trace_file) throw SimError(Errc::ValidationError, "cannot write " + p.string());
    opts.trace_sink = &trace_file;
  }

  RunResult result = run_simulation(cfg, opts);

  const std::string report = emit_report(result, cfg.format, overrides);
  std::string out_target = out_path;
  if (out_target.empty()) {
    out_target = cfg.format == ReportFormat::Struct ? "report.json" : "report.csv";
  }
  const fs::path out = resolve_output(out_target);
  {
    std::ofstream of(out, std::ios::binary);
    if (!of) throw SimError(Errc::ValidationError, "cannot write " + out.string());
    of << report;
  }

  const double kcps = result.wall_seconds > 0.0
                          ? result.summary.total_cycles / result.wall_seconds / 1000.0
                          : 0.0;
  std::cout << "simulated " << result.summary.total_cycles << " cycles ("
            << to_string(result.summary.terminated_reason) << "), "
            << result.summary.completed_transactions << " transactions, "
            << result.violations.size() << " violations\n";
  std::cout << "report: " << out.string();
  if (opts.trace_sink) std::cout << "  trace: " << resolve_output(trace_target).string();
  std::cout << "\n";
  std::cout.setf(std::ios::fixed);
  std::cout.precision(1);
  std::cout << "speed: " << kcps << " Kcycles/s (" << result.wall_seconds << " s wall)\n";

  return result.summary.terminated_reason == qbsim::StopReason::AssertionAbort ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbsim - QoS bus + DDR controller transaction-level simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a simulation from a config file or preset");
  std::string config_path, preset, out_path, trace_path, format_flag;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0, max_cycles = 0;
  auto* config_opt = run->add_option("--config", config_path, "config file (or preset:<name>)");
  auto* preset_opt = run->add_option("--preset", preset, "named preset");
  run->add_option("--set", overrides, "override a config key, e.g. filters.F5=off")
      ->take_all();
  auto* seed_opt = run->add_option("--seed", seed, "override run.seed");
  auto* cycles_opt = run->add_option("--max-cycles", max_cycles, "override run.max_cycles");
  run->add_option("--out", out_path, "report output path");
  run->add_option("--trace", trace_path, "write the raw event trace (CSV)");
  run->add_option("--format", format_flag, "report format: struct|table");

  // presets
  auto* presets_cmd = app.add_subcommand("presets", "inspect the shipped scenario presets");
  auto* list_cmd = presets_cmd->add_subcommand("list", "list preset names");
  auto* show_cmd = presets_cmd->add_subcommand("show", "print one preset config");
  std::string show_name;
  show_cmd->add_option("name", show_name, "preset name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (config_opt->count() == 0 && preset_opt->count() == 0) {
        std::cerr << "error: run needs --config or --preset\n";
        return 1;
      }
      return run_command(config_path, preset, overrides, out_path, trace_path, format_flag,
                         seed, seed_opt->count() > 0, max_cycles, cycles_opt->count() > 0);
    }
    if (presets_cmd->parsed()) {
      if (list_cmd->parsed()) {
        for (const auto& name : qbsim::preset_names()) std::cout << name << "\n";
        return 0;
      }
      if (show_cmd->parsed()) {
        std::cout << qbsim::preset_text(show_name);
        return 0;
      }
      std::cerr << "error: presets needs a subcommand (list|show)\n";
      return 1;
    }
  } catch (const qbsim::SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
