#include "qbsim/checker.hpp"

#include <algorithm>
#include <sstream>

namespace qbsim {

const char* to_string(ViolationKind kind) {
  return kind == ViolationKind::FatalSelfCheck ? "FatalSelfCheck" : "ProtocolProperty";
}

namespace {

const std::vector<std::string> kRules = {
    "grant-exclusivity", "grant-without-request", "filter-soundness", "fsm-transition",
    "fsm-timing",        "buffer-overflow",       "beat-conservation", "command-bus",
    "data-bus",          "memory-token",          "qos-deadline",      "starvation",
};

const std::vector<std::string> kPropertyRules = {"qos-deadline", "starvation"};

}  // namespace

const std::vector<std::string>& checker_rule_ids() { return kRules; }

bool checker_rule_is_fatal(const std::string& rule) {
  return std::find(kPropertyRules.begin(), kPropertyRules.end(), rule) == kPropertyRules.end();
}

void inject_fault(CycleSnapshot& snap, const std::string& rule, unsigned phase) {
  if (rule == "fsm-timing") {
    // Two-step fault: a legal-looking Activate, then a Precharge well inside
    // the tRAS window.
    DdrCommand cmd;
    cmd.bank = 0;
    if (phase == 0) {
      cmd.kind = DdrCommand::Kind::Activate;
      snap.commands = {cmd};
    } else {
      cmd.kind = DdrCommand::Kind::Precharge;
      snap.commands = {cmd};
    }
    return;
  }
  if (phase != 0) return;

  if (rule == "grant-exclusivity") {
    snap.granted = {0, 1};
    snap.requesters = {0, 1};
  } else if (rule == "grant-without-request") {
    snap.granted = {0};
    snap.requesters.clear();
    snap.decision.reset();
  } else if (rule == "filter-soundness") {
    if (!snap.decision) {
      snap.decision.emplace();
      snap.decision->granted = 0;
      snap.granted = {0};
      snap.requesters = {0};
      for (auto& stage : snap.decision->filter_trace) stage = {0};
    }
    snap.decision->filter_trace[3].push_back(9999);  // candidate from nowhere
  } else if (rule == "fsm-transition") {
    if (!snap.banks.empty()) {
      snap.banks[0].phase = BankPhase::Bursting;  // without any column command
      snap.banks[0].burst_last_beat = snap.cycle + 4;
      snap.commands.clear();
    }
  } else if (rule == "buffer-overflow") {
    snap.wb_occupancy = snap.wb_depth + 1;
  } else if (rule == "beat-conservation") {
    BeatEvent b;
    b.txn = 0;
    b.index = 98;  // out of any burst's range
    snap.beats = {b};
  } else if (rule == "command-bus") {
    DdrCommand a;
    a.kind = DdrCommand::Kind::Activate;
    a.bank = 0;
    snap.commands.push_back(a);
    a.bank = 1;
    snap.commands.push_back(a);
  } else if (rule == "data-bus") {
    BeatEvent b0, b1;
    b0.txn = 7770;
    b1.txn = 7771;
    snap.beats = {b0, b1};
  } else if (rule == "memory-token") {
    snap.memory_fault = true;
    snap.memory_fault_addr = 0x40;
  } else if (rule == "qos-deadline") {
    CycleSnapshot::QosView q;
    q.master = 0;
    q.rt = true;
    q.objective = 1;
    q.since_last_grant = 2;
    q.violations = 1;
    q.crossed_now = true;
    snap.qos.push_back(q);
  } else if (rule == "starvation") {
    // Fires once the snapshot cycle exceeds the starvation bound.
    CycleSnapshot::PendingView p;
    p.master = 0;
    p.txn = 424242;
    p.issue_cycle = 0;
    snap.pending.push_back(p);
  } else {
    throw SimError(Errc::ValidationError, "unknown fault injection rule '" + rule + "'");
  }
}

Checker::Checker(CheckerConfig cfg, const DdrTiming& timing, const AddressMap& map)
    : cfg_(cfg), timing_(timing), map_(map), bound_(cfg.starvation_bound) {
  bank_times_.resize(map_.banks());
  if (bound_ == 0) bound_ = 1000;
}

void Checker::resolve_starvation_bound(const std::vector<QosRecord>& qos) {
  if (cfg_.starvation_bound != 0) return;
  Cycle max_obj = 0;
  for (const QosRecord& q : qos) max_obj = std::max(max_obj, q.objective);
  bound_ = max_obj > 0 ? 10 * max_obj : 1000;
}

void Checker::fail(ViolationKind kind, const std::string& rule, Cycle cycle,
                   const std::string& msg) {
  violations_.push_back({cycle, kind, rule, msg});
  if (kind == ViolationKind::FatalSelfCheck) {
    throw AbortSimulation(rule, cycle, msg);
  }
}

void Checker::check_cycle(const CycleSnapshot& snap) {
  if (!cfg_.enabled) return;
  check_grants(snap);
  check_filter_trace(snap);
  check_fsm(snap);
  check_beats(snap);
  check_buffer(snap);
  check_qos(snap);
  check_starvation(snap);

  prev_banks_ = snap.banks;
  prev_cmds_ = snap.commands;
  have_prev_ = true;
}

void Checker::check_grants(const CycleSnapshot& snap) {
  if (snap.granted.size() > 1) {
    fail(ViolationKind::FatalSelfCheck, "grant-exclusivity", snap.cycle,
         std::to_string(snap.granted.size()) + " masters granted in one cycle");
  }
  for (MasterId m : snap.granted) {
    if (std::find(snap.requesters.begin(), snap.requesters.end(), m) == snap.requesters.end()) {
      fail(ViolationKind::FatalSelfCheck, "grant-without-request", snap.cycle,
           "master " + std::to_string(m) + " granted without a pending request");
    }
  }
}

void Checker::check_filter_trace(const CycleSnapshot& snap) {
  if (!snap.decision) return;
  const auto& trace = snap.decision->filter_trace;

  auto is_subset = [](const std::vector<MasterId>& sub, const std::vector<MasterId>& super) {
    for (MasterId m : sub) {
      if (std::find(super.begin(), super.end(), m) == super.end()) return false;
    }
    return true;
  };

  if (!is_subset(trace[0], snap.requesters)) {
    fail(ViolationKind::FatalSelfCheck, "filter-soundness", snap.cycle,
         "filter 1 output is not a subset of the requesters");
  }
  for (unsigned k = 2; k <= 7; ++k) {
    const auto& in = trace[k - 2];
    const auto& out = trace[k - 1];
    if (!is_subset(out, in)) {
      fail(ViolationKind::FatalSelfCheck, "filter-soundness", snap.cycle,
           "filter " + std::to_string(k) + " output is not a subset of its input");
    }
    if (out.empty() && !in.empty()) {
      fail(ViolationKind::FatalSelfCheck, "filter-soundness", snap.cycle,
           "filter " + std::to_string(k) + " emptied a non-empty candidate set");
    }
  }
  if (!trace[0].empty()) {
    if (trace[6].size() != 1) {
      fail(ViolationKind::FatalSelfCheck, "filter-soundness", snap.cycle,
           "filter 7 did not produce a singleton");
    } else if (!snap.decision->granted || *snap.decision->granted != trace[6][0]) {
      fail(ViolationKind::FatalSelfCheck, "filter-soundness", snap.cycle,
           "granted master disagrees with the filter chain");
    }
  }
}

void Checker::check_fsm(const CycleSnapshot& snap) {
  // Command-bus exclusivity.
  if (snap.commands.size() > 1) {
    fail(ViolationKind::FatalSelfCheck, "command-bus", snap.cycle,
         std::to_string(snap.commands.size()) + " commands in one cycle");
  }

  // Timing bookkeeping and command legality against the previous state.
  // This is an independent recomputation, not a call into the model's FSM.
  for (const DdrCommand& cmd : snap.commands) {
    if (cmd.is_nop()) continue;
    if (cmd.bank >= snap.banks.size()) {
      fail(ViolationKind::FatalSelfCheck, "fsm-transition", snap.cycle, "command to missing bank");
      continue;
    }
    BankTimes& times = bank_times_[cmd.bank];
    const BankState* prev = have_prev_ && cmd.bank < prev_banks_.size() ? &prev_banks_[cmd.bank] : nullptr;
    switch (cmd.kind) {
      case DdrCommand::Kind::Activate: {
        if (prev && prev->phase != BankPhase::Idle &&
            !(prev->phase == BankPhase::Precharging && prev->remaining == 1)) {
          fail(ViolationKind::FatalSelfCheck, "fsm-transition", snap.cycle,
               "Activate while bank not idle");
        }
        if (times.last_precharge && snap.cycle < *times.last_precharge + timing_.t_rp) {
          fail(ViolationKind::FatalSelfCheck, "fsm-timing", snap.cycle, "tRP violated");
        }
        times.last_activate = snap.cycle;
        break;
      }
      case DdrCommand::Kind::ColRead:
      case DdrCommand::Kind::ColWrite: {
        if (times.last_activate && snap.cycle < *times.last_activate + timing_.t_rcd) {
          fail(ViolationKind::FatalSelfCheck, "fsm-timing", snap.cycle, "tRCD violated");
        }
        auto& tb = txn_beats_[cmd.txn];
        tb.col_cycle = snap.cycle;
        tb.op = cmd.kind == DdrCommand::Kind::ColRead ? Op::Read : Op::Write;
        tb.expected = cmd.beats;
        break;
      }
      case DdrCommand::Kind::Precharge: {
        if (times.last_activate && snap.cycle < *times.last_activate + timing_.t_ras) {
          fail(ViolationKind::FatalSelfCheck, "fsm-timing", snap.cycle, "tRAS violated");
        }
        times.last_precharge = snap.cycle;
        break;
      }
      case DdrCommand::Kind::Nop:
        break;
    }
  }

  // Phase transitions: each bank may only move along the legal edges.
  if (have_prev_ && prev_banks_.size() == snap.banks.size()) {
    for (std::size_t b = 0; b < snap.banks.size(); ++b) {
      const BankPhase from = prev_banks_[b].phase;
      const BankPhase to = snap.banks[b].phase;
      const DdrCommand* cmd = nullptr;
      for (const DdrCommand& c : snap.commands) {
        if (!c.is_nop() && c.bank == b) cmd = &c;
      }
      bool ok = false;
      switch (to) {
        case BankPhase::Idle:
          ok = from == BankPhase::Idle || from == BankPhase::Precharging;
          break;
        case BankPhase::Activating:
          ok = (cmd && cmd->kind == DdrCommand::Kind::Activate) ||
               (from == BankPhase::Activating && snap.banks[b].remaining > 0);
          break;
        case BankPhase::Active:
          ok = from == BankPhase::Activating || from == BankPhase::Active ||
               from == BankPhase::Bursting;
          break;
        case BankPhase::Bursting:
          ok = (cmd && cmd->is_column()) || from == BankPhase::Bursting;
          break;
        case BankPhase::Precharging:
          ok = (cmd && cmd->kind == DdrCommand::Kind::Precharge) ||
               (from == BankPhase::Precharging && snap.banks[b].remaining > 0);
          break;
      }
      if (!ok) {
        std::ostringstream os;
        os << "bank " << b << " moved " << to_string(from) << " -> " << to_string(to)
           << " without a legal cause";
        fail(ViolationKind::FatalSelfCheck, "fsm-transition", snap.cycle, os.str());
      }
    }
  }
}

void Checker::check_beats(const CycleSnapshot& snap) {
  if (snap.beats.size() > 1) {
    fail(ViolationKind::FatalSelfCheck, "data-bus", snap.cycle,
         std::to_string(snap.beats.size()) + " beats on the data bus in one cycle");
  }
  for (const BeatEvent& b : snap.beats) {
    auto& tb = txn_beats_[b.txn];
    if (b.index != tb.delivered) {
      fail(ViolationKind::FatalSelfCheck, "beat-conservation", snap.cycle,
           "txn " + std::to_string(b.txn) + " beat index " + std::to_string(b.index) +
               " out of order (expected " + std::to_string(tb.delivered) + ")");
    }
    if (tb.expected != 0 && b.index >= tb.expected) {
      fail(ViolationKind::FatalSelfCheck, "beat-conservation", snap.cycle,
           "txn " + std::to_string(b.txn) + " delivered more beats than its burst length");
    }
    // First read beat arrives exactly tCL after the column command; write
    // beats start the cycle after.
    if (b.index == 0 && tb.col_cycle) {
      const Cycle lead = tb.op == Op::Read ? timing_.t_cl : 1;
      if (snap.cycle != *tb.col_cycle + lead) {
        fail(ViolationKind::FatalSelfCheck, "fsm-timing", snap.cycle,
             "first beat of txn " + std::to_string(b.txn) + " at the wrong latency");
      }
    }
    tb.delivered++;
    tb.last_beat_cycle = snap.cycle;
  }
  if (snap.memory_fault) {
    fail(ViolationKind::FatalSelfCheck, "memory-token", snap.cycle,
         "functional memory token mismatch at 0x" + std::to_string(snap.memory_fault_addr));
  }
}

void Checker::check_buffer(const CycleSnapshot& snap) {
  if (snap.wb_occupancy > snap.wb_depth) {
    fail(ViolationKind::FatalSelfCheck, "buffer-overflow", snap.cycle,
         "write buffer at " + std::to_string(snap.wb_occupancy) + "/" +
             std::to_string(snap.wb_depth));
  }
}

void Checker::check_qos(const CycleSnapshot& snap) {
  for (const auto& q : snap.qos) {
    if (q.crossed_now) {
      fail(ViolationKind::ProtocolProperty, "qos-deadline", snap.cycle,
           "master " + std::to_string(q.master) + " exceeded its QoS objective of " +
               std::to_string(q.objective));
    }
  }
}

void Checker::check_starvation(const CycleSnapshot& snap) {
  for (const auto& p : snap.pending) {
    const Cycle waited = snap.cycle - p.issue_cycle;
    if (waited > bound_ && starved_flagged_.insert(p.txn).second) {
      fail(ViolationKind::ProtocolProperty, "starvation", snap.cycle,
           "master " + std::to_string(p.master) + " request waited " + std::to_string(waited) +
               " cycles (bound " + std::to_string(bound_) + ")");
    }
  }
}

}  // namespace qbsim
