#include "qbsim/ddrc.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include "qbsim/rng.hpp"

namespace qbsim {

unsigned AddressMap::beat_offset_bits() const {
  return static_cast<unsigned>(std::countr_zero(bytes_per_beat()));
}

DecodedAddr decode_address(std::uint64_t addr, const AddressMap& map) {
  if (addr >= map.memory_bytes()) {
    throw SimError(Errc::AddressOutOfRange,
                   "address 0x" + std::to_string(addr) + " beyond memory of " +
                       std::to_string(map.memory_bytes()) + " bytes");
  }
  const std::uint64_t beat = addr >> map.beat_offset_bits();
  DecodedAddr d;
  d.col = static_cast<unsigned>(beat & ((1ull << map.col_bits) - 1));
  d.bank = static_cast<unsigned>((beat >> map.col_bits) & ((1ull << map.bank_bits) - 1));
  d.row = beat >> (map.col_bits + map.bank_bits);
  return d;
}

const char* to_string(BankPhase phase) {
  switch (phase) {
    case BankPhase::Idle: return "Idle";
    case BankPhase::Activating: return "Activating";
    case BankPhase::Active: return "Active";
    case BankPhase::Bursting: return "Bursting";
    case BankPhase::Precharging: return "Precharging";
  }
  return "?";
}

const char* to_string(DdrCommand::Kind kind) {
  switch (kind) {
    case DdrCommand::Kind::Nop: return "Nop";
    case DdrCommand::Kind::Activate: return "Activate";
    case DdrCommand::Kind::ColRead: return "ColRead";
    case DdrCommand::Kind::ColWrite: return "ColWrite";
    case DdrCommand::Kind::Precharge: return "Precharge";
  }
  return "?";
}

std::string to_string(const DdrCommand& cmd) {
  std::ostringstream os;
  os << to_string(cmd.kind);
  if (!cmd.is_nop()) {
    os << "(b" << cmd.bank;
    if (cmd.kind == DdrCommand::Kind::Activate) os << ",r" << cmd.row;
    if (cmd.is_column()) os << ",c" << cmd.col << ",n" << cmd.beats << ",t" << cmd.txn;
    os << ")";
  }
  return os.str();
}

BankState bank_tick(const BankState& bank, Cycle now) {
  BankState b = bank;
  switch (b.phase) {
    case BankPhase::Activating:
      if (--b.remaining == 0) b.phase = BankPhase::Active;
      break;
    case BankPhase::Precharging:
      if (--b.remaining == 0) b.phase = BankPhase::Idle;
      break;
    case BankPhase::Bursting:
      if (now >= b.burst_last_beat) b.phase = BankPhase::Active;
      break;
    default:
      break;
  }
  return b;
}

namespace {

bool command_legal(const BankState& b, const DdrCommand& cmd, const DdrTiming& t, Cycle now,
                   std::string* why) {
  auto reject = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  switch (cmd.kind) {
    case DdrCommand::Kind::Nop:
      return true;
    case DdrCommand::Kind::Activate:
      if (b.phase != BankPhase::Idle) return reject("Activate requires an Idle bank");
      return true;
    case DdrCommand::Kind::ColRead:
    case DdrCommand::Kind::ColWrite:
      if (b.phase != BankPhase::Active) return reject("column access requires an Active bank");
      if (b.open_row != cmd.row) return reject("column access to a row that is not open");
      return true;
    case DdrCommand::Kind::Precharge:
      if (b.phase != BankPhase::Active) return reject("Precharge requires an Active bank");
      if (now < b.active_since + t.t_ras) return reject("Precharge before tRAS elapsed");
      return true;
  }
  return reject("unknown command");
}

}  // namespace

BankState bank_step(const BankState& bank, const std::optional<DdrCommand>& cmd,
                    const DdrTiming& timing, Cycle now) {
  BankState b = bank_tick(bank, now);
  if (!cmd.has_value() || cmd->is_nop()) return b;

  std::string why;
  if (!command_legal(b, *cmd, timing, now, &why)) {
    throw SimError(Errc::IllegalCommand,
                   to_string(*cmd) + " on bank in " + to_string(b.phase) + " at cycle " +
                       std::to_string(now) + " (" + why + ")");
  }
  switch (cmd->kind) {
    case DdrCommand::Kind::Activate:
      b.phase = BankPhase::Activating;
      b.remaining = timing.t_rcd;
      b.open_row = cmd->row;
      b.active_since = now;
      break;
    case DdrCommand::Kind::ColRead:
      b.phase = BankPhase::Bursting;
      b.burst_txn = cmd->txn;
      b.burst_last_beat = now + timing.t_cl + cmd->beats - 1;
      break;
    case DdrCommand::Kind::ColWrite:
      b.phase = BankPhase::Bursting;
      b.burst_txn = cmd->txn;
      b.burst_last_beat = now + cmd->beats;  // write data starts next cycle
      break;
    case DdrCommand::Kind::Precharge:
      b.phase = BankPhase::Precharging;
      b.remaining = timing.t_rp;
      break;
    case DdrCommand::Kind::Nop:
      break;
  }
  return b;
}

std::vector<BankReportEntry> idle_bank_report(const std::vector<BankState>& banks, Cycle now) {
  (void)now;
  std::vector<BankReportEntry> report(banks.size());
  for (std::size_t i = 0; i < banks.size(); ++i) {
    const BankState& b = banks[i];
    BankReportEntry& e = report[i];
    e.idle = b.phase == BankPhase::Idle;
    if (b.phase == BankPhase::Active || b.phase == BankPhase::Bursting) e.open_row = b.open_row;
    e.blocked = b.phase == BankPhase::Bursting || b.phase == BankPhase::Precharging;
  }
  return report;
}

std::vector<BeatEvent> deliver_beats(const std::deque<QueuedTxn>& queue, Cycle now,
                                     std::uint64_t bytes_per_beat) {
  std::vector<BeatEvent> beats;
  for (const QueuedTxn& q : queue) {
    if (!q.col_issued || now < q.first_beat || now > q.last_beat) continue;
    BeatEvent ev;
    ev.txn = q.id;
    ev.master = q.master;
    ev.index = static_cast<unsigned>(now - q.first_beat);
    ev.bank = q.loc.bank;
    ev.addr = q.addr + ev.index * bytes_per_beat;
    ev.op = q.op;
    beats.push_back(ev);
  }
  return beats;
}

Ddrc::Ddrc(const AddressMap& map, const DdrTiming& timing, const DdrcOptions& opts, TxnTable& table)
    : map_(map), timing_(timing), opts_(opts), table_(&table) {
  cur_.banks.resize(map_.banks());
  cur_.report = idle_bank_report(cur_.banks, 0);
}

void Ddrc::enqueue_grant(const QueuedTxn& txn) { inbox_grants_.push_back(txn); }

void Ddrc::accept_next_info(const NextTxnInfo& info) { inbox_hints_.push_back(info); }

void Ddrc::authorize_data(TxnId txn) { inbox_auth_.push_back(txn); }

std::optional<std::size_t> Ddrc::next_column_index() const {
  for (std::size_t i = 0; i < cur_.queue.size(); ++i) {
    if (!cur_.queue[i].col_issued) return i;
  }
  return std::nullopt;
}

bool Ddrc::bank_leader(std::size_t index) const {
  const unsigned bank = cur_.queue[index].loc.bank;
  for (std::size_t j = 0; j < index; ++j) {
    if (!cur_.queue[j].col_issued && cur_.queue[j].loc.bank == bank) return false;
  }
  return true;
}

DdrCommand Ddrc::schedule_command(Cycle now) const {
  const auto next_col = next_column_index();
  const bool head_only = !opts_.lookahead_hints;

  // Column access: oldest-first among ready transactions. Data phases stay in
  // grant order per bank (bank leaders only) and may overtake across banks;
  // the shared data bus serializes the beat windows. Without hints the
  // controller acts on the oldest pending transaction only.
  for (std::size_t i = 0; i < cur_.queue.size(); ++i) {
    const QueuedTxn& q = cur_.queue[i];
    if (q.col_issued) continue;
    const bool is_oldest = next_col.has_value() && i == *next_col;
    if (head_only && !is_oldest) break;
    if (!is_oldest && !q.hinted) continue;
    if (!bank_leader(i) || authorized_.count(q.id) == 0) continue;
    const BankState b = bank_tick(cur_.banks[q.loc.bank], now);
    if (b.phase != BankPhase::Active || b.open_row != q.loc.row) continue;
    const Cycle first = now + (q.op == Op::Read ? timing_.t_cl : 1);
    if (first <= cur_.data_busy_until) continue;
    DdrCommand cmd;
    cmd.kind = q.op == Op::Read ? DdrCommand::Kind::ColRead : DdrCommand::Kind::ColWrite;
    cmd.bank = q.loc.bank;
    cmd.row = q.loc.row;
    cmd.col = q.loc.col;
    cmd.beats = q.beats;
    cmd.txn = q.id;
    return cmd;
  }

  // Row preparation. Demand = the oldest pending transaction; hints cover the
  // younger bank-leader entries.
  auto prep_for = [&](const QueuedTxn& q, bool want_activate) -> std::optional<DdrCommand> {
    const BankState b = bank_tick(cur_.banks[q.loc.bank], now);
    if (want_activate) {
      if (b.phase != BankPhase::Idle) return std::nullopt;
      DdrCommand cmd;
      cmd.kind = DdrCommand::Kind::Activate;
      cmd.bank = q.loc.bank;
      cmd.row = q.loc.row;
      return cmd;
    }
    if (b.phase != BankPhase::Active || b.open_row == q.loc.row) return std::nullopt;
    if (now < b.active_since + timing_.t_ras) return std::nullopt;
    DdrCommand cmd;
    cmd.kind = DdrCommand::Kind::Precharge;
    cmd.bank = q.loc.bank;
    return cmd;
  };

  auto consider = [&](bool want_activate, bool demand) -> std::optional<DdrCommand> {
    std::optional<DdrCommand> best;
    if (demand) {
      if (!next_col.has_value()) return std::nullopt;
      return prep_for(cur_.queue[*next_col], want_activate);
    }
    if (head_only || !next_col.has_value()) return std::nullopt;
    for (std::size_t i = *next_col + 1; i < cur_.queue.size(); ++i) {
      const QueuedTxn& q = cur_.queue[i];
      if (q.col_issued || !q.hinted || !bank_leader(i)) continue;
      auto cmd = prep_for(q, want_activate);
      if (cmd && (!best || cmd->bank < best->bank)) best = cmd;
    }
    return best;
  };

  if (auto cmd = consider(/*activate=*/true, /*demand=*/true)) return *cmd;
  if (auto cmd = consider(/*activate=*/true, /*demand=*/false)) return *cmd;
  if (auto cmd = consider(/*activate=*/false, /*demand=*/true)) return *cmd;
  if (auto cmd = consider(/*activate=*/false, /*demand=*/false)) return *cmd;
  return DdrCommand{};
}

void Ddrc::eval(Cycle cycle) { pending_cmd_ = schedule_command(cycle); }

void Ddrc::commit(Cycle cycle) {
  cur_.beats.clear();
  cur_.completed.clear();
  cur_.memory_fault.reset();

  // Bank FSMs: one tick per cycle, plus this cycle's command. An illegal
  // command here is a model self-check failure.
  for (unsigned b = 0; b < cur_.banks.size(); ++b) {
    std::optional<DdrCommand> cmd;
    if (!pending_cmd_.is_nop() && pending_cmd_.bank == b) cmd = pending_cmd_;
    try {
      cur_.banks[b] = bank_step(cur_.banks[b], cmd, timing_, cycle);
    } catch (const SimError& e) {
      throw AbortSimulation("fsm-legality", cycle, e.what());
    }
  }

  if (pending_cmd_.is_column()) {
    for (QueuedTxn& q : cur_.queue) {
      if (q.id != pending_cmd_.txn) continue;
      q.col_issued = true;
      if (q.op == Op::Read) {
        q.first_beat = cycle + timing_.t_cl;
      } else {
        q.first_beat = cycle + 1;
      }
      q.last_beat = q.first_beat + q.beats - 1;
      cur_.data_busy_until = std::max(cur_.data_busy_until, q.last_beat);
      break;
    }
  }
  cur_.command = pending_cmd_;
  pending_cmd_ = DdrCommand{};

  // Data path: beats are tokens stamped into the owning transaction.
  cur_.beats = deliver_beats(cur_.queue, cycle, map_.bytes_per_beat());
  for (const BeatEvent& ev : cur_.beats) {
    Transaction& t = table_->at(ev.txn);
    if (t.beats_delivered == 0) t.first_data_cycle = cycle;
    t.beats_delivered++;
    if (t.beats_delivered == t.beats()) t.done_cycle = cycle;
    if (opts_.functional_memory) {
      const std::uint64_t token = mix64(ev.addr);
      if (ev.op == Op::Write) {
        memory_[ev.addr] = token;
      } else {
        auto it = memory_.find(ev.addr);
        if (it != memory_.end() && it->second != token) {
          cur_.memory_fault = ev.addr;
        }
      }
    }
  }

  // Completion: the shared data bus admits at most one beat window per cycle,
  // so at most one entry finishes; it may sit anywhere in the queue.
  for (auto it = cur_.queue.begin(); it != cur_.queue.end(); ++it) {
    if (it->col_issued && it->last_beat == cycle) {
      cur_.completed.push_back(it->id);
      authorized_.erase(it->id);
      cur_.queue.erase(it);
      break;
    }
  }

  // Fold inboxes (visible from next cycle's eval).
  for (const QueuedTxn& g : inbox_grants_) cur_.queue.push_back(g);
  inbox_grants_.clear();
  for (const NextTxnInfo& h : inbox_hints_) {
    for (QueuedTxn& q : cur_.queue) {
      if (q.id == h.txn) {
        q.hinted = true;
        break;
      }
    }
  }
  inbox_hints_.clear();
  for (TxnId id : inbox_auth_) authorized_.insert(id);
  inbox_auth_.clear();

  // The arbiter's view: a bank with queued-but-unstarted work is neither idle
  // nor usefully open, whatever its FSM phase says.
  cur_.report = idle_bank_report(cur_.banks, cycle);
  for (const QueuedTxn& q : cur_.queue) {
    if (q.col_issued) continue;
    BankReportEntry& e = cur_.report[q.loc.bank];
    e.idle = false;
    e.open_row.reset();
  }
}

}  // namespace qbsim
