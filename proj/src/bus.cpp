#include "qbsim/bus.hpp"

#include <algorithm>

namespace qbsim {

namespace {

bool ranges_overlap(std::uint64_t a0, std::uint64_t a1, std::uint64_t b0, std::uint64_t b1) {
  return a0 < b1 && b0 < a1;
}

}  // namespace

std::vector<Candidate> apply_filter(unsigned k, const std::vector<Candidate>& in,
                                    const FilterContext& ctx) {
  if (k < 1 || k > 7) throw SimError(Errc::Precondition, "filter index must be 1..7");

  // F2..F6 honor their enable flags; F1 and F7 are structural.
  if (k >= 2 && k <= 6 && !(*ctx.enabled)[k - 1]) return in;

  std::vector<Candidate> out;
  switch (k) {
    case 1: {
      // RequestValid: pending requesters, minus reads held by a RAW hazard
      // against a buffered write. May legitimately come out empty.
      for (const Candidate& c : in) {
        if (ctx.hazard_blocked && ctx.hazard_blocked->count(c.master)) continue;
        out.push_back(c);
      }
      return out;
    }
    case 2: {
      // AccessPermission: drop masters whose target bank refuses new work.
      for (const Candidate& c : in) {
        if (!(*ctx.bank_report)[c.loc.bank].blocked) out.push_back(c);
      }
      break;
    }
    case 3: {
      // QosUrgent: if any RT candidate is at or past its urgency threshold,
      // keep only the minimal-slack RT candidates. Slack may be negative.
      using Slack = long long;
      bool any_urgent = false;
      Slack min_slack = 0;
      for (const Candidate& c : in) {
        const QosRecord& q = (*ctx.qos)[c.master];
        if (!q.rt) continue;
        const Slack slack = static_cast<Slack>(q.objective) - static_cast<Slack>(q.since_last_grant);
        if (slack <= static_cast<Slack>(ctx.qos_urgency_threshold)) {
          if (!any_urgent || slack < min_slack) min_slack = slack;
          any_urgent = true;
        }
      }
      if (!any_urgent) return in;
      for (const Candidate& c : in) {
        const QosRecord& q = (*ctx.qos)[c.master];
        if (!q.rt) continue;
        const Slack slack = static_cast<Slack>(q.objective) - static_cast<Slack>(q.since_last_grant);
        if (slack == min_slack) out.push_back(c);
      }
      break;
    }
    case 4: {
      // WriteBufferPressure: at the high watermark (or under RAW urgency)
      // keep the draining pseudo-master when it is a candidate.
      if (!ctx.buffer_pressure) return in;
      for (const Candidate& c : in) {
        if (c.master == ctx.pseudo_master) out.push_back(c);
      }
      break;
    }
    case 5: {
      // IdleBank: prefer targets that are idle or already open on the row.
      for (const Candidate& c : in) {
        const BankReportEntry& e = (*ctx.bank_report)[c.loc.bank];
        if (e.idle || (e.open_row && *e.open_row == c.loc.row)) out.push_back(c);
      }
      break;
    }
    case 6: {
      // StaticPriority: keep the maximal configured rank.
      auto rank = [&](const Candidate& c) {
        const auto& prio = *ctx.static_priority;
        return c.master < prio.size() ? prio[c.master] : 0;
      };
      int best = 0;
      bool first = true;
      for (const Candidate& c : in) {
        const int r = rank(c);
        if (first || r > best) best = r;
        first = false;
      }
      for (const Candidate& c : in) {
        if (rank(c) == best) out.push_back(c);
      }
      break;
    }
    case 7: {
      // RoundRobin: first candidate at or after the rotating pointer.
      if (in.empty()) return in;
      const Candidate* pick = nullptr;
      for (const Candidate& c : in) {
        if (c.master >= ctx.rr_pointer && (!pick || c.master < pick->master)) pick = &c;
      }
      if (!pick) {
        for (const Candidate& c : in) {
          if (!pick || c.master < pick->master) pick = &c;
        }
      }
      out.push_back(*pick);
      return out;
    }
  }

  // A filter that would eliminate every candidate is skipped for the cycle.
  if (out.empty() && !in.empty()) return in;
  return out;
}

Bus::Bus(const BusConfig& cfg, const AddressMap& map, TxnTable& table, Ddrc& ddrc, WriteBuffer& wb,
         std::size_t n_masters)
    : cfg_(cfg), map_(map), table_(&table), ddrc_(&ddrc), wb_(&wb), n_masters_(n_masters) {
  if (!cfg_.filter_enabled[0] || !cfg_.filter_enabled[6]) {
    throw SimError(Errc::ValidationError, "filters 1 and 7 cannot be disabled");
  }
  if (cfg_.pipeline_depth == 0) {
    throw SimError(Errc::ValidationError, "pipeline_depth must be >= 1");
  }
  cur_.qos.resize(n_masters_ + 1);  // pseudo-master record sits last
  cur_.rr_pointer = cfg_.rr_pointer_init % (n_masters_ + 1);
  busy_txn_.assign(n_masters_, std::nullopt);
  cfg_.static_priority.resize(n_masters_ + 1, 0);
}

void Bus::set_qos(MasterId master, bool rt, Cycle objective) {
  if (master >= n_masters_) {
    throw SimError(Errc::UnknownMaster, "set_qos for master " + std::to_string(master));
  }
  if (rt && objective == 0) {
    throw SimError(Errc::Precondition, "RT master needs a positive QoS objective");
  }
  QosRecord& q = cur_.qos[master];
  q.rt = rt;
  q.objective = objective;
  q.since_last_grant = 0;
  q.violations = 0;
}

void Bus::validate_address(std::uint64_t addr, unsigned beats) const {
  const std::uint64_t beat_bytes = map_.bytes_per_beat();
  if (addr % beat_bytes != 0) {
    throw SimError(Errc::MisalignedAddress, "address 0x" + std::to_string(addr) +
                                                " not aligned to the " +
                                                std::to_string(beat_bytes) + "-byte bus width");
  }
  const std::uint64_t last = addr + std::uint64_t(beats) * beat_bytes - 1;
  if (last >= map_.memory_bytes()) {
    throw SimError(Errc::AddressOutOfRange, "burst past end of memory");
  }
  if (addr / map_.row_bytes() != last / map_.row_bytes()) {
    throw SimError(Errc::BurstCrossesRow, "burst crosses a row boundary");
  }
}

void Bus::request(MasterId master, TxnId txn) {
  if (master >= n_masters_) {
    throw SimError(Errc::UnknownMaster, "request from master " + std::to_string(master));
  }
  if (busy_txn_[master]) {
    const Transaction& cur = table_->at(*busy_txn_[master]);
    if (!cur.master_done()) {
      throw SimError(Errc::OutstandingRequest,
                     "master " + std::to_string(master) + " already has a transaction in flight");
    }
  }
  Transaction& t = table_->at(txn);
  validate_address(t.addr, t.beats());
  t.issue_cycle = now();

  Pending p;
  p.txn = txn;
  p.master = master;
  p.op = t.op;
  p.addr = t.addr;
  p.beats = t.beats();
  p.loc = decode_address(t.addr, map_);
  p.issue = now();
  staged_requests_.push_back(p);
  busy_txn_[master] = txn;
}

bool Bus::check_grant(MasterId master) const {
  return cur_.decision && cur_.decision->granted && *cur_.decision->granted == master;
}

Completion Bus::read(MasterId master, std::uint64_t addr, BurstKind burst) {
  if (!check_grant(master)) {
    throw SimError(Errc::NotGranted, "read without a grant by master " + std::to_string(master));
  }
  validate_address(addr, beats_of(burst));
  const TxnId txn = cur_.decision->txn;
  const Transaction& t = table_->at(txn);
  if (t.addr != addr || t.burst != burst || t.op != Op::Read) {
    throw SimError(Errc::Precondition, "read does not match the granted transaction");
  }
  ddrc_->authorize_data(txn);
  return Completion{txn};
}

Completion Bus::write(MasterId master, std::uint64_t addr, BurstKind burst, unsigned beats) {
  if (master >= n_masters_) {
    throw SimError(Errc::UnknownMaster, "write from master " + std::to_string(master));
  }
  if (beats != beats_of(burst)) {
    throw SimError(Errc::Precondition, "beat count does not match the burst kind");
  }
  validate_address(addr, beats);
  // Locate the master's pending write (staged this cycle or pooled).
  const Pending* found = nullptr;
  for (const Pending& p : staged_requests_) {
    if (p.master == master) found = &p;
  }
  if (!found) {
    for (const Pending& p : cur_.pool) {
      if (p.master == master) found = &p;
    }
  }
  if (!found || found->op != Op::Write || found->addr != addr) {
    throw SimError(Errc::Precondition, "write does not match the issued request");
  }
  ddrc_->authorize_data(found->txn);
  return Completion{found->txn};
}

std::vector<Bus::PoolEntry> Bus::pool_view() const {
  std::vector<PoolEntry> view;
  view.reserve(cur_.pool.size());
  for (const Pending& p : cur_.pool) view.push_back({p.master, p.txn});
  return view;
}

std::set<MasterId> Bus::hazard_blocked_masters() const {
  std::set<MasterId> blocked;
  if (wb_->occupancy() == 0) return blocked;
  const std::uint64_t beat_bytes = map_.bytes_per_beat();
  for (const Pending& p : cur_.pool) {
    if (p.op != Op::Read) continue;
    const std::uint64_t r0 = p.addr;
    const std::uint64_t r1 = p.addr + std::uint64_t(p.beats) * beat_bytes;
    for (const WriteBufferEntry& e : wb_->entries()) {
      const std::uint64_t w0 = e.addr;
      const std::uint64_t w1 = e.addr + std::uint64_t(e.beats) * beat_bytes;
      if (ranges_overlap(r0, r1, w0, w1)) {
        blocked.insert(p.master);
        break;
      }
    }
  }
  return blocked;
}

Candidate Bus::pending_to_candidate(const Pending& p) const {
  Candidate c;
  c.master = p.master;
  c.txn = p.txn;
  c.op = p.op;
  c.addr = p.addr;
  c.beats = p.beats;
  c.loc = p.loc;
  return c;
}

void Bus::eval(Cycle cycle) {
  now_ = cycle;

  // Grant pipeline occupancy, exactly: the controller's committed queue
  // already contains every grant staged up to last cycle, minus whatever
  // finishes its last beat this cycle.
  unsigned inflight = 0;
  for (const QueuedTxn& q : ddrc_->queue()) {
    if (!(q.col_issued && q.last_beat == cycle)) inflight++;
  }

  // Candidate universe: pooled requests plus the draining pseudo-master.
  std::vector<Candidate> universe;
  universe.reserve(cur_.pool.size() + 1);
  for (const Pending& p : cur_.pool) universe.push_back(pending_to_candidate(p));
  std::optional<Pending> drain;
  if (auto head = wb_->drain_request()) {
    Pending p;
    p.txn = head->txn;
    p.master = pseudo_master();
    p.op = Op::Write;
    p.addr = head->addr;
    p.beats = head->beats;
    p.loc = decode_address(head->addr, map_);
    drain = p;
    universe.push_back(pending_to_candidate(p));
  }
  staged_requesters_.clear();
  for (const Candidate& c : universe) staged_requesters_.push_back(c.master);

  const std::set<MasterId> hazard = hazard_blocked_masters();

  FilterContext ctx;
  ctx.enabled = &cfg_.filter_enabled;
  ctx.bank_report = &ddrc_->bank_report();
  ctx.qos = &cur_.qos;
  ctx.static_priority = &cfg_.static_priority;
  ctx.hazard_blocked = &hazard;
  ctx.qos_urgency_threshold = cfg_.qos_urgency_threshold;
  ctx.rr_pointer = cur_.rr_pointer;
  ctx.pseudo_master = pseudo_master();
  ctx.buffer_pressure =
      (wb_->depth() > 0 && wb_->occupancy() >= wb_->depth() - 1) || !hazard.empty();

  // Arbitrate only when the grant pipeline has room for another data phase.
  staged_decision_.reset();
  staged_granted_is_pseudo_ = false;
  std::optional<Candidate> winner;
  if (inflight < cfg_.pipeline_depth) {
    GrantDecision d;
    d.cycle = cycle;
    std::vector<Candidate> set = universe;
    for (unsigned k = 1; k <= 7; ++k) {
      set = apply_filter(k, set, ctx);
      d.filter_trace[k - 1].clear();
      for (const Candidate& c : set) d.filter_trace[k - 1].push_back(c.master);
    }
    if (!set.empty()) {
      winner = set.front();
      d.granted = winner->master;
      d.txn = winner->txn;
    }
    staged_decision_ = std::move(d);
  }

  // Forward the grant into the controller's queue; when it lands behind an
  // active data phase, also push its NextTxnInfo (request pipelining).
  if (winner) {
    QueuedTxn q;
    q.id = winner->txn;
    // Drained writes keep their originating master for beat attribution.
    q.master = table_->at(winner->txn).master;
    q.op = winner->op;
    q.addr = winner->addr;
    q.beats = winner->beats;
    q.loc = winner->loc;
    ddrc_->enqueue_grant(q);
    if (inflight > 0) {
      NextTxnInfo info;
      info.bank = winner->loc.bank;
      info.row = winner->loc.row;
      info.op = winner->op;
      info.master = winner->master;
      info.txn = winner->txn;
      ddrc_->accept_next_info(info);
    }
    if (winner->master == pseudo_master()) {
      staged_granted_is_pseudo_ = true;
      wb_->stage_drain_pop();
      ddrc_->authorize_data(winner->txn);  // buffered writes carry their data
    }
  }

  // Losing writes are offered to the buffer (posted completion), oldest
  // request first. Postings stop below the F4 watermark so sustained write
  // traffic cannot park the buffer there and lock readers out; the watermark
  // path stays reserved for RAW urgency and drain-side backlogs.
  staged_posted_.clear();
  const std::size_t post_limit =
      wb_->depth() >= 3 ? wb_->depth() - 2 : std::min<std::size_t>(wb_->depth(), 1);
  std::vector<const Pending*> losing_writes;
  for (const Pending& p : cur_.pool) {
    if (p.op != Op::Write) continue;
    if (winner && winner->txn == p.txn) continue;
    losing_writes.push_back(&p);
  }
  std::sort(losing_writes.begin(), losing_writes.end(), [](const Pending* a, const Pending* b) {
    return a->issue != b->issue ? a->issue < b->issue : a->master < b->master;
  });
  for (const Pending* p : losing_writes) {
    if (wb_->occupancy() + staged_posted_.size() >= post_limit) break;
    if (wb_->try_posted_write(table_->at(p->txn), cycle)) staged_posted_.push_back(p->txn);
  }
}

void Bus::commit(Cycle cycle) {
  // Grant bookkeeping.
  cur_.decision = staged_decision_;
  staged_decision_.reset();
  std::optional<MasterId> granted;
  if (cur_.decision && cur_.decision->granted) {
    granted = cur_.decision->granted;
    const TxnId txn = cur_.decision->txn;
    table_->at(txn).grant_cycle = cycle;
    cur_.rr_pointer = static_cast<MasterId>((*granted + 1) % (n_masters_ + 1));
    if (!staged_granted_is_pseudo_) {
      cur_.pool.erase(std::remove_if(cur_.pool.begin(), cur_.pool.end(),
                                     [&](const Pending& p) { return p.txn == txn; }),
                      cur_.pool.end());
    }
  }
  staged_granted_is_pseudo_ = false;

  // Posted writes leave the pool and complete for their master.
  cur_.posted = staged_posted_;
  staged_posted_.clear();
  for (TxnId txn : cur_.posted) {
    table_->at(txn).posted_cycle = cycle;
    cur_.pool.erase(std::remove_if(cur_.pool.begin(), cur_.pool.end(),
                                   [&](const Pending& p) { return p.txn == txn; }),
                    cur_.pool.end());
  }

  // New requests become arbitration candidates next cycle.
  for (const Pending& p : staged_requests_) cur_.pool.push_back(p);
  staged_requests_.clear();
  std::sort(cur_.pool.begin(), cur_.pool.end(),
            [](const Pending& a, const Pending& b) { return a.master < b.master; });

  // QoS accounting over this cycle's candidate universe.
  cur_.requesters = staged_requesters_;
  staged_requesters_.clear();
  cur_.qos_crossed.clear();
  for (MasterId m : cur_.requesters) {
    QosRecord& q = cur_.qos[m];
    if (granted && *granted == m) {
      q.since_last_grant = 0;
      continue;
    }
    q.since_last_grant++;
    if (q.rt && q.objective > 0 && q.since_last_grant == q.objective + 1) {
      q.violations++;
      cur_.qos_crossed.push_back(m);
    }
  }
}

}  // namespace qbsim
