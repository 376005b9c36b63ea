#include "qbsim/system.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "qbsim/rng.hpp"

namespace qbsim {

System::System(const SimConfig& cfg, const RunOptions& opts)
    : cfg_(cfg),
      opts_(opts),
      map_(cfg.address_map()),
      profiler_(cfg.masters.size(), cfg.bus_width_bits, cfg.wb_depth),
      checker_(cfg.checker, cfg.timing, map_) {
  wb_ = std::make_unique<WriteBuffer>(cfg_.wb_enabled, cfg_.wb_depth);
  ddrc_ = std::make_unique<Ddrc>(map_, cfg_.timing, cfg_.ddrc_options(), table_);
  bus_ = std::make_unique<Bus>(cfg_.bus_config(), map_, table_, *ddrc_, *wb_,
                               cfg_.masters.size());
  bus_->attach_clock(world_);

  for (std::size_t i = 0; i < cfg_.masters.size(); ++i) {
    const MasterConfig& mc = cfg_.masters[i];
    MasterModel model;
    model.id = static_cast<MasterId>(i);
    model.pattern = make_pattern(mc.pattern, mc.op, mc.txn_count,
                                 mix64(cfg_.seed ^ mix64(i + 1)));
    if (mc.addr_stride) model.pattern.addr_stride = *mc.addr_stride;
    model.pattern.inter_arrival = mc.inter_arrival;
    model.rt = mc.rt;
    model.qos_objective = mc.qos_objective;
    model.priority = mc.priority;
    model.region_bytes = mc.region_bytes.value_or(map_.row_bytes());
    model.base_addr = mc.base_addr.value_or(i * model.region_bytes);
    model.seed = cfg_.seed;
    masters_.push_back(std::make_unique<TrafficMaster>(model, *bus_, table_, map_));
    bus_->set_qos(model.id, model.rt, model.qos_objective);
  }
  checker_.resolve_starvation_bound(bus_->qos());

  // Natural registration order: masters, write buffer, DDRC, bus. Committed
  // results must not depend on it; the equivalence suites permute it.
  std::vector<Component*> natural;
  for (auto& m : masters_) natural.push_back(m.get());
  natural.push_back(wb_.get());
  natural.push_back(ddrc_.get());
  natural.push_back(bus_.get());

  if (opts_.registration_order) {
    const auto& order = *opts_.registration_order;
    if (order.size() != natural.size()) {
      throw SimError(Errc::Precondition, "registration_order must cover every component");
    }
    for (std::size_t idx : order) world_.register_component(*natural.at(idx));
  } else {
    for (Component* c : natural) world_.register_component(*c);
  }

  world_.set_completed_supplier([this] {
    std::uint64_t total = 0;
    for (const auto& m : masters_) total += m->model().completed;
    return total;
  });

  if (opts_.trace_sink) {
    (*opts_.trace_sink) << Profiler::trace_header() << '\n';
    profiler_.set_trace_sink(opts_.trace_sink);
  }

  world_.add_observer([this](Cycle cycle) {
    CycleSnapshot snap = make_snapshot(cycle);
    profiler_.record_cycle(snap);
    if (opts_.collect_digests) digests_.push_back(snap.to_line());
    if (opts_.snapshot_tap) opts_.snapshot_tap(snap);

    if (cfg_.fault_injection &&
        (cycle == cfg_.fault_injection->cycle || cycle == cfg_.fault_injection->cycle + 1)) {
      CycleSnapshot doctored = snap;
      inject_fault(doctored, cfg_.fault_injection->rule,
                   static_cast<unsigned>(cycle - cfg_.fault_injection->cycle));
      checker_.check_cycle(doctored);
    } else {
      checker_.check_cycle(snap);
    }
  });

  if (opts_.step_shuffle_seed) {
    // Reference-stepper mode: walk components in a different random order on
    // every step.
    auto rng = std::make_shared<Rng>(*opts_.step_shuffle_seed);
    const std::size_t n = world_.component_count();
    auto shuffle_order = [rng, n]() {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      for (std::size_t i = n; i > 1; --i) {
        std::swap(order[i - 1], order[rng->below(i)]);
      }
      return order;
    };
    world_.set_step_order(shuffle_order());
    world_.add_observer([this, shuffle_order](Cycle) { world_.set_step_order(shuffle_order()); });
  }
}

CycleSnapshot System::make_snapshot(Cycle cycle) const {
  CycleSnapshot snap;
  snap.cycle = cycle;

  const auto& decision = bus_->decision();
  if (decision) {
    snap.decision = *decision;
    if (decision->granted) snap.granted.push_back(*decision->granted);
  }
  snap.requesters = bus_->requesters_last_cycle();

  for (const auto& p : bus_->pool_view()) {
    snap.pending.push_back({p.master, p.txn, table_.at(p.txn).issue_cycle.value_or(cycle)});
  }

  snap.banks = ddrc_->banks();
  const DdrCommand& cmd = ddrc_->command_last_cycle();
  if (!cmd.is_nop()) snap.commands.push_back(cmd);
  snap.beats = ddrc_->beats_last_cycle();

  snap.wb_occupancy = wb_->occupancy();
  snap.wb_depth = wb_->depth();

  const auto& crossings = bus_->qos_crossings_last_cycle();
  const auto& qos = bus_->qos();
  for (std::size_t m = 0; m < qos.size(); ++m) {
    CycleSnapshot::QosView v;
    v.master = static_cast<MasterId>(m);
    v.rt = qos[m].rt;
    v.objective = qos[m].objective;
    v.since_last_grant = qos[m].since_last_grant;
    v.violations = qos[m].violations;
    v.crossed_now =
        std::find(crossings.begin(), crossings.end(), v.master) != crossings.end();
    snap.qos.push_back(v);
  }

  if (auto fault = ddrc_->memory_fault_addr()) {
    snap.memory_fault = true;
    snap.memory_fault_addr = *fault;
  }
  return snap;
}

RunResult System::run() {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.summary = world_.run(cfg_.max_cycles, cfg_.stop_when_idle);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.metrics = profiler_.finalize(table_, result.summary.total_cycles);
  result.violations = checker_.violations();
  result.resolved_config = resolved_json(cfg_);
  result.final_memory = ddrc_->memory();
  result.digests = std::move(digests_);
  return result;
}

RunResult run_simulation(const SimConfig& cfg, const RunOptions& opts) {
  System system(cfg, opts);
  return system.run();
}

}  // namespace qbsim
