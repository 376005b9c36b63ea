#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "qbsim/errors.hpp"
#include "qbsim/types.hpp"

namespace qbsim {

// A simulated hardware block stepped once per cycle in two phases.
//   eval(n):   read state committed at the end of cycle n-1 (own and peers'),
//              compute this cycle's outputs, stage them. May push into peers'
//              inboxes; must not mutate any committed state.
//   commit(n): fold staged values and inbox contents into committed state.
//              Must touch only the component's own state.
// Under this contract the committed state after a step is independent of the
// order components are stepped in.
class Component {
 public:
  virtual ~Component() = default;
  virtual std::string_view name() const = 0;
  virtual void eval(Cycle cycle) = 0;
  virtual void commit(Cycle cycle) = 0;
  // True when the component has no pending work; used by run-to-idle.
  virtual bool idle() const { return true; }
};

enum class Phase { Idle, Eval, Commit };

enum class StopReason { MaxCycles, AllMastersDone, AssertionAbort };

const char* to_string(StopReason reason);

struct SimSummary {
  Cycle total_cycles = 0;
  std::uint64_t completed_transactions = 0;
  StopReason terminated_reason = StopReason::MaxCycles;
};

// Cycle-stepped simulation engine. Components are invoked by direct call in
// registration order; all components finish Eval before any Commit runs.
class SimWorld {
 public:
  using ComponentId = std::size_t;
  using Observer = std::function<void(Cycle)>;

  // Registration is only legal before the first step. Ids are dense and equal
  // to registration order.
  ComponentId register_component(Component& component);

  // Post-commit hooks, run after every step in add order (snapshotting,
  // checking, tracing). An observer may throw AbortSimulation.
  void add_observer(Observer fn);

  // For run-to-idle summaries; supplied by whoever owns the traffic sources.
  void set_completed_supplier(std::function<std::uint64_t()> fn);

  // Execute one cycle: Eval all, Commit all, then observers.
  void step();

  SimSummary run(Cycle max_cycles, bool stop_when_idle);

  bool all_idle() const;
  Cycle cycle() const { return cycle_; }
  Phase phase() const { return phase_; }
  bool started() const { return started_; }
  std::size_t component_count() const { return components_.size(); }

  // Test hook: when set, eval/commit walk components in the given order.
  // Results must not depend on it; the equivalence suites verify that.
  void set_step_order(std::vector<std::size_t> order);

 private:
  std::vector<Component*> components_;
  std::vector<Observer> observers_;
  std::function<std::uint64_t()> completed_;
  std::vector<std::size_t> step_order_;
  Cycle cycle_ = 0;
  Phase phase_ = Phase::Idle;
  bool started_ = false;
};

}  // namespace qbsim
