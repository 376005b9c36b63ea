#include "qbsim/kernel.hpp"

#include <numeric>

namespace qbsim {

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxCycles: return "MaxCycles";
    case StopReason::AllMastersDone: return "AllMastersDone";
    case StopReason::AssertionAbort: return "AssertionAbort";
  }
  return "?";
}

SimWorld::ComponentId SimWorld::register_component(Component& component) {
  if (started_) {
    throw SimError(Errc::RegistrationAfterStart,
                   "cannot register '" + std::string(component.name()) + "' after the first step");
  }
  components_.push_back(&component);
  return components_.size() - 1;
}

void SimWorld::add_observer(Observer fn) { observers_.push_back(std::move(fn)); }

void SimWorld::set_completed_supplier(std::function<std::uint64_t()> fn) {
  completed_ = std::move(fn);
}

void SimWorld::set_step_order(std::vector<std::size_t> order) { step_order_ = std::move(order); }

void SimWorld::step() {
  started_ = true;
  const Cycle n = cycle_;

  const std::size_t count = components_.size();
  auto at = [&](std::size_t i) -> Component& {
    return step_order_.empty() ? *components_[i] : *components_[step_order_[i]];
  };

  phase_ = Phase::Eval;
  for (std::size_t i = 0; i < count; ++i) at(i).eval(n);

  phase_ = Phase::Commit;
  for (std::size_t i = 0; i < count; ++i) at(i).commit(n);

  phase_ = Phase::Idle;
  cycle_ = n + 1;
  for (auto& obs : observers_) obs(n);
}

bool SimWorld::all_idle() const {
  for (const auto* c : components_) {
    if (!c->idle()) return false;
  }
  return true;
}

SimSummary SimWorld::run(Cycle max_cycles, bool stop_when_idle) {
  if (max_cycles == 0) {
    throw SimError(Errc::Precondition, "max_cycles must be > 0");
  }
  StopReason reason = StopReason::MaxCycles;
  try {
    while (cycle_ < max_cycles) {
      step();
      if (stop_when_idle && all_idle()) {
        reason = StopReason::AllMastersDone;
        break;
      }
    }
  } catch (const AbortSimulation&) {
    reason = StopReason::AssertionAbort;
  }
  SimSummary summary;
  summary.total_cycles = cycle_;
  summary.completed_transactions = completed_ ? completed_() : 0;
  summary.terminated_reason = reason;
  return summary;
}

}  // namespace qbsim
