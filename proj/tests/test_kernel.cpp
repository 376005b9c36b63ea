#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <string>
#include <vector>

#include "qbsim/kernel.hpp"

using namespace qbsim;

namespace {

// Two-phase counter that reads a peer's committed value and accumulates it.
// Communication is pull-only from committed state, as the contract requires.
class Mixer : public Component {
 public:
  Mixer(std::string name, int start) : name_(std::move(name)), value_(start) {}

  void wire(const Mixer& peer) { peer_ = &peer; }

  std::string_view name() const override { return name_; }

  void eval(Cycle) override { staged_ = value_ + (peer_ ? peer_->value() : 1); }
  void commit(Cycle) override { value_ = staged_; }
  bool idle() const override { return true; }

  int value() const { return value_; }

 private:
  std::string name_;
  const Mixer* peer_ = nullptr;
  int value_ = 0;
  int staged_ = 0;
};

// Writer publishes a value at a chosen cycle; Watcher records when it first
// observes it through committed state.
class Writer : public Component {
 public:
  Writer(Cycle at, int v) : at_(at), publish_(v) {}
  std::string_view name() const override { return "writer"; }
  void eval(Cycle n) override { staged_ = n == at_ ? publish_ : value_; }
  void commit(Cycle) override { value_ = staged_; }
  int value() const { return value_; }

 private:
  Cycle at_;
  int publish_;
  int value_ = 0;
  int staged_ = 0;
};

class Watcher : public Component {
 public:
  explicit Watcher(const Writer& w) : writer_(&w) {}
  std::string_view name() const override { return "watcher"; }
  void eval(Cycle n) override {
    if (!seen_at_ && writer_->value() != 0) staged_seen_ = n;
  }
  void commit(Cycle) override {
    if (!seen_at_ && staged_seen_) seen_at_ = staged_seen_;
  }
  std::optional<Cycle> seen_at() const { return seen_at_; }

 private:
  const Writer* writer_;
  std::optional<Cycle> staged_seen_;
  std::optional<Cycle> seen_at_;
};

}  // namespace

TEST_CASE("registration ids are dense and ordered") {
  SimWorld world;
  Mixer a("a", 0), b("b", 0), c("c", 0);
  CHECK(world.register_component(a) == 0);
  CHECK(world.register_component(b) == 1);
  CHECK(world.register_component(c) == 2);
}

TEST_CASE("registration after the first step is rejected") {
  SimWorld world;
  Mixer a("a", 0);
  world.register_component(a);
  world.step();
  Mixer late("late", 0);
  CHECK_THROWS_AS(world.register_component(late), SimError);
  try {
    world.register_component(late);
  } catch (const SimError& e) {
    CHECK(e.code() == Errc::RegistrationAfterStart);
  }
}

TEST_CASE("empty world step only advances the cycle counter") {
  SimWorld world;
  CHECK(world.cycle() == 0);
  world.step();
  CHECK(world.cycle() == 1);
  CHECK(world.phase() == Phase::Idle);
}

TEST_CASE("a value written at cycle N is first observed at cycle N+1") {
  SimWorld world;
  Writer w(/*at=*/5, /*v=*/42);
  Watcher watcher(w);
  world.register_component(w);
  world.register_component(watcher);
  for (int i = 0; i < 10; ++i) world.step();
  REQUIRE(watcher.seen_at().has_value());
  CHECK(*watcher.seen_at() == 6);
}

TEST_CASE("mutually-reading components commit identically for both orders") {
  // Oracle: a simultaneous-update stepper over the same recurrence.
  //   a' = a + b, b' = b + a
  std::array<int, 2> oracle{3, 5};
  std::vector<std::array<int, 2>> expected;
  for (int i = 0; i < 20; ++i) {
    const int a = oracle[0], b = oracle[1];
    oracle = {a + b, b + a};
    expected.push_back(oracle);
  }

  auto run_order = [&](bool a_first) {
    Mixer a("a", 3), b("b", 5);
    a.wire(b);
    b.wire(a);
    SimWorld world;
    if (a_first) {
      world.register_component(a);
      world.register_component(b);
    } else {
      world.register_component(b);
      world.register_component(a);
    }
    std::vector<std::array<int, 2>> trace;
    for (int i = 0; i < 20; ++i) {
      world.step();
      trace.push_back({a.value(), b.value()});
    }
    return trace;
  };

  CHECK(run_order(true) == expected);
  CHECK(run_order(false) == expected);
}

TEST_CASE("run honors max_cycles with no components") {
  SimWorld world;
  SimSummary s = world.run(100, /*stop_when_idle=*/false);
  CHECK(s.total_cycles == 100);
  CHECK(s.completed_transactions == 0);
  CHECK(s.terminated_reason == StopReason::MaxCycles);
}

TEST_CASE("run rejects max_cycles of zero") {
  SimWorld world;
  CHECK_THROWS_AS(world.run(0, false), SimError);
}

TEST_CASE("observers see each committed cycle and may abort") {
  SimWorld world;
  Mixer a("a", 1);
  world.register_component(a);
  std::vector<Cycle> seen;
  world.add_observer([&](Cycle n) {
    seen.push_back(n);
    if (n == 3) throw AbortSimulation("test-rule", n, "stop");
  });
  SimSummary s = world.run(10, false);
  CHECK(s.terminated_reason == StopReason::AssertionAbort);
  CHECK(seen == std::vector<Cycle>{0, 1, 2, 3});
  CHECK(s.total_cycles == 4);
}
