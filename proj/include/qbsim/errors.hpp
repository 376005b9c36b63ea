#pragma once

#include <stdexcept>
#include <string>

#include "qbsim/types.hpp"

namespace qbsim {

enum class Errc {
  RegistrationAfterStart,
  OutstandingRequest,
  UnknownMaster,
  NotGranted,
  AddressOutOfRange,
  MisalignedAddress,
  BurstCrossesRow,
  IllegalCommand,
  InvalidSpec,
  ParseError,
  ValidationError,
  ZeroCycles,
  UnknownFormat,
  Precondition,
};

const char* errc_name(Errc code) noexcept;

// Recoverable contract violation: bad call, bad config, bad input.
class SimError : public std::runtime_error {
 public:
  SimError(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Fatal self-check failure. Thrown by the checker (or the DDR FSM) to stop
// the run; the kernel reports termination as AssertionAbort.
class AbortSimulation : public std::runtime_error {
 public:
  AbortSimulation(std::string rule, Cycle cycle, const std::string& what)
      : std::runtime_error("[" + rule + "] cycle " + std::to_string(cycle) + ": " + what),
        rule_(std::move(rule)),
        cycle_(cycle) {}

  const std::string& rule() const noexcept { return rule_; }
  Cycle cycle() const noexcept { return cycle_; }

 private:
  std::string rule_;
  Cycle cycle_;
};

}  // namespace qbsim
