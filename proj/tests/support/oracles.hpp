#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

#include "qbsim/bus.hpp"
#include "qbsim/ddrc.hpp"

namespace qbsim::test {

// Bit-arithmetic reference for the address split, written independently of
// decode_address: walk the beat index field by field.
inline DecodedAddr decode_oracle(std::uint64_t addr, unsigned width_bits, unsigned col_bits,
                                 unsigned bank_bits) {
  std::uint64_t beat = addr / (width_bits / 8);
  DecodedAddr d;
  d.col = static_cast<unsigned>(beat % (1ull << col_bits));
  beat /= (1ull << col_bits);
  d.bank = static_cast<unsigned>(beat % (1ull << bank_bits));
  beat /= (1ull << bank_bits);
  d.row = beat;
  return d;
}

// Hand-applied filter chain over plain data, used as the arbitration oracle.
// Kept deliberately naive: sets as sorted vectors, one pass per filter.
struct OracleCandidate {
  MasterId master;
  bool rt = false;
  long long slack = 0;     // objective - since_last_grant
  bool bank_ok = true;     // not blocked (filter 2)
  bool bank_idle = false;  // idle or row hit (filter 5)
  int rank = 0;            // static priority (filter 6)
  bool is_pseudo = false;
};

inline std::optional<MasterId> arbitration_oracle(std::vector<OracleCandidate> set,
                                                  long long urgency_threshold,
                                                  bool buffer_pressure, MasterId rr_pointer,
                                                  const std::array<bool, 7>& enabled) {
  if (set.empty()) return std::nullopt;
  auto keep = [&](auto pred) {
    std::vector<OracleCandidate> out;
    for (const auto& c : set) {
      if (pred(c)) out.push_back(c);
    }
    if (!out.empty()) set = out;  // a filter never empties a non-empty set
  };
  if (enabled[1]) keep([&](const OracleCandidate& c) { return c.bank_ok; });
  if (enabled[2]) {
    bool urgent = std::any_of(set.begin(), set.end(), [&](const OracleCandidate& c) {
      return c.rt && c.slack <= urgency_threshold;
    });
    if (urgent) {
      long long best = 0;
      bool first = true;
      for (const auto& c : set) {
        if (c.rt && c.slack <= urgency_threshold && (first || c.slack < best)) {
          best = c.slack;
          first = false;
        }
      }
      keep([&](const OracleCandidate& c) { return c.rt && c.slack == best; });
    }
  }
  if (enabled[3] && buffer_pressure) {
    keep([&](const OracleCandidate& c) { return c.is_pseudo; });
  }
  if (enabled[4]) keep([&](const OracleCandidate& c) { return c.bank_idle; });
  if (enabled[5]) {
    int best = set.front().rank;
    for (const auto& c : set) best = std::max(best, c.rank);
    keep([&](const OracleCandidate& c) { return c.rank == best; });
  }
  // round robin: smallest id >= pointer, else smallest id
  std::sort(set.begin(), set.end(),
            [](const OracleCandidate& a, const OracleCandidate& b) { return a.master < b.master; });
  for (const auto& c : set) {
    if (c.master >= rr_pointer) return c.master;
  }
  return set.front().master;
}

}  // namespace qbsim::test
