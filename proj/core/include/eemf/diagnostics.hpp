#pragma once

#include <cstdint>

namespace eemf {

// Per-thread tallies of numerical fallbacks. Each Monte-Carlo run executes
// on one thread, so callers snapshot before and after a unit of work.
struct DiagnosticCounters {
  std::uint64_t jitter_applied = 0;
  std::uint64_t weight_underflow = 0;
  std::uint64_t zero_support_radial = 0;
  std::uint64_t singular_jacobian = 0;

  DiagnosticCounters operator-(const DiagnosticCounters& other) const {
    return {jitter_applied - other.jitter_applied,
            weight_underflow - other.weight_underflow,
            zero_support_radial - other.zero_support_radial,
            singular_jacobian - other.singular_jacobian};
  }
  DiagnosticCounters& operator+=(const DiagnosticCounters& other) {
    jitter_applied += other.jitter_applied;
    weight_underflow += other.weight_underflow;
    zero_support_radial += other.zero_support_radial;
    singular_jacobian += other.singular_jacobian;
    return *this;
  }
};

DiagnosticCounters& thread_diagnostics();

}  // namespace eemf
