#include "eemf/diagnostics.hpp"

namespace eemf {

DiagnosticCounters& thread_diagnostics() {
  thread_local DiagnosticCounters counters;
  return counters;
}

}  // namespace eemf
