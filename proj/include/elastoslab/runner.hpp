#pragma once

// Fixed-step integration to a final time with optional stability monitoring.

#include <cmath>
#include <functional>
#include <string>

#include "elastoslab/stability.hpp"

namespace elastoslab {

enum class HaltReason { Completed, StabilityLost, CeilingViolated, DegenerateMap };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::Completed: return "completed";
    case HaltReason::StabilityLost: return "StabilityLost";
    case HaltReason::CeilingViolated: return "CeilingViolated";
    case HaltReason::DegenerateMap: return "DegenerateMap";
  }
  return "unknown";
}

struct RunOutcome {
  FlowState state;
  HaltReason reason = HaltReason::Completed;
  int steps = 0;
  std::string message;
};

struct RunSettings {
  double T = 0.0;
  double dt = 0.0;  ///< <= 0 selects stable_dt_bound of the initial state
  bool monitor = true;
};

/// Called after every accepted state (including the initial one) with its step index.
using StepObserver = std::function<void(const FlowState&, int)>;

/// Number of uniform steps covering [0, T] with step at most dt.
inline int step_count(double T, double dt) { return std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9))); }

/// Integrates to T. In monitored mode the stability report of the current state is checked
/// before each step, so a loss halts the run before the state advances further.
inline RunOutcome run_to(FlowState st, const RunSettings& rs, const StepObserver& observe = {}) {
  double dt = rs.dt > 0.0 ? rs.dt : stable_dt_bound(st);
  const int steps = step_count(rs.T, dt);
  dt = rs.T / steps;
  RunOutcome out;
  out.state = st;
  if (observe) observe(st, 0);
  try {
    for (int k = 0; k < steps; ++k) {
      if (rs.monitor) require_stable(stability_report(out.state), out.state.params.c0);
      out.state = step(out.state, dt);
      out.steps = k + 1;
      if (observe) observe(out.state, k + 1);
    }
    if (rs.monitor) require_stable(stability_report(out.state), out.state.params.c0);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::StabilityLost: out.reason = HaltReason::StabilityLost; break;
      case ErrorKind::CeilingViolated: out.reason = HaltReason::CeilingViolated; break;
      case ErrorKind::DegenerateMap: out.reason = HaltReason::DegenerateMap; break;
      default: throw;
    }
    out.message = e.what();
  }
  return out;
}

}  // namespace elastoslab
