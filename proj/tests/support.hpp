#pragma once

#include <random>

#include "tdres/core.hpp"

namespace tdres::testing {

inline double numeric_pe(const ModelParams& p, const ControlFunction& u, const StepControl& ctrl = {}) {
  const QuantumState init = ground_state(u(p.tau0), p.delta_tilde, p.tau0);
  const Trajectory tr = propagate(u, p.delta_tilde, init, p.tau0, p.tauf, ctrl);
  return transition_probability(tr.back(), eigenframe(u(p.tauf), p.delta_tilde));
}

inline ControlFunction power_sweep(int n) {
  return {[n](double t) { return ipow(t, n); }, "tau^n"};
}

inline std::mt19937_64 rng(unsigned seed = 12345) { return std::mt19937_64(seed); }

}  // namespace tdres::testing
