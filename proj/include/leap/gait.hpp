#pragma once

#include <stdexcept>

#include "leap/types.hpp"

// Open-loop time-based contact scheduler for the pronking gait: all four
// legs share one stance/swing phase.

namespace leap::gait {

struct LegSchedule {
  std::array<bool, kNumLegs> desired_contact{};
  double phase_fraction = 0.0;      // [0,1) within the current phase
  double remaining_phase_time = 0.0;  // (0, phase duration]
  long cycle_index = 0;
  bool stance = false;
};

struct InvalidDuration : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Cycle = stance_duration + swing_duration; stance first.  A phase boundary
// belongs to the phase being entered (t = stance_duration is swing).
inline LegSchedule schedule_at(double t, double stance_duration = 0.5,
                               double swing_duration = 0.5) {
  if (stance_duration <= 0.0 || swing_duration <= 0.0)
    throw InvalidDuration("gait: phase durations must be positive");
  const double cycle = stance_duration + swing_duration;
  LegSchedule s;
  s.cycle_index = static_cast<long>(std::floor(t / cycle));
  double tc = t - static_cast<double>(s.cycle_index) * cycle;
  if (tc < 0.0) tc = 0.0;  // guard against fp rounding at boundaries
  if (tc >= cycle) tc -= cycle;
  s.stance = tc < stance_duration;
  const double phase_start = s.stance ? 0.0 : stance_duration;
  const double phase_dur = s.stance ? stance_duration : swing_duration;
  s.phase_fraction = (tc - phase_start) / phase_dur;
  s.remaining_phase_time = phase_dur - (tc - phase_start);
  s.desired_contact.fill(s.stance);
  return s;
}

}  // namespace leap::gait
