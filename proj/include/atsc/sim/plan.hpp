#pragma once

#include <array>
#include <cmath>
#include <string>

#include "atsc/errors.hpp"

namespace atsc {

// One signal cycle's green durations, seconds, in Table-order
// [Upper, Right, Lower, Left]. The simulator accepts any nonnegative
// durations here; the RL action space imposes its own bounds on top
// (see a3c/action.hpp). Baseline schedules such as FST-120 are allowed
// to exceed the RL bounds.
struct PhasePlan {
    std::array<double, 4> greens{35.0, 35.0, 35.0, 35.0};

    double cycle_length(double intergreen) const {
        return greens[0] + greens[1] + greens[2] + greens[3] + 4.0 * intergreen;
    }
};

inline void validate_phase_plan(const PhasePlan& plan, double timestep, double intergreen) {
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double g = plan.greens[i];
        if (!(g >= 0.0) || !std::isfinite(g))
            throw ArgumentError("phase plan: green[" + std::to_string(i) + "] must be >= 0");
        const double steps = g / timestep;
        if (std::abs(steps - std::round(steps)) > 1e-9)
            throw ArgumentError("phase plan: green[" + std::to_string(i) +
                                "] is not a multiple of the timestep");
        total += g;
    }
    const double ig_steps = intergreen / timestep;
    if (std::abs(ig_steps - std::round(ig_steps)) > 1e-9)
        throw ArgumentError("phase plan: intergreen is not a multiple of the timestep");
    if (total + 4.0 * intergreen <= 0.0)
        throw ArgumentError("phase plan: cycle length must be positive");
}

} // namespace atsc
