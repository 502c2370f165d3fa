#pragma once

#include <functional>
#include <vector>

#include "smpriv/units.hpp"

namespace smpriv {

struct Allocation {
    std::vector<double> per_user;      // P_i* >= 0
    double level = 0.0;                // Lagrange/water level
    double total_leakage = 0.0;
    Unit unit = Unit::Nats;
    std::vector<bool> saturated;       // user fully private
    double total_power = 0.0;          // sum of per_user
};

// Per-user convex non-increasing leakage curve with analytic slope, in a
// caller-chosen unit (slopes must be in the same unit per energy unit).
struct LeakageCurve {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    double perfect_privacy_power = 0.0;
};

// KKT allocation for min sum_i I_i(P_i) s.t. sum P_i <= P: equalize marginal
// slopes across interior users by bisection on the multiplier. P beyond the
// total perfect-privacy demand is clamped.
Allocation allocate_general(const std::vector<LeakageCurve>& curves, double power,
                            Unit unit = Unit::Nats);

// Reverse waterfilling for exponential users: P_i* = min(level, lambda_i),
// leakage sum (ln(lambda_i / level))^+.
Allocation waterfill_exponential(const std::vector<double>& means, double power,
                                 Unit unit = Unit::Nats);

}  // namespace smpriv
