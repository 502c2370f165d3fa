#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smpriv/ba.hpp"
#include "smpriv/closed_forms.hpp"
#include "smpriv/heuristics.hpp"
#include "smpriv/load_models.hpp"

namespace smpriv {

// Per-user memoryless stochastic policy applied each slot.
struct DiscretePolicyUser {
    DiscreteLoadModel model;
    Policy policy;  // rows aligned with the model alphabet
};

struct ExponentialPolicyUser {
    ExponentialLoad model;
    ExponentialPolicy policy;
};

struct TimeDivisionUser {
    DiscreteLoadModel model;
    double power = 0.0;
};

struct LimitMaxUser {
    DiscreteLoadModel model;
    std::size_t threshold = 0;
};

using SimUser = std::variant<DiscretePolicyUser, ExponentialPolicyUser, TimeDivisionUser,
                             LimitMaxUser>;

struct TraceConfig {
    std::uint64_t slots = 0;
    std::uint64_t seed = 0;
    std::vector<SimUser> users;
    std::optional<std::string> trace_csv;  // dump `slot,user,x,y` when set
};

struct ContinuousDiagnostics {
    double v_mean = 0.0;       // should match the policy power
    double v_se = 0.0;
    double v_y_correlation = 0.0;  // ~0: V independent of Y
    double atom_fraction = 0.0;    // empirical mass of Y = 0
};

struct SimReport {
    std::uint64_t slots = 0;
    double empirical_power = 0.0;  // mean of sum_i (X_i - Y_i)
    double power_se = 0.0;
    std::uint64_t feasibility_violations = 0;
    // Plug-in MI over the joint empirical pmf of the discrete (X, Y) vector;
    // absent when any user is continuous.
    std::optional<double> plugin_mi_bits;
    double mi_bias_bound_bits = 0.0;  // Miller-Madow order: (cells-1)/(2n ln 2)
    std::vector<ContinuousDiagnostics> continuous_users;
};

SimReport run(const TraceConfig& config);

struct MiEstimate {
    double mi_bits = 0.0;
    double bias_bound_bits = 0.0;
};

// Plug-in MI of the empirical joint pmf of paired discrete samples. The bias
// is reported, not corrected.
MiEstimate estimate_mi_plugin(const std::vector<std::pair<int, int>>& samples);

}  // namespace smpriv
