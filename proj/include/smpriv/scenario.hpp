#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpriv/load_models.hpp"
#include "smpriv/units.hpp"

namespace smpriv {

struct SimPolicySpec {
    std::string kind = "optimal";  // optimal | time_division | limit_max | identity
    double power = 0.0;            // per-user AES power (optimal / time_division)
    std::size_t threshold = 0;     // limit_max level index
};

struct Scenario {
    MultiUserModel model;
    std::vector<double> power_grid;
    Unit unit = Unit::Bits;
    std::vector<std::string> tasks;  // subset of curve/heuristics/allocate/slb/simulate
    std::uint64_t sim_slots = 1000000;
    std::uint64_t sim_seed = 1;
    SimPolicySpec sim_policy;
    bool sim_dump_trace = false;

    static Scenario from_json_text(const std::string& text);
    static Scenario from_file(const std::string& path);
};

// Runs the scenario's tasks and writes curve.csv / heuristics.csv /
// allocate.json / slb.json / sim.json into out_dir. When verify is set,
// written curves are re-read and re-validated (monotone, convex, I >= 0).
void run_scenario(const Scenario& scenario, const std::string& out_dir, bool verify);

}  // namespace smpriv
