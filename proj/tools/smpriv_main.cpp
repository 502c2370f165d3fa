#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "smpriv/ba.hpp"
#include "smpriv/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Privacy-power curves, allocations and Monte-Carlo checks for "
                 "multi-user smart-meter systems with an average-power-limited AES"};

    std::string scenario_path;
    std::string out_dir = ".";
    std::vector<std::string> tasks;
    bool verify = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string unit;

    app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--task", tasks, "Task(s) to run (overrides the scenario's task list)");
    app.add_flag("--verify", verify, "Re-validate emitted curves (monotone, convex, I >= 0)");
    app.add_option("--seed", seed, "Simulation seed override")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--unit", unit, "Output unit: bits|nats (overrides the scenario)");

    CLI11_PARSE(app, argc, argv);

    try {
        smpriv::Scenario sc = smpriv::Scenario::from_file(scenario_path);
        if (!tasks.empty()) {
            for (const auto& t : tasks) {
                if (t != "curve" && t != "heuristics" && t != "allocate" && t != "slb" &&
                    t != "simulate")
                    throw std::invalid_argument("unknown task: " + t);
                if (t != "simulate" && sc.power_grid.empty())
                    throw std::invalid_argument("task '" + t + "' requires a power_grid");
            }
            sc.tasks = tasks;
        }
        if (seed_set) sc.sim_seed = seed;
        if (!unit.empty()) sc.unit = smpriv::unit_from_name(unit);
        smpriv::run_scenario(sc, out_dir, verify);
        return 0;
    } catch (const smpriv::BaNonConvergence& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
