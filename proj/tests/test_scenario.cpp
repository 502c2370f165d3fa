#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "smpriv/closed_forms.hpp"
#include "smpriv/scenario.hpp"

using namespace smpriv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Parse curve.csv rows into (P, I) pairs; asserts the expected header.
std::vector<std::pair<double, double>> read_curve(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "P,I,unit,solver");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        const double power = std::stod(cell);
        std::getline(ss, cell, ',');
        rows.push_back({power, std::stod(cell)});
    }
    return rows;
}

}  // namespace

TEST_CASE("scenario parsing") {
    const std::string text = R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "power_grid": {"min": 0.0, "max": 0.5, "steps": 11},
        "unit": "bits",
        "tasks": ["curve"],
        "sim": {"n": 1000, "seed": 9, "policy": {"kind": "optimal", "power": 0.2}}
    })";
    const Scenario sc = Scenario::from_json_text(text);
    CHECK(sc.model.users.size() == 1);
    CHECK(sc.power_grid.size() == 11);
    CHECK(sc.power_grid.front() == 0.0);
    CHECK(sc.power_grid.back() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sc.unit == Unit::Bits);
    CHECK(sc.tasks == std::vector<std::string>{"curve"});
    CHECK(sc.sim_slots == 1000);
    CHECK(sc.sim_seed == 9);
    CHECK(sc.sim_policy.kind == "optimal");
}

TEST_CASE("scenario validation failures") {
    CHECK_THROWS_AS(Scenario::from_json_text(R"({"users": []})"), std::invalid_argument);
    CHECK_THROWS_AS(
        Scenario::from_json_text(
            R"({"users": [{"kind": "nope"}], "power_grid": [0], "tasks": []})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        Scenario::from_json_text(
            R"({"users": [{"kind": "binary", "high": 1, "p_low": 0.5}],
                "power_grid": [0.5, 0.1], "tasks": ["curve"]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        Scenario::from_json_text(
            R"({"users": [{"kind": "binary", "high": 1, "p_low": 0.5}],
                "power_grid": [-0.5], "tasks": ["curve"]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        Scenario::from_json_text(
            R"({"users": [{"kind": "binary", "high": 1, "p_low": 0.5}],
                "tasks": ["curve"]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(
        Scenario::from_json_text(
            R"({"users": [{"kind": "binary", "high": 1, "p_low": 0.5}],
                "power_grid": [0.1], "tasks": ["dance"]})"),
        std::invalid_argument);
    CHECK_THROWS_AS(Scenario::from_file("/nonexistent/scenario.json"), std::invalid_argument);
}

TEST_CASE("uniform user shorthand expands to an evenly spaced alphabet") {
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "uniform", "points": 21, "mean": 1.0}],
        "power_grid": [0.0], "tasks": []
    })");
    const auto& d = std::get<DiscreteLoadModel>(sc.model.users[0]);
    CHECK(d.size() == 21);
    CHECK(d.alphabet()[1] == doctest::Approx(0.1).epsilon(1e-13));
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("curve task writes the closed-form binary curve") {
    TempDir dir("smpriv_test_curve");
    Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "power_grid": {"min": 0.0, "max": 0.5, "steps": 6},
        "tasks": ["curve"]
    })");
    run_scenario(sc, dir.path.string(), true);

    const auto rows = read_curve(dir.path / "curve.csv");
    REQUIRE(rows.size() == 6);
    BinaryLoadModel b(0.0, 1.0, 0.5);
    for (const auto& [p, leak] : rows) {
        CHECK(leak == doctest::Approx(binary_leakage(b, p)).epsilon(1e-12));
    }
    CHECK(rows.front().second == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(rows.back().second == 0.0);
}

TEST_CASE("reruns produce identical bytes") {
    Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "uniform", "points": 11, "mean": 1.0}],
        "power_grid": {"min": 0.0, "max": 1.0, "steps": 5},
        "tasks": ["curve", "heuristics"],
        "sim": {"n": 2000, "seed": 4, "policy": {"kind": "time_division", "power": 0.5}}
    })");
    sc.tasks.push_back("simulate");

    TempDir a("smpriv_test_rerun_a"), b("smpriv_test_rerun_b");
    run_scenario(sc, a.path.string(), false);
    run_scenario(sc, b.path.string(), false);
    for (const char* f : {"curve.csv", "heuristics.csv", "sim.json"}) {
        CHECK(slurp(a.path / f) == slurp(b.path / f));
    }
}

TEST_CASE("empty task list writes nothing") {
    TempDir dir("smpriv_test_empty");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "power_grid": [0.0, 0.5], "tasks": []
    })");
    run_scenario(sc, dir.path.string(), false);
    CHECK_FALSE(fs::exists(dir.path / "curve.csv"));
    CHECK_FALSE(fs::exists(dir.path / "allocate.json"));
}

TEST_CASE("multi-user exponential scenario uses reverse waterfilling") {
    TempDir dir("smpriv_test_wf");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "exponential", "mean": 0.5},
                  {"kind": "exponential", "mean": 1.0},
                  {"kind": "exponential", "mean": 2.0}],
        "power_grid": [2.0], "unit": "nats", "tasks": ["curve"]
    })");
    run_scenario(sc, dir.path.string(), false);
    const auto rows = read_curve(dir.path / "curve.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].second == doctest::Approx(std::log(32.0 / 9.0)).epsilon(1e-9));
    CHECK(slurp(dir.path / "curve.csv").find("reverse-waterfilling") != std::string::npos);
}

TEST_CASE("allocate task reports the per-user split") {
    TempDir dir("smpriv_test_alloc");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.9},
                  {"kind": "binary", "high": 1.0, "p_low": 0.5},
                  {"kind": "binary", "high": 1.0, "p_low": 0.1}],
        "power_grid": [0.0, 0.75, 1.5], "tasks": ["allocate"]
    })");
    run_scenario(sc, dir.path.string(), false);
    const std::string text = slurp(dir.path / "allocate.json");
    CHECK(text.find("per_user") != std::string::npos);
    CHECK(text.find("per_user_leakage") != std::string::npos);
    CHECK(text.find("\"level\": \"inf\"") != std::string::npos);  // P = 0 entry
}

TEST_CASE("slb task reports critical powers") {
    TempDir dir("smpriv_test_slb");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "exponential", "mean": 1.0}],
        "power_grid": [0.5, 1.5], "unit": "nats", "tasks": ["slb"]
    })");
    run_scenario(sc, dir.path.string(), false);
    const std::string text = slurp(dir.path / "slb.json");
    CHECK(text.find("\"critical_power\": 1.0") != std::string::npos);
    CHECK(text.find("\"achieving\": true") != std::string::npos);
    CHECK(text.find("\"achieving\": false") != std::string::npos);

    const Scenario bad = Scenario::from_json_text(R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "power_grid": [0.5], "tasks": ["slb"]
    })");
    TempDir dir2("smpriv_test_slb_bad");
    CHECK_THROWS_AS(run_scenario(bad, dir2.path.string(), false), std::invalid_argument);
}

TEST_CASE("heuristic curves on a non-uniform model are labeled as the exact variant") {
    TempDir dir("smpriv_test_heur");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "discrete", "alphabet": [0.0, 1.0, 3.0], "pmf": [0.5, 0.3, 0.2]}],
        "power_grid": [0.0, 0.4, 0.8], "tasks": ["heuristics"]
    })");
    run_scenario(sc, dir.path.string(), true);
    const std::string text = slurp(dir.path / "heuristics.csv");
    CHECK(text.find("limit-max-exact-extension") != std::string::npos);
    CHECK(text.find("time-division") != std::string::npos);
    CHECK(text.find("blahut-arimoto") != std::string::npos);
}

TEST_CASE("joint pmf scenarios run through the product solver") {
    TempDir dir("smpriv_test_joint");
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "binary", "high": 1.0, "p_low": 0.5},
                  {"kind": "binary", "high": 1.0, "p_low": 0.5}],
        "joint_pmf": [0.4, 0.1, 0.1, 0.4],
        "power_grid": [0.0, 0.5, 1.0], "tasks": ["curve"]
    })");
    run_scenario(sc, dir.path.string(), true);
    const auto rows = read_curve(dir.path / "curve.csv");
    REQUIRE(rows.size() == 3);
    const double h = -2.0 * (0.4 * std::log2(0.4) + 0.1 * std::log2(0.1));
    CHECK(rows[0].second == doctest::Approx(h).epsilon(1e-12));
    CHECK(rows[2].second == 0.0);
    CHECK(rows[1].second > 0.0);
}

TEST_CASE("piecewise users have no exact curve solver") {
    const Scenario sc = Scenario::from_json_text(R"({
        "users": [{"kind": "piecewise_uniform", "hi": 2.0}],
        "power_grid": [0.5], "tasks": ["curve"]
    })");
    TempDir dir("smpriv_test_piecewise");
    CHECK_THROWS_AS(run_scenario(sc, dir.path.string(), false), std::invalid_argument);
}
