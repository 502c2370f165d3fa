#include "smpriv/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "smpriv/allocator.hpp"
#include "smpriv/ba.hpp"
#include "smpriv/closed_forms.hpp"
#include "smpriv/heuristics.hpp"
#include "smpriv/simulator.hpp"

namespace smpriv {

namespace {

using nlohmann::json;

UserModel parse_user(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "binary") {
        return BinaryLoadModel(j.value("low", 0.0), j.at("high").get<double>(),
                               j.at("p_low").get<double>());
    }
    if (kind == "exponential") {
        return ExponentialLoad(j.at("mean").get<double>());
    }
    if (kind == "discrete") {
        return DiscreteLoadModel(j.at("alphabet").get<std::vector<double>>(),
                                 j.at("pmf").get<std::vector<double>>());
    }
    if (kind == "uniform") {
        const std::size_t points = j.at("points").get<std::size_t>();
        double spacing;
        if (j.contains("spacing")) {
            spacing = j.at("spacing").get<double>();
        } else {
            const double mean = j.value("mean", 1.0);
            spacing = points > 1 ? 2.0 * mean / (static_cast<double>(points) - 1.0) : 0.0;
        }
        std::vector<double> alphabet(points), pmf(points, 1.0 / static_cast<double>(points));
        for (std::size_t i = 0; i < points; ++i) alphabet[i] = spacing * static_cast<double>(i);
        return DiscreteLoadModel(alphabet, pmf);
    }
    if (kind == "piecewise_uniform") {
        return PiecewiseDensity::uniform(j.value("lo", 0.0), j.at("hi").get<double>());
    }
    throw std::invalid_argument("unknown user kind: " + kind);
}

std::vector<double> parse_grid(const json& j) {
    std::vector<double> grid;
    if (j.is_array()) {
        grid = j.get<std::vector<double>>();
    } else {
        const double lo = j.at("min").get<double>();
        const double hi = j.at("max").get<double>();
        const std::size_t steps = j.at("steps").get<std::size_t>();
        if (steps < 1) throw std::invalid_argument("grid needs at least one step");
        for (std::size_t i = 0; i < steps; ++i) {
            grid.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) /
                                                      (static_cast<double>(steps) - 1.0));
        }
    }
    if (grid.empty()) throw std::invalid_argument("power grid must be non-empty");
    for (double p : grid)
        if (p < 0.0) throw std::invalid_argument("power grid values must be non-negative");
    if (!std::is_sorted(grid.begin(), grid.end()))
        throw std::invalid_argument("power grid must be sorted");
    return grid;
}

DiscreteLoadModel as_discrete(const UserModel& u) {
    if (const auto* d = std::get_if<DiscreteLoadModel>(&u)) return *d;
    if (const auto* b = std::get_if<BinaryLoadModel>(&u)) return b->to_discrete();
    throw std::invalid_argument("operation requires a discrete load model");
}

bool is_continuous(const UserModel& u) {
    return std::holds_alternative<ExponentialLoad>(u) ||
           std::holds_alternative<PiecewiseDensity>(u);
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Piecewise-linear leakage table for BA-backed users, precomputed on a grid;
// secant slopes are non-decreasing because the underlying curve is convex.
LeakageCurve curve_from_ba(const DiscreteLoadModel& model, Unit unit) {
    const auto problem = std::make_shared<BaProblem>(BaProblem::from_model(model));
    const double pp = model.perfect_privacy_power();
    const int knots = 129;
    auto ps = std::make_shared<std::vector<double>>();
    auto vs = std::make_shared<std::vector<double>>();
    for (int k = 0; k <= knots; ++k) {
        const double p = pp * k / knots;
        ps->push_back(p);
        vs->push_back(solve_at_power(*problem, p, unit).point.leakage);
    }
    LeakageCurve c;
    c.perfect_privacy_power = pp;
    c.value = [ps, vs](double p) {
        if (p <= ps->front()) return vs->front();
        if (p >= ps->back()) return vs->back();
        const auto it = std::upper_bound(ps->begin(), ps->end(), p);
        const std::size_t i = static_cast<std::size_t>(it - ps->begin());
        const double t = (p - (*ps)[i - 1]) / ((*ps)[i] - (*ps)[i - 1]);
        return (1.0 - t) * (*vs)[i - 1] + t * (*vs)[i];
    };
    c.slope = [ps, vs](double p) {
        if (p >= ps->back()) return 0.0;
        const auto it = std::upper_bound(ps->begin(), ps->end(), std::max(p, ps->front()));
        std::size_t i = static_cast<std::size_t>(it - ps->begin());
        if (i == 0) i = 1;
        return ((*vs)[i] - (*vs)[i - 1]) / ((*ps)[i] - (*ps)[i - 1]);
    };
    return c;
}

LeakageCurve curve_for_user(const UserModel& u, Unit unit) {
    if (const auto* b = std::get_if<BinaryLoadModel>(&u)) {
        const BinaryLoadModel m = *b;
        LeakageCurve c;
        c.perfect_privacy_power = m.perfect_privacy_power();
        c.value = [m, unit](double p) { return binary_leakage(m, p, unit); };
        c.slope = [m, unit](double p) { return binary_leakage_slope(m, p, unit); };
        return c;
    }
    if (const auto* e = std::get_if<ExponentialLoad>(&u)) {
        const double mean = e->mean;
        LeakageCurve c;
        c.perfect_privacy_power = mean;
        c.value = [mean, unit](double p) { return exponential_leakage(mean, p, unit); };
        c.slope = [mean, unit](double p) {
            if (p >= mean) return 0.0;
            return nats_to(-1.0 / std::max(p, 1e-300), unit);
        };
        return c;
    }
    if (const auto* d = std::get_if<DiscreteLoadModel>(&u)) {
        return curve_from_ba(*d, unit);
    }
    throw std::invalid_argument(
        "no leakage curve solver for piecewise continuous loads; use the slb task");
}

void write_curve_csv(const std::string& path, const PrivacyCurve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "P,I,unit,solver\n";
    for (const auto& pt : curve.points) {
        out << fmt(pt.power) << ',' << fmt(pt.leakage) << ',' << unit_name(pt.unit) << ','
            << pt.solver << '\n';
    }
}

void verify_curve(const PrivacyCurve& curve) {
    const auto& pts = curve.points;
    for (const auto& pt : pts) {
        if (pt.power < 0.0 || pt.leakage < 0.0)
            throw std::runtime_error("curve verification failed: negative P or I");
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].power >= pts[i - 1].power && pts[i].leakage > pts[i - 1].leakage + 1e-9)
            throw std::runtime_error("curve verification failed: leakage not non-increasing");
    }
    for (std::size_t i = 2; i < pts.size(); ++i) {
        const auto &a = pts[i - 2], &b = pts[i - 1], &c = pts[i];
        if (c.power - a.power < 1e-12) continue;
        const double t = (b.power - a.power) / (c.power - a.power);
        const double chord = (1.0 - t) * a.leakage + t * c.leakage;
        if (b.leakage > chord + 1e-6)
            throw std::runtime_error("curve verification failed: convexity violated");
    }
}

PrivacyCurve curve_for_scenario(const Scenario& sc) {
    const auto& users = sc.model.users;
    PrivacyCurve curve;

    if (sc.model.joint_pmf) {
        std::vector<std::vector<double>> alphabets;
        for (const auto& u : users) alphabets.push_back(as_discrete(u).alphabet());
        const BaProblem pr = BaProblem::from_joint(alphabets, *sc.model.joint_pmf);
        return solve_curve(pr, sc.power_grid, sc.unit);
    }

    if (users.size() == 1) {
        if (const auto* b = std::get_if<BinaryLoadModel>(&users[0])) {
            for (double p : sc.power_grid) {
                curve.points.push_back(CurvePoint{p, binary_leakage(*b, p, sc.unit), sc.unit,
                                                  "closed-form-binary", 0.0});
            }
            return curve;
        }
        if (const auto* e = std::get_if<ExponentialLoad>(&users[0])) {
            for (double p : sc.power_grid) {
                curve.points.push_back(CurvePoint{p, exponential_leakage(e->mean, p, sc.unit),
                                                  sc.unit, "closed-form-exponential", 0.0});
            }
            return curve;
        }
        if (const auto* d = std::get_if<DiscreteLoadModel>(&users[0])) {
            return solve_curve(*d, sc.power_grid, sc.unit);
        }
        throw std::invalid_argument(
            "no exact curve solver for piecewise continuous loads; use the slb task");
    }

    // Independent multi-user: allocate the budget per grid point.
    const bool all_exponential = std::all_of(users.begin(), users.end(), [](const UserModel& u) {
        return std::holds_alternative<ExponentialLoad>(u);
    });
    if (all_exponential) {
        std::vector<double> means;
        for (const auto& u : users) means.push_back(std::get<ExponentialLoad>(u).mean);
        for (double p : sc.power_grid) {
            const Allocation a = waterfill_exponential(means, p, sc.unit);
            curve.points.push_back(
                CurvePoint{p, a.total_leakage, sc.unit, "reverse-waterfilling", a.level});
        }
        return curve;
    }

    std::vector<LeakageCurve> curves;
    for (const auto& u : users) curves.push_back(curve_for_user(u, sc.unit));
    for (double p : sc.power_grid) {
        const Allocation a = allocate_general(curves, p, sc.unit);
        curve.points.push_back(CurvePoint{p, a.total_leakage, sc.unit, "kkt-allocator", a.level});
    }
    return curve;
}

json allocation_to_json(const Allocation& a) {
    json j;
    j["per_user"] = a.per_user;
    j["level"] = std::isinf(a.level) ? json("inf") : json(a.level);
    j["total_leakage"] =
        std::isinf(a.total_leakage) ? json("inf") : json(a.total_leakage);
    j["unit"] = unit_name(a.unit);
    j["saturated"] = a.saturated;
    j["total_power"] = a.total_power;
    return j;
}

void cmd_curve(const Scenario& sc, const std::string& out_dir, bool verify) {
    const PrivacyCurve curve = curve_for_scenario(sc);
    if (verify) verify_curve(curve);
    write_curve_csv(out_dir + "/curve.csv", curve);
}

void cmd_heuristics(const Scenario& sc, const std::string& out_dir, bool verify) {
    if (sc.model.users.size() != 1)
        throw std::invalid_argument("heuristics task expects a single discrete user");
    const DiscreteLoadModel model = as_discrete(sc.model.users[0]);

    PrivacyCurve all;
    const PrivacyCurve optimal = solve_curve(model, sc.power_grid, sc.unit);
    for (const auto& pt : optimal.points) all.points.push_back(pt);
    for (double p : sc.power_grid) all.points.push_back(time_division(model, p, sc.unit));

    // Uniform alphabets get the closed-form point set; anything else falls
    // back to the exact clip analysis so the numbers match a simulation.
    const auto& xs = model.alphabet();
    bool uniform = true;
    const double spacing = xs.size() > 1 ? xs[1] - xs[0] : 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(model.pmf()[i] - 1.0 / static_cast<double>(xs.size())) > 1e-12 ||
            std::abs(xs[i] - spacing * static_cast<double>(i)) > 1e-9)
            uniform = false;
    }
    for (std::size_t k = 0; k < model.size(); ++k) {
        if (uniform && model.size() > 1) {
            all.points.push_back(limit_max_output(model.size(), spacing, k, sc.unit));
        } else {
            CurvePoint pt = limit_max_clip(model, k, sc.unit);
            pt.solver = "limit-max-exact-extension";
            all.points.push_back(pt);
        }
    }
    if (verify) {
        verify_curve(optimal);
    }
    write_curve_csv(out_dir + "/heuristics.csv", all);
}

void cmd_allocate(const Scenario& sc, const std::string& out_dir) {
    const auto& users = sc.model.users;
    std::vector<LeakageCurve> curves;
    for (const auto& u : users) curves.push_back(curve_for_user(u, sc.unit));

    json out = json::array();
    for (double p : sc.power_grid) {
        const Allocation a = allocate_general(curves, p, sc.unit);
        json entry = allocation_to_json(a);
        entry["P"] = p;
        json per_leak = json::array();
        for (std::size_t i = 0; i < users.size(); ++i)
            per_leak.push_back(positive_part(curves[i].value(a.per_user[i])));
        entry["per_user_leakage"] = per_leak;
        out.push_back(entry);
    }
    std::ofstream f(out_dir + "/allocate.json");
    f << out.dump(2) << '\n';
}

void cmd_slb(const Scenario& sc, const std::string& out_dir) {
    json out = json::array();
    for (std::size_t u = 0; u < sc.model.users.size(); ++u) {
        if (!is_continuous(sc.model.users[u])) continue;
        ContinuousLoadModel cm =
            std::holds_alternative<ExponentialLoad>(sc.model.users[u])
                ? ContinuousLoadModel(std::get<ExponentialLoad>(sc.model.users[u]))
                : ContinuousLoadModel(std::get<PiecewiseDensity>(sc.model.users[u]));
        json user_out;
        user_out["user"] = u;
        user_out["differential_entropy_nats"] = differential_entropy(cm);
        json pts = json::array();
        for (double p : sc.power_grid) {
            const SlbReport rep = slb_check(cm, p);
            json jp;
            jp["P"] = p;
            const double bound = slb_bound(cm, p, sc.unit);
            jp["slb"] = std::isinf(bound) ? json("unbounded") : json(bound);
            jp["nonneg"] = rep.nonneg;
            jp["critical_power"] = rep.critical_power;
            jp["method"] = rep.method;
            jp["achieving"] = rep.has_achieving;
            json atoms = json::array();
            for (const auto& a : rep.atoms) atoms.push_back({{"x", a.x}, {"weight", a.weight}});
            jp["atoms"] = atoms;
            if (rep.g_integral) jp["g_integral"] = *rep.g_integral;
            pts.push_back(jp);
        }
        user_out["points"] = pts;
        out.push_back(user_out);
    }
    if (out.empty())
        throw std::invalid_argument("slb task requires at least one continuous user");
    std::ofstream f(out_dir + "/slb.json");
    f << out.dump(2) << '\n';
}

SimUser sim_user_for(const UserModel& u, const SimPolicySpec& spec) {
    if (spec.kind == "optimal" || spec.kind == "identity") {
        if (const auto* e = std::get_if<ExponentialLoad>(&u)) {
            if (spec.kind == "identity")
                throw std::invalid_argument("identity policy is discrete-only");
            return ExponentialPolicyUser{*e, ExponentialPolicy(e->mean, spec.power)};
        }
        const DiscreteLoadModel d = as_discrete(u);
        Policy pol;
        if (spec.kind == "identity") {
            pol = Policy{d.size(), d.size(), std::vector<double>(d.size() * d.size(), 0.0)};
            for (std::size_t i = 0; i < d.size(); ++i) pol.at(i, i) = 1.0;
        } else if (const auto* b = std::get_if<BinaryLoadModel>(&u)) {
            pol = binary_policy(*b, spec.power);
        } else {
            pol = solve_at_power(BaProblem::from_model(d), spec.power).policy;
        }
        return DiscretePolicyUser{d, pol};
    }
    if (spec.kind == "time_division") return TimeDivisionUser{as_discrete(u), spec.power};
    if (spec.kind == "limit_max") return LimitMaxUser{as_discrete(u), spec.threshold};
    throw std::invalid_argument("unknown simulation policy: " + spec.kind);
}

void cmd_simulate(const Scenario& sc, const std::string& out_dir) {
    TraceConfig cfg;
    cfg.slots = sc.sim_slots;
    cfg.seed = sc.sim_seed;
    for (const auto& u : sc.model.users) cfg.users.push_back(sim_user_for(u, sc.sim_policy));
    if (sc.sim_dump_trace) cfg.trace_csv = out_dir + "/trace.csv";

    const SimReport rep = run(cfg);
    json j;
    j["slots"] = rep.slots;
    j["seed"] = sc.sim_seed;
    j["policy"] = sc.sim_policy.kind;
    j["empirical_power"] = rep.empirical_power;
    j["power_se"] = rep.power_se;
    j["feasibility_violations"] = rep.feasibility_violations;
    if (rep.plugin_mi_bits) {
        j["plugin_mi_bits"] = *rep.plugin_mi_bits;
        j["mi_bias_bound_bits"] = rep.mi_bias_bound_bits;
    }
    json cont = json::array();
    for (const auto& d : rep.continuous_users) {
        cont.push_back({{"v_mean", d.v_mean},
                        {"v_se", d.v_se},
                        {"v_y_correlation", d.v_y_correlation},
                        {"atom_fraction", d.atom_fraction}});
    }
    j["continuous_users"] = cont;
    std::ofstream f(out_dir + "/sim.json");
    f << j.dump(2) << '\n';
}

}  // namespace

Scenario Scenario::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    Scenario sc;
    for (const auto& ju : j.at("users")) sc.model.users.push_back(parse_user(ju));
    if (j.contains("joint_pmf")) {
        sc.model.joint_pmf = j.at("joint_pmf").get<std::vector<double>>();
    }
    sc.model.validate();
    if (j.contains("power_grid")) sc.power_grid = parse_grid(j.at("power_grid"));
    sc.unit = unit_from_name(j.value("unit", std::string("bits")));
    sc.tasks = j.value("tasks", std::vector<std::string>{});
    if (j.contains("sim")) {
        const auto& js = j.at("sim");
        sc.sim_slots = js.value("n", sc.sim_slots);
        sc.sim_seed = js.value("seed", sc.sim_seed);
        sc.sim_dump_trace = js.value("dump_trace", false);
        if (js.contains("policy")) {
            const auto& jp = js.at("policy");
            sc.sim_policy.kind = jp.value("kind", std::string("optimal"));
            sc.sim_policy.power = jp.value("power", 0.0);
            sc.sim_policy.threshold = jp.value("threshold", std::size_t{0});
        }
    }
    for (const auto& t : sc.tasks) {
        if (t != "curve" && t != "heuristics" && t != "allocate" && t != "slb" &&
            t != "simulate")
            throw std::invalid_argument("unknown task: " + t);
        if (t != "simulate" && sc.power_grid.empty())
            throw std::invalid_argument("task '" + t + "' requires a power_grid");
    }
    return sc;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open scenario file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

void run_scenario(const Scenario& sc, const std::string& out_dir, bool verify) {
    std::filesystem::create_directories(out_dir);
    for (const auto& task : sc.tasks) {
        if (task == "curve") cmd_curve(sc, out_dir, verify);
        if (task == "heuristics") cmd_heuristics(sc, out_dir, verify);
        if (task == "allocate") cmd_allocate(sc, out_dir);
        if (task == "slb") cmd_slb(sc, out_dir);
        if (task == "simulate") cmd_simulate(sc, out_dir);
    }
}

}  // namespace smpriv
