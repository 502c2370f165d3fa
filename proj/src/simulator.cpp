#include "smpriv/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "smpriv/rng.hpp"

namespace smpriv {

namespace {

std::size_t sample_index(const std::vector<double>& pmf, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        if (u < acc) return i;
    }
    return pmf.size() - 1;
}

struct UserState {
    // Discrete users carry index pairs for the joint plug-in estimate.
    bool discrete = true;
    std::size_t alphabet_size = 0;
    // Continuous diagnostics accumulators.
    double v_sum = 0.0, v_sq = 0.0, y_sum = 0.0, y_sq = 0.0, vy_sum = 0.0;
    std::uint64_t atom_count = 0;
};

}  // namespace

SimReport run(const TraceConfig& config) {
    if (config.slots < 1) throw std::invalid_argument("need at least one slot");
    if (config.users.empty()) throw std::invalid_argument("need at least one user");

    for (const auto& user : config.users) {
        if (const auto* d = std::get_if<DiscretePolicyUser>(&user)) {
            if (d->policy.nx != d->model.size() || d->policy.ny != d->model.size())
                throw std::invalid_argument("policy rows do not align with the alphabet");
            for (std::size_t i = 0; i < d->policy.nx; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < d->policy.ny; ++j) row += d->policy(i, j);
                if (std::abs(row - 1.0) > 1e-10)
                    throw std::invalid_argument("policy row does not sum to 1");
            }
        }
    }

    const std::uint64_t n = config.slots;
    std::vector<UserState> states(config.users.size());
    for (std::size_t u = 0; u < config.users.size(); ++u) {
        states[u].discrete = !std::holds_alternative<ExponentialPolicyUser>(config.users[u]);
    }

    std::ofstream trace;
    if (config.trace_csv) {
        trace.open(*config.trace_csv);
        if (!trace) throw std::runtime_error("cannot open trace file " + *config.trace_csv);
        trace << "slot,user,x,y\n";
    }

    // Joint empirical counts over the discrete (X, Y) vector, keyed by the
    // flattened product indices.
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> joint_counts;
    const bool all_discrete =
        std::all_of(states.begin(), states.end(), [](const UserState& s) { return s.discrete; });

    double power_sum = 0.0, power_sq = 0.0;
    std::uint64_t violations = 0;

    for (std::uint64_t t = 0; t < n; ++t) {
        double slot_power = 0.0;
        std::uint64_t x_key = 0, y_key = 0;
        for (std::size_t u = 0; u < config.users.size(); ++u) {
            const double ux = substream_uniform(config.seed, u, t, 0);
            const double uy = substream_uniform(config.seed, u, t, 1);
            double x = 0.0, y = 0.0;

            if (const auto* dp = std::get_if<DiscretePolicyUser>(&config.users[u])) {
                const std::size_t xi = sample_index(dp->model.pmf(), ux);
                std::size_t yi = dp->model.size() - 1;
                double acc = 0.0;
                for (std::size_t j = 0; j < dp->model.size(); ++j) {
                    acc += dp->policy(xi, j);
                    if (uy < acc) {
                        yi = j;
                        break;
                    }
                }
                x = dp->model.alphabet()[xi];
                y = dp->model.alphabet()[yi];
                x_key = x_key * dp->model.size() + xi;
                y_key = y_key * dp->model.size() + yi;
            } else if (const auto* ep = std::get_if<ExponentialPolicyUser>(&config.users[u])) {
                x = -ep->model.mean * std::log1p(-ux);
                y = ep->policy.sample(x, uy);
                UserState& st = states[u];
                const double v = x - y;
                st.v_sum += v;
                st.v_sq += v * v;
                st.y_sum += y;
                st.y_sq += y * y;
                st.vy_sum += v * y;
                if (y == 0.0) ++st.atom_count;
            } else if (const auto* td = std::get_if<TimeDivisionUser>(&config.users[u])) {
                const std::size_t xi = sample_index(td->model.pmf(), ux);
                x = td->model.alphabet()[xi];
                const double frac =
                    td->model.mean() > 0.0 ? std::min(td->power / td->model.mean(), 1.0) : 1.0;
                const bool from_aes = uy < frac;
                y = from_aes ? 0.0 : x;
                // The analytic leakage of source selection treats the chosen
                // source as observable, so AES slots get their own erasure
                // symbol in the plug-in joint instead of colliding with X = 0.
                x_key = x_key * td->model.size() + xi;
                y_key = y_key * (td->model.size() + 1) +
                        (from_aes ? td->model.size() : xi);
            } else {
                const auto& lm = std::get<LimitMaxUser>(config.users[u]);
                const std::size_t xi = sample_index(lm.model.pmf(), ux);
                const std::size_t yi = std::min(xi, lm.threshold);
                x = lm.model.alphabet()[xi];
                y = lm.model.alphabet()[yi];
                x_key = x_key * lm.model.size() + xi;
                y_key = y_key * lm.model.size() + yi;
            }

            if (y > x + 1e-12) ++violations;
            slot_power += x - y;
            if (trace.is_open()) {
                trace << t << ',' << u << ',' << x << ',' << y << '\n';
            }
        }
        power_sum += slot_power;
        power_sq += slot_power * slot_power;
        if (all_discrete) ++joint_counts[{x_key, y_key}];
    }

    if (violations > 0)
        throw std::runtime_error("policy produced " + std::to_string(violations) +
                                 " feasibility violations (Y > X)");

    SimReport rep;
    rep.slots = n;
    rep.feasibility_violations = 0;
    rep.empirical_power = power_sum / static_cast<double>(n);
    const double var =
        (power_sq - power_sum * power_sum / static_cast<double>(n)) /
        (static_cast<double>(n) - (n > 1 ? 1.0 : 0.0));
    rep.power_se = n > 1 ? std::sqrt(std::max(var, 0.0) / static_cast<double>(n)) : 0.0;

    if (all_discrete) {
        // Plug-in MI from the joint counts.
        std::map<std::uint64_t, double> px, py;
        for (const auto& [key, c] : joint_counts) {
            px[key.first] += static_cast<double>(c);
            py[key.second] += static_cast<double>(c);
        }
        double mi = 0.0;
        const double dn = static_cast<double>(n);
        for (const auto& [key, c] : joint_counts) {
            const double pxy = static_cast<double>(c) / dn;
            mi += pxy * std::log(pxy * dn * dn / (px[key.first] * py[key.second]));
        }
        rep.plugin_mi_bits = std::max(mi, 0.0) / std::log(2.0);
        rep.mi_bias_bound_bits =
            (static_cast<double>(joint_counts.size()) - 1.0) / (2.0 * dn * std::log(2.0));
    }

    for (std::size_t u = 0; u < states.size(); ++u) {
        if (states[u].discrete) continue;
        const UserState& st = states[u];
        const double dn = static_cast<double>(n);
        ContinuousDiagnostics d;
        d.v_mean = st.v_sum / dn;
        const double v_var = (st.v_sq - st.v_sum * st.v_sum / dn) / (dn - 1.0);
        d.v_se = std::sqrt(std::max(v_var, 0.0) / dn);
        const double y_var = (st.y_sq - st.y_sum * st.y_sum / dn) / (dn - 1.0);
        const double cov = (st.vy_sum - st.v_sum * st.y_sum / dn) / (dn - 1.0);
        d.v_y_correlation =
            v_var > 0.0 && y_var > 0.0 ? cov / std::sqrt(v_var * y_var) : 0.0;
        d.atom_fraction = static_cast<double>(st.atom_count) / dn;
        rep.continuous_users.push_back(d);
    }
    return rep;
}

MiEstimate estimate_mi_plugin(const std::vector<std::pair<int, int>>& samples) {
    if (samples.size() < 2) throw std::invalid_argument("need at least 2 samples");
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> px, py;
    for (const auto& s : samples) {
        joint[s] += 1.0;
        px[s.first] += 1.0;
        py[s.second] += 1.0;
    }
    const double n = static_cast<double>(samples.size());
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
        mi += (c / n) * std::log(c * n / (px[key.first] * py[key.second]));
    }
    MiEstimate est;
    est.mi_bits = std::max(mi, 0.0) / std::log(2.0);
    est.bias_bound_bits = (static_cast<double>(joint.size()) - 1.0) / (2.0 * n * std::log(2.0));
    return est;
}

}  // namespace smpriv
