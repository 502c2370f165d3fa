#include "smpriv/ba.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smpriv {

BaNonConvergence::BaNonConvergence(std::string msg, BaSolution last)
    : std::runtime_error(std::move(msg)), last_iterate(std::move(last)) {}

BaProblem BaProblem::from_model(const DiscreteLoadModel& model) {
    return from_model(model, model.alphabet());
}

BaProblem BaProblem::from_model(const DiscreteLoadModel& model,
                                const std::vector<double>& output_alphabet) {
    BaProblem p;
    p.px_ = model.pmf();
    p.ny_ = output_alphabet.size();
    const auto& xs = model.alphabet();
    p.allowed_.assign(xs.size() * p.ny_, 0);
    p.dist_.assign(xs.size() * p.ny_, 0.0);
    p.cheapest_y_.assign(xs.size(), 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p.ny_; ++j) {
            const double d = xs[i] - output_alphabet[j];
            if (d >= -1e-12) {
                p.allowed_[i * p.ny_ + j] = 1;
                p.dist_[i * p.ny_ + j] = std::max(d, 0.0);
                if (p.dist_[i * p.ny_ + j] < best) {
                    best = p.dist_[i * p.ny_ + j];
                    p.cheapest_y_[i] = j;
                }
            }
        }
        if (!std::isfinite(best))
            throw std::invalid_argument("no feasible output for some input level");
    }
    return p;
}

BaProblem BaProblem::from_joint(const std::vector<std::vector<double>>& alphabets,
                                const std::vector<double>& joint_pmf) {
    std::size_t product = 1;
    for (const auto& a : alphabets) product *= a.size();
    if (product > 4096)
        throw std::invalid_argument("product alphabet exceeds the 4096-entry cap");
    if (joint_pmf.size() != product)
        throw std::invalid_argument("joint pmf size does not match product alphabet");

    // Decode flat index -> per-user level vector (last user fastest).
    auto decode = [&](std::size_t idx, std::vector<double>& out) {
        for (std::size_t u = alphabets.size(); u-- > 0;) {
            out[u] = alphabets[u][idx % alphabets[u].size()];
            idx /= alphabets[u].size();
        }
    };

    BaProblem p;
    p.px_ = joint_pmf;
    p.ny_ = product;
    p.allowed_.assign(product * product, 0);
    p.dist_.assign(product * product, 0.0);
    p.cheapest_y_.assign(product, 0);
    std::vector<double> xv(alphabets.size()), yv(alphabets.size());
    for (std::size_t i = 0; i < product; ++i) {
        decode(i, xv);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < product; ++j) {
            decode(j, yv);
            bool ok = true;
            double d = 0.0;
            for (std::size_t u = 0; u < alphabets.size(); ++u) {
                if (yv[u] > xv[u] + 1e-12) {
                    ok = false;
                    break;
                }
                d += xv[u] - yv[u];
            }
            if (ok) {
                p.allowed_[i * product + j] = 1;
                p.dist_[i * product + j] = std::max(d, 0.0);
                if (d < best) {
                    best = d;
                    p.cheapest_y_[i] = j;
                }
            }
        }
    }
    return p;
}

double BaProblem::entropy_nats() const {
    double h = 0.0;
    for (double p : px_) h -= xlnx(p);
    return h;
}

double BaProblem::max_useful_power() const {
    // Smallest E[d] over constant outputs feasible for every positive-mass
    // input: the perfect-privacy power.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ny_; ++j) {
        bool universal = true;
        double avg = 0.0;
        for (std::size_t i = 0; i < px_.size(); ++i) {
            if (px_[i] < 1e-15) continue;
            if (!allowed_[i * ny_ + j]) {
                universal = false;
                break;
            }
            avg += px_[i] * dist_[i * ny_ + j];
        }
        if (universal) best = std::min(best, avg);
    }
    return best;
}

namespace {

struct Stats {
    double mi = 0.0;
    double distortion = 0.0;
};

Stats evaluate(const BaProblem& pr, const std::vector<double>& f,
               std::vector<double>& q) {
    const std::size_t nx = pr.nx(), ny = pr.ny();
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        const double px = pr.input_pmf()[i];
        if (px < 1e-15) continue;
        for (std::size_t j = 0; j < ny; ++j) q[j] += px * f[i * ny + j];
    }
    Stats st;
    for (std::size_t i = 0; i < nx; ++i) {
        const double px = pr.input_pmf()[i];
        if (px < 1e-15) continue;
        for (std::size_t j = 0; j < ny; ++j) {
            const double fij = f[i * ny + j];
            if (fij < 1e-300) continue;
            st.mi += px * fij * std::log(fij / q[j]);
            st.distortion += px * fij * pr.distortion(i, j);
        }
    }
    if (st.mi < 0.0) st.mi = 0.0;
    return st;
}

Policy constant_min_policy(const BaProblem& pr);

}  // namespace

BaSolution ba_fixed_slope(const BaProblem& pr, double slope, double tol, int max_iter) {
    if (slope > 0.0) throw std::invalid_argument("slope must be <= 0");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const std::size_t nx = pr.nx(), ny = pr.ny();

    if (slope == 0.0) {
        // With no power term the point mass on the cheapest universally
        // feasible output is an exact fixed point: zero leakage, max power.
        BaSolution sol;
        sol.policy = constant_min_policy(pr);
        std::vector<double> q0(ny, 0.0);
        const Stats st = evaluate(pr, sol.policy.rows, q0);
        sol.output_pmf = std::move(q0);
        sol.mutual_info_nats = st.mi;
        sol.avg_distortion = st.distortion;
        sol.lagrangian_nats = st.mi;
        sol.gap = 0.0;
        sol.iterations = 0;
        return sol;
    }

    std::vector<double> f(nx * ny, 0.0);
    std::vector<double> q(ny, 0.0);

    // Uniform start over outputs reachable from positive-mass inputs.
    std::vector<std::uint8_t> reachable(ny, 0);
    for (std::size_t i = 0; i < nx; ++i) {
        if (pr.input_pmf()[i] < 1e-15) continue;
        for (std::size_t j = 0; j < ny; ++j)
            if (pr.allowed(i, j)) reachable[j] = 1;
    }
    const double n_reach =
        static_cast<double>(std::count(reachable.begin(), reachable.end(), 1));
    for (std::size_t j = 0; j < ny; ++j) q[j] = reachable[j] ? 1.0 / n_reach : 0.0;

    double prev_lagrangian = std::numeric_limits<double>::infinity();
    BaSolution sol;
    for (int it = 1; it <= max_iter; ++it) {
        // f-update: f(y|x) proportional to q(y) exp(slope * d(x,y)) on the mask.
        for (std::size_t i = 0; i < nx; ++i) {
            if (pr.input_pmf()[i] < 1e-15) {
                // Zero-mass rows do not affect the objective; pin them to the
                // cheapest feasible output so the policy stays row-stochastic.
                for (std::size_t j = 0; j < ny; ++j) f[i * ny + j] = 0.0;
                f[i * ny + pr.cheapest_output(i)] = 1.0;
                continue;
            }
            double z = 0.0;
            for (std::size_t j = 0; j < ny; ++j) {
                double w = 0.0;
                if (pr.allowed(i, j) && q[j] > 0.0)
                    w = q[j] * std::exp(slope * pr.distortion(i, j));
                f[i * ny + j] = w;
                z += w;
            }
            if (z <= 0.0) {
                for (std::size_t j = 0; j < ny; ++j) f[i * ny + j] = 0.0;
                f[i * ny + pr.cheapest_output(i)] = 1.0;
            } else {
                for (std::size_t j = 0; j < ny; ++j) f[i * ny + j] /= z;
            }
        }
        const Stats st = evaluate(pr, f, q);
        const double lagrangian = st.mi - slope * st.distortion;
        const double gap = std::abs(prev_lagrangian - lagrangian);
        if (gap < tol || it == max_iter) {
            sol.policy = Policy{nx, ny, f};
            sol.output_pmf = q;
            sol.mutual_info_nats = st.mi;
            sol.avg_distortion = st.distortion;
            sol.lagrangian_nats = lagrangian;
            sol.gap = gap;
            sol.iterations = it;
            if (gap >= tol)
                throw BaNonConvergence("Blahut-Arimoto did not converge: gap " +
                                           std::to_string(gap) + " after " +
                                           std::to_string(it) + " iterations",
                                       sol);
            return sol;
        }
        prev_lagrangian = lagrangian;
    }
    throw BaNonConvergence("Blahut-Arimoto did not converge", sol);
}

namespace {

BaPoint make_point(const BaProblem& pr, BaSolution sol, Unit unit, double slope) {
    BaPoint out;
    out.point.power = sol.avg_distortion;
    out.point.leakage = nats_to(sol.mutual_info_nats, unit);
    out.point.unit = unit;
    out.point.solver = "blahut-arimoto";
    out.point.multiplier = slope;
    out.policy = std::move(sol.policy);
    (void)pr;
    return out;
}

Policy identity_policy(const BaProblem& pr) {
    Policy p{pr.nx(), pr.ny(), std::vector<double>(pr.nx() * pr.ny(), 0.0)};
    for (std::size_t i = 0; i < pr.nx(); ++i) {
        // d(x, x) = 0 row entry; cheapest feasible output has distortion 0
        // when the output alphabet contains the input level.
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pr.ny(); ++j) {
            if (pr.allowed(i, j) && pr.distortion(i, j) < bd) {
                bd = pr.distortion(i, j);
                best = j;
            }
        }
        p.at(i, best) = 1.0;
    }
    return p;
}

Policy constant_min_policy(const BaProblem& pr) {
    // Constant output minimizing E[d] among outputs feasible for all inputs.
    std::size_t best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pr.ny(); ++j) {
        bool universal = true;
        double avg = 0.0;
        for (std::size_t i = 0; i < pr.nx(); ++i) {
            if (pr.input_pmf()[i] < 1e-15) continue;
            if (!pr.allowed(i, j)) {
                universal = false;
                break;
            }
            avg += pr.input_pmf()[i] * pr.distortion(i, j);
        }
        if (universal && avg < best) {
            best = avg;
            best_j = j;
        }
    }
    Policy p{pr.nx(), pr.ny(), std::vector<double>(pr.nx() * pr.ny(), 0.0)};
    for (std::size_t i = 0; i < pr.nx(); ++i) {
        if (pr.input_pmf()[i] >= 1e-15 || pr.allowed(i, best_j))
            p.at(i, best_j) = 1.0;
        else
            p.at(i, 0) = 1.0;
    }
    return p;
}

}  // namespace

BaPoint solve_point(const BaProblem& pr, double slope, Unit unit, double tol, int max_iter) {
    BaSolution sol = ba_fixed_slope(pr, slope, tol, max_iter);
    return make_point(pr, std::move(sol), unit, slope);
}

BaPoint solve_at_power(const BaProblem& pr, double power, Unit unit, double tol,
                       double power_tol) {
    const double pmax = pr.max_useful_power();
    if (power_tol <= 0.0) power_tol = 1e-10 * (1.0 + pmax);

    if (power <= power_tol) {
        BaPoint out;
        out.policy = identity_policy(pr);
        out.point = CurvePoint{0.0, nats_to(pr.entropy_nats(), unit), unit,
                               "blahut-arimoto", -std::numeric_limits<double>::infinity()};
        return out;
    }
    if (power >= pmax - power_tol) {
        BaPoint out;
        out.policy = constant_min_policy(pr);
        out.point = CurvePoint{std::min(power, pmax), 0.0, unit, "blahut-arimoto", 0.0};
        return out;
    }

    // Bracket the slope: D(s) is non-decreasing in s, D(0-) = pmax.
    double s_hi = -1e-12;
    double s_lo = -1.0;
    BaSolution lo_sol = ba_fixed_slope(pr, s_lo, tol);
    int guard = 0;
    while (lo_sol.avg_distortion > power && guard++ < 80) {
        s_lo *= 2.0;
        lo_sol = ba_fixed_slope(pr, s_lo, tol);
    }
    if (lo_sol.avg_distortion > power)
        throw std::runtime_error("failed to bracket the Lagrange slope");
    BaSolution hi_sol = ba_fixed_slope(pr, s_hi, tol);

    for (int it = 0; it < 200; ++it) {
        if (std::abs(lo_sol.avg_distortion - power) <= power_tol) break;
        if (s_hi - s_lo < 1e-15 * std::max(1.0, -s_lo)) break;
        const double s_mid = 0.5 * (s_lo + s_hi);
        BaSolution mid = ba_fixed_slope(pr, s_mid, tol);
        if (mid.avg_distortion <= power) {
            s_lo = s_mid;
            lo_sol = std::move(mid);
        } else {
            s_hi = s_mid;
            hi_sol = std::move(mid);
        }
    }

    if (std::abs(lo_sol.avg_distortion - power) <= power_tol)
        return make_point(pr, std::move(lo_sol), unit, s_lo);

    // Flat-slope gap: I(P) is affine between the bracket points; time-share.
    const double d_lo = lo_sol.avg_distortion, d_hi = hi_sol.avg_distortion;
    const double theta = (d_hi - power) / (d_hi - d_lo);
    Policy mixed{pr.nx(), pr.ny(), std::vector<double>(pr.nx() * pr.ny(), 0.0)};
    for (std::size_t k = 0; k < mixed.rows.size(); ++k)
        mixed.rows[k] = theta * lo_sol.policy.rows[k] + (1.0 - theta) * hi_sol.policy.rows[k];
    std::vector<double> q(pr.ny(), 0.0);
    Stats st = evaluate(pr, mixed.rows, q);
    BaPoint out;
    out.policy = std::move(mixed);
    out.point = CurvePoint{st.distortion, nats_to(st.mi, unit), unit, "blahut-arimoto",
                           0.5 * (s_lo + s_hi)};
    return out;
}

PrivacyCurve solve_curve(const BaProblem& pr, const std::vector<double>& power_grid,
                         Unit unit, double tol) {
    PrivacyCurve curve;
    curve.points.reserve(power_grid.size());
    for (double p : power_grid) {
        if (p < 0.0) throw std::invalid_argument("power grid values must be >= 0");
        curve.points.push_back(solve_at_power(pr, p, unit, tol).point);
    }
    return curve;
}

PrivacyCurve solve_curve(const DiscreteLoadModel& model, const std::vector<double>& power_grid,
                         Unit unit, double tol) {
    return solve_curve(BaProblem::from_model(model), power_grid, unit, tol);
}

AlphabetRestrictionReport validate_alphabet_restriction(const DiscreteLoadModel& model,
                                                        int refinement, double power,
                                                        double tol) {
    if (refinement < 0) throw std::invalid_argument("refinement must be >= 0");
    std::vector<double> refined;
    const auto& xs = model.alphabet();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        refined.push_back(xs[i]);
        if (i + 1 < xs.size()) {
            for (int k = 1; k <= refinement; ++k)
                refined.push_back(xs[i] + (xs[i + 1] - xs[i]) * k / (refinement + 1));
        }
    }

    const double tight = std::min(tol, 1e-12);
    const BaProblem restricted = BaProblem::from_model(model);
    const BaProblem wide = BaProblem::from_model(model, refined);
    const double ptol = 1e-11 * (1.0 + restricted.max_useful_power());

    AlphabetRestrictionReport rep;
    rep.power = power;
    rep.refined_outputs = refined.size();
    rep.restricted_leakage =
        solve_at_power(restricted, power, Unit::Bits, tight, ptol).point.leakage;
    rep.refined_leakage = solve_at_power(wide, power, Unit::Bits, tight, ptol).point.leakage;
    rep.improvement = rep.restricted_leakage - rep.refined_leakage;
    return rep;
}

}  // namespace smpriv
