#include "smpriv/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smpriv {

namespace {

double log2_term(double z) { return xlnx(z) / std::log(2.0); }

double binary_leakage_bits_raw(double p, double delta, double power) {
    const double r = power / delta;
    return log2_term(r) - log2_term(p + r) - log2_term(1.0 - p);
}

}  // namespace

double binary_leakage(const BinaryLoadModel& model, double power, Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    const double p = model.p_low;
    const double delta = model.span();
    if (power >= model.perfect_privacy_power()) return 0.0;
    const double bits = binary_leakage_bits_raw(p, delta, power);
    return positive_part(unit == Unit::Bits ? bits : to_nats(bits, Unit::Bits));
}

double binary_leakage_slope(const BinaryLoadModel& model, double power, Unit unit) {
    const double delta = model.span();
    const double p = model.p_low;
    if (power >= model.perfect_privacy_power()) return 0.0;
    if (power <= 0.0) return -std::numeric_limits<double>::infinity();
    const double r = power / delta;
    const double nats = (std::log(r) - std::log(p + r)) / delta;
    return nats_to(nats, unit);
}

Policy binary_policy(const BinaryLoadModel& model, double power) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    const double delta = model.span();
    const double p = model.p_low;
    const double r = std::min(power / delta, 1.0 - p);
    // Joint pmf rows: (L,L) = p, (H,L) = r, (H,H) = 1 - p - r.
    Policy pol{2, 2, {1.0, 0.0, 0.0, 0.0}};
    if (1.0 - p > 0.0) {
        pol.at(1, 0) = r / (1.0 - p);
        pol.at(1, 1) = 1.0 - r / (1.0 - p);
    } else {
        pol.at(1, 0) = 1.0;
    }
    return pol;
}

namespace {

// Optimal per-user power at multiplier `level` (nats per energy unit).
double binary_user_power(const BinaryLoadModel& m, double level) {
    const double p_delta = 1.0 - std::exp(-level * m.span());
    if (m.p_low < p_delta)
        return m.span() * m.p_low * (1.0 - p_delta) / p_delta;
    return m.perfect_privacy_power();
}

}  // namespace

Allocation binary_allocate(const std::vector<BinaryLoadModel>& models, double power,
                           Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    Allocation a;
    a.unit = unit;
    a.per_user.assign(models.size(), 0.0);
    a.saturated.assign(models.size(), false);

    double total_pp = 0.0;
    for (const auto& m : models) total_pp += m.perfect_privacy_power();
    const double target = std::min(power, total_pp);

    if (target <= 0.0) {
        a.level = std::numeric_limits<double>::infinity();
        double leak = 0.0;
        for (const auto& m : models) leak += m.entropy(unit);
        a.total_leakage = leak;
        return a;
    }

    auto total_at = [&](double level) {
        double s = 0.0;
        for (const auto& m : models) s += binary_user_power(m, level);
        return s;
    };

    double lo = 1e-12, hi = 1.0;
    while (total_at(hi) > target) hi *= 2.0;
    while (total_at(lo) < target && lo > 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (total_at(mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    const double level = 0.5 * (lo + hi);

    a.level = level;
    double leak = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double p_delta = 1.0 - std::exp(-level * models[i].span());
        a.per_user[i] = binary_user_power(models[i], level);
        a.saturated[i] = models[i].p_low >= p_delta;
        a.total_power += a.per_user[i];
        leak += binary_leakage(models[i], a.per_user[i], unit);
    }
    a.total_leakage = leak;
    return a;
}

double exponential_leakage(double mean, double power, Unit unit) {
    if (!(mean > 0.0)) throw std::invalid_argument("mean must be positive");
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    if (power == 0.0) return std::numeric_limits<double>::infinity();
    if (power >= mean) return 0.0;
    return nats_to(std::log(mean / power), unit);
}

ExponentialPolicy::ExponentialPolicy(double mean_, double power_)
    : mean(mean_), power(power_) {
    if (!(mean > 0.0)) throw std::invalid_argument("mean must be positive");
    if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
    if (power > mean)
        throw std::invalid_argument("power above the mean: atom weight would exceed 1");
    alpha = 1.0 / power - 1.0 / mean;
}

double ExponentialPolicy::atom_probability(double x) const {
    return std::exp(-alpha * x);
}

double ExponentialPolicy::sample(double x, double u) const {
    if (alpha == 0.0) return 0.0;  // full privacy: Y = 0 a.s.
    const double w = 1.0 - u;  // in (0, 1]
    if (w <= atom_probability(x)) return 0.0;
    // Invert e^{-alpha (x - y)} = w on the continuous branch.
    return x + std::log(w) / alpha;
}

double slb_bound(const ContinuousLoadModel& model, double power, Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    if (power == 0.0) return std::numeric_limits<double>::infinity();
    const double h = differential_entropy(model);
    return nats_to(positive_part(h - 1.0 - std::log(power)), unit);
}

namespace {

struct SegmentVerdict {
    bool nonneg = true;
    bool analytic = true;
};

SegmentVerdict check_segment(const DensitySegment& s, double power, double scale) {
    SegmentVerdict v;
    auto g = [&](double x) { return s.density(x) + power * s.derivative(x); };
    const double tol = -1e-12 * std::max(1.0, scale);
    switch (s.kind) {
        case DensitySegment::Kind::Constant:
            // f' = 0: g = f, already validated non-negative.
            v.nonneg = g(0.5 * (s.lo + s.hi)) >= tol;
            return v;
        case DensitySegment::Kind::Linear: {
            // g is affine: endpoints decide the sign.
            const double eps = 1e-12 * (s.hi - s.lo);
            v.nonneg = g(s.lo + eps) >= tol && g(s.hi - eps) >= tol;
            return v;
        }
        case DensitySegment::Kind::ExponentialTail: {
            // f = c e^{-x/tau}: g = f (1 - power/tau), constant sign.
            const double eps = 1e-9 * (s.hi - s.lo);
            v.nonneg = g(s.lo + eps) >= tol && g(s.hi - eps) >= tol;
            return v;
        }
        case DensitySegment::Kind::Generic:
        default: {
            v.analytic = false;
            const int n = 1000;  // dense-sampling floor per segment
            for (int k = 0; k <= n; ++k) {
                const double x = s.lo + (s.hi - s.lo) * k / n;
                if (g(x) < tol) {
                    v.nonneg = false;
                    return v;
                }
            }
            return v;
        }
    }
}

bool piecewise_nonneg(const PiecewiseDensity& pd, double power, bool* analytic) {
    bool ok = true;
    bool an = true;
    double scale = 0.0;
    for (const auto& s : pd.segments()) scale = std::max(scale, s.density(0.5 * (s.lo + s.hi)));
    for (const auto& j : pd.jumps()) {
        if (power * j.delta < -1e-12 * std::max(1.0, scale)) ok = false;
    }
    if (ok) {
        for (const auto& s : pd.segments()) {
            const SegmentVerdict v = check_segment(s, power, scale);
            an = an && v.analytic;
            if (!v.nonneg) {
                ok = false;
                break;
            }
        }
    }
    if (analytic) *analytic = an;
    return ok;
}

}  // namespace

SlbReport slb_check(const ContinuousLoadModel& model, double power) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    SlbReport rep;
    rep.power = power;

    if (const auto* exp_model = std::get_if<ExponentialLoad>(&model)) {
        const double lambda = exp_model->mean;
        rep.method = "analytic";
        rep.critical_power = lambda;
        rep.nonneg = power <= lambda;
        rep.atoms.push_back({0.0, power / lambda});
        if (rep.nonneg) {
            rep.g_integral = 1.0;  // (1 - P/l) + P/l, exact
            rep.has_achieving = true;
            if (power > 0.0) rep.exponential_achieving = ExponentialPolicy(lambda, power);
        }
        return rep;
    }

    const auto& pd = std::get<PiecewiseDensity>(model);
    bool analytic = true;
    rep.nonneg = piecewise_nonneg(pd, power, &analytic);
    rep.method = analytic ? "analytic" : "numerical";
    for (const auto& j : pd.jumps()) rep.atoms.push_back({j.x, power * j.delta});

    // Largest P with g_Y >= 0 everywhere, by bisection (monotone in P).
    double lo = 0.0;
    double hi = std::max(1.0, pd.support_hi());
    int guard = 0;
    while (piecewise_nonneg(pd, hi, nullptr) && guard++ < 60) hi *= 2.0;
    if (guard >= 60) {
        rep.critical_power = std::numeric_limits<double>::infinity();
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (piecewise_nonneg(pd, mid, nullptr))
                lo = mid;
            else
                hi = mid;
        }
        rep.critical_power = lo;
    }

    if (rep.nonneg) {
        double total = 0.0;
        for (const auto& s : pd.segments()) {
            total += integrate(
                [&](double x) { return s.density(x) + power * s.derivative(x); }, s.lo,
                s.hi, 1e-9);
        }
        for (const auto& a : rep.atoms) total += a.weight;
        rep.g_integral = total;
        rep.has_achieving = true;
    }
    return rep;
}

}  // namespace smpriv
