#include "smpriv/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace smpriv {

namespace {

void check_convex(const LeakageCurve& c, std::size_t index) {
    const double pp = c.perfect_privacy_power;
    if (!(pp >= 0.0)) throw std::invalid_argument("perfect-privacy power must be >= 0");
    if (pp == 0.0) return;
    const int n = 8;
    std::vector<double> v(n + 1);
    for (int k = 0; k <= n; ++k) v[k] = c.value(pp * (k + 0.25) / (n + 0.25));
    const double scale = std::max(1.0, std::abs(v[0]));
    for (int k = 0; k + 1 <= n; ++k) {
        if (v[k + 1] > v[k] + 1e-9 * scale)
            throw std::invalid_argument("leakage curve " + std::to_string(index) +
                                        " is not non-increasing");
    }
    for (int k = 0; k + 2 <= n; ++k) {
        if (v[k + 1] > 0.5 * (v[k] + v[k + 2]) + 1e-9 * scale)
            throw std::invalid_argument("leakage curve " + std::to_string(index) +
                                        " fails midpoint convexity");
    }
}

// argmin_{0 <= P <= pp} I(P) + mu P for a convex non-increasing curve.
double user_power_at(const LeakageCurve& c, double mu) {
    const double pp = c.perfect_privacy_power;
    if (pp <= 0.0) return 0.0;
    if (c.slope(pp) + mu <= 0.0) return pp;  // saturate: still profitable at pp
    double lo = 0.0, hi = pp;
    const double s0 = c.slope(std::min(pp, 1e-300));
    if (std::isfinite(s0) && s0 + mu >= 0.0) return 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * pp; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (c.slope(mid) + mu <= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Allocation allocate_general(const std::vector<LeakageCurve>& curves, double power, Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    for (std::size_t i = 0; i < curves.size(); ++i) check_convex(curves[i], i);

    Allocation a;
    a.unit = unit;
    a.per_user.assign(curves.size(), 0.0);
    a.saturated.assign(curves.size(), false);

    double total_pp = 0.0;
    for (const auto& c : curves) total_pp += c.perfect_privacy_power;
    const double target = std::min(power, total_pp);

    auto total_at = [&](double mu) {
        double s = 0.0;
        for (const auto& c : curves) s += user_power_at(c, mu);
        return s;
    };

    double mu = 0.0;
    if (target >= total_pp) {
        mu = 0.0;  // every user saturates
    } else if (target <= 0.0) {
        mu = std::numeric_limits<double>::infinity();
    } else {
        double lo = 0.0, hi = 1.0;
        while (total_at(hi) > target) hi *= 2.0;
        for (int it = 0; it < 300; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double t = total_at(mid);
            if (std::abs(t - target) <= 1e-10) {
                lo = hi = mid;
                break;
            }
            if (t > target)
                lo = mid;
            else
                hi = mid;
        }
        mu = 0.5 * (lo + hi);
    }

    a.level = mu;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        const double pi = std::isinf(mu) ? 0.0 : user_power_at(curves[i], mu);
        a.per_user[i] = pi;
        a.total_power += pi;
        a.saturated[i] = pi >= curves[i].perfect_privacy_power * (1.0 - 1e-12);
        a.total_leakage += positive_part(curves[i].value(pi));
    }
    return a;
}

Allocation waterfill_exponential(const std::vector<double>& means, double power, Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    for (double m : means)
        if (!(m > 0.0)) throw std::invalid_argument("means must be positive");

    Allocation a;
    a.unit = unit;
    a.per_user.assign(means.size(), 0.0);
    a.saturated.assign(means.size(), false);

    double total_mean = 0.0;
    double max_mean = 0.0;
    for (double m : means) {
        total_mean += m;
        max_mean = std::max(max_mean, m);
    }
    const double target = std::min(power, total_mean);

    double level = 0.0;
    if (target >= total_mean) {
        level = max_mean;
    } else if (target > 0.0) {
        double lo = 0.0, hi = max_mean;
        auto filled = [&](double l) {
            double s = 0.0;
            for (double m : means) s += std::min(l, m);
            return s;
        };
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, max_mean); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (filled(mid) <= target)
                lo = mid;
            else
                hi = mid;
        }
        level = 0.5 * (lo + hi);
    }

    a.level = level;
    for (std::size_t i = 0; i < means.size(); ++i) {
        a.per_user[i] = std::min(level, means[i]);
        a.total_power += a.per_user[i];
        a.saturated[i] = means[i] <= level;
        if (level <= 0.0) {
            a.total_leakage = std::numeric_limits<double>::infinity();
        } else if (!std::isinf(a.total_leakage)) {
            a.total_leakage += nats_to(positive_part(std::log(means[i] / level)), unit);
        }
    }
    return a;
}

}  // namespace smpriv
