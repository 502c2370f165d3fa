#include "smpriv/heuristics.hpp"

#include <cmath>
#include <stdexcept>

namespace smpriv {

CurvePoint time_division(const DiscreteLoadModel& model, double power, Unit unit) {
    if (power < 0.0) throw std::invalid_argument("power must be >= 0");
    const double mean = model.mean();
    CurvePoint pt;
    pt.unit = unit;
    pt.solver = "time-division";
    pt.power = std::min(power, mean);
    const double frac = mean > 0.0 ? std::min(power / mean, 1.0) : 1.0;
    pt.leakage = (1.0 - frac) * model.entropy(unit);
    return pt;
}

CurvePoint limit_max_output(std::size_t levels, double spacing, std::size_t threshold,
                            Unit unit) {
    if (levels == 0) throw std::invalid_argument("levels must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
    if (threshold > levels - 1) throw std::invalid_argument("threshold out of alphabet bounds");
    const double n = static_cast<double>(levels);
    const double k = static_cast<double>(threshold);
    CurvePoint pt;
    pt.unit = unit;
    pt.solver = "limit-max";
    pt.power = (n - 1.0 - k) * (n - k) * spacing / (2.0 * n);
    const double bits = std::log2(n) - (n - k) / (2.0 * n) * std::log2(n - k);
    pt.leakage = unit == Unit::Bits ? bits : to_nats(bits, Unit::Bits);
    return pt;
}

CurvePoint limit_max_clip(const DiscreteLoadModel& model, std::size_t threshold, Unit unit) {
    if (threshold >= model.size()) throw std::invalid_argument("threshold out of alphabet bounds");
    const auto& xs = model.alphabet();
    const auto& pmf = model.pmf();
    const double cap = xs[threshold];

    double power = 0.0;
    double tail = 0.0;
    for (std::size_t i = threshold; i < xs.size(); ++i) {
        power += pmf[i] * (xs[i] - cap);
        tail += pmf[i];
    }
    // Y = min(X, cap) is deterministic: I = H(X) - H(X | Y), where the only
    // residual uncertainty is over the clipped tail.
    double h_tail = 0.0;
    if (tail > 1e-15) {
        for (std::size_t i = threshold; i < xs.size(); ++i) h_tail -= xlnx(pmf[i] / tail);
    }
    CurvePoint pt;
    pt.unit = unit;
    pt.solver = "limit-max-exact";
    pt.power = power;
    pt.leakage = nats_to(model.entropy(Unit::Nats) - tail * h_tail, unit);
    return pt;
}

}  // namespace smpriv
