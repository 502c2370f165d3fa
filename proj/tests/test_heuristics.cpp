#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "smpriv/ba.hpp"
#include "smpriv/heuristics.hpp"

using namespace smpriv;

namespace {

DiscreteLoadModel uniform21() {
    std::vector<double> xs(21), ps(21, 1.0 / 21.0);
    for (int i = 0; i < 21; ++i) xs[i] = 0.1 * i;
    return DiscreteLoadModel(xs, ps);
}

}  // namespace

TEST_CASE("time division endpoints and reference point") {
    const DiscreteLoadModel m = uniform21();
    CHECK(time_division(m, 0.0).leakage == doctest::Approx(4.392317422778761).epsilon(1e-14));
    CHECK(time_division(m, 1.0).leakage == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(time_division(m, 2.0).leakage == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(time_division(m, 2.0).power == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(time_division(m, 0.5).leakage ==
          doctest::Approx(2.1961587113893803).epsilon(1e-12));
    CHECK_THROWS_AS(time_division(m, -0.5), std::invalid_argument);
}

TEST_CASE("time division is linear in P") {
    const DiscreteLoadModel m = uniform21();
    const double h = m.entropy(Unit::Bits);
    for (int k = 0; k <= 10; ++k) {
        const double p = 0.1 * k;
        CHECK(time_division(m, p).leakage == doctest::Approx((1.0 - p) * h).epsilon(1e-12));
    }
}

TEST_CASE("clipping points for the uniform model") {
    // k = N-1 leaves the load untouched; k = 0 flattens it completely.
    const CurvePoint top = limit_max_output(21, 0.1, 20);
    CHECK(top.power == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(top.leakage == doctest::Approx(4.392317422778761).epsilon(1e-13));

    const CurvePoint bottom = limit_max_output(21, 0.1, 0);
    CHECK(bottom.power == doctest::Approx(1.0).epsilon(1e-13));

    const CurvePoint mid = limit_max_output(21, 0.1, 10);
    CHECK(mid.power == doctest::Approx(11.0 / 42.0).epsilon(1e-13));
    CHECK(mid.leakage == doctest::Approx(3.486275808373754).epsilon(1e-12));

    CHECK_THROWS_AS(limit_max_output(21, 0.1, 21), std::invalid_argument);
    CHECK_THROWS_AS(limit_max_output(0, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(limit_max_output(21, 0.0, 5), std::invalid_argument);
}

TEST_CASE("clipping power descends in k") {
    double prev = 2.0;
    for (std::size_t k = 0; k <= 20; ++k) {
        const double p = limit_max_output(21, 0.1, k).power;
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("exact clip analysis") {
    const DiscreteLoadModel m = uniform21();

    // Same power as the uniform-model bookkeeping, exact deterministic-map
    // leakage H(X) - Pr(tail) H(tail).
    const CurvePoint pt = limit_max_clip(m, 10);
    CHECK(pt.power == doctest::Approx(11.0 / 42.0).epsilon(1e-13));
    CHECK(pt.leakage ==
          doctest::Approx(std::log2(21.0) - 11.0 / 21.0 * std::log2(11.0)).epsilon(1e-13));

    const CurvePoint untouched = limit_max_clip(m, 20);
    CHECK(untouched.power == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(untouched.leakage == doctest::Approx(4.392317422778761).epsilon(1e-13));

    const CurvePoint flat = limit_max_clip(m, 0);
    CHECK(flat.power == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(flat.leakage == doctest::Approx(0.0).epsilon(1e-13));

    // Works for non-uniform models too.
    const DiscreteLoadModel skew({0.0, 1.0, 3.0}, {0.5, 0.3, 0.2});
    const CurvePoint s = limit_max_clip(skew, 1);
    CHECK(s.power == doctest::Approx(0.2 * 2.0).epsilon(1e-13));
    const double h = skew.entropy(Unit::Nats);
    const double tail = 0.5;
    const double h_tail = -(0.3 / 0.5) * std::log(0.3 / 0.5) - (0.2 / 0.5) * std::log(0.2 / 0.5);
    CHECK(s.leakage == doctest::Approx((h - tail * h_tail) / std::log(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(limit_max_clip(m, 21), std::invalid_argument);
}

TEST_CASE("heuristics never beat the optimal curve") {
    const DiscreteLoadModel m = uniform21();
    const BaProblem pr = BaProblem::from_model(m);

    for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const CurvePoint td = time_division(m, p);
        const BaPoint opt = solve_at_power(pr, td.power);
        CHECK(td.leakage >= opt.point.leakage - 1e-9);
    }
    for (std::size_t k : {0, 5, 10, 15, 20}) {
        const CurvePoint lm = limit_max_clip(m, k);
        const BaPoint opt = solve_at_power(pr, lm.power);
        CHECK(lm.leakage >= opt.point.leakage - 1e-9);
    }
}
