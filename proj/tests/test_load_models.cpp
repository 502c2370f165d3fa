#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "smpriv/load_models.hpp"

using namespace smpriv;

TEST_CASE("discrete model validation") {
    CHECK_THROWS_AS(DiscreteLoadModel({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({0.0, 1.0}, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({0.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({-1.0, 0.0}, {0.5, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({0.0, 1.0}, {0.6, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(DiscreteLoadModel({0.0, 1.0}, {-0.1, 1.1}), std::invalid_argument);
    CHECK_NOTHROW(DiscreteLoadModel({0.0, 1.0}, {0.5, 0.5}));
}

TEST_CASE("discrete entropy and mean") {
    DiscreteLoadModel fair({0.0, 1.0}, {0.5, 0.5});
    CHECK(fair.entropy(Unit::Bits) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fair.entropy(Unit::Nats) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    DiscreteLoadModel degenerate({5.0}, {1.0});
    CHECK(degenerate.entropy(Unit::Bits) == 0.0);
    CHECK(degenerate.mean() == 5.0);
    CHECK(degenerate.perfect_privacy_power() == 0.0);

    // H_B(0.1) computed from -0.1 log2 0.1 - 0.9 log2 0.9.
    DiscreteLoadModel skew({0.0, 1.0}, {0.1, 0.9});
    CHECK(skew.entropy(Unit::Bits) == doctest::Approx(0.4689955935892812).epsilon(1e-14));
    CHECK(skew.mean() == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("unit conversion is a fixed ln 2 factor") {
    DiscreteLoadModel m({0.0, 0.5, 2.0}, {0.2, 0.3, 0.5});
    CHECK(m.entropy(Unit::Nats) ==
          doctest::Approx(m.entropy(Unit::Bits) * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("binary model") {
    CHECK_THROWS_AS(BinaryLoadModel(1.0, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(BinaryLoadModel(0.0, 1.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(BinaryLoadModel(0.0, 1.0, 1.1), std::invalid_argument);

    BinaryLoadModel b(0.0, 1.0, 0.9);
    CHECK(b.span() == 1.0);
    CHECK(b.mean() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.perfect_privacy_power() == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(b.entropy(Unit::Bits) == doctest::Approx(0.4689955935892812).epsilon(1e-14));

    DiscreteLoadModel d = b.to_discrete();
    CHECK(d.size() == 2);
    CHECK(d.alphabet()[0] == 0.0);
    CHECK(d.alphabet()[1] == 1.0);
    CHECK(d.pmf()[0] == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(d.mean() == doctest::Approx(b.mean()).epsilon(1e-14));
    CHECK(d.entropy(Unit::Bits) == doctest::Approx(b.entropy(Unit::Bits)).epsilon(1e-14));
}

TEST_CASE("exponential differential entropy") {
    CHECK(ExponentialLoad(1.0).differential_entropy() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ExponentialLoad(std::exp(1.0)).differential_entropy() ==
          doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(ExponentialLoad(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ExponentialLoad(-1.0), std::invalid_argument);
}

TEST_CASE("uniform piecewise density") {
    PiecewiseDensity u = PiecewiseDensity::uniform(0.0, 2.0);
    CHECK(u.mean() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(u.differential_entropy() == doctest::Approx(std::log(2.0)).epsilon(1e-10));
    CHECK(u.density(1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u.density(3.0) == 0.0);
    CHECK(u.support_hi() == 2.0);

    // Jumps: +1/2 at the origin, -1/2 at the upper edge.
    REQUIRE(u.jumps().size() == 2);
    CHECK(u.jumps()[0].x == doctest::Approx(0.0));
    CHECK(u.jumps()[0].delta == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(u.jumps()[1].x == doctest::Approx(2.0));
    CHECK(u.jumps()[1].delta == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("piecewise density must normalize") {
    DensitySegment seg;
    seg.lo = 0.0;
    seg.hi = 1.0;
    seg.density = [](double) { return 0.7; };
    seg.derivative = [](double) { return 0.0; };
    seg.kind = DensitySegment::Kind::Constant;
    CHECK_THROWS_AS(PiecewiseDensity({seg}), std::invalid_argument);
}

TEST_CASE("continuous variant helpers") {
    ContinuousLoadModel e = ExponentialLoad(2.0);
    CHECK(mean(e) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(differential_entropy(e) == doctest::Approx(1.0 + std::log(2.0)).epsilon(1e-12));

    ContinuousLoadModel u = PiecewiseDensity::uniform(0.0, 3.0);
    CHECK(mean(u) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(differential_entropy(u) == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("multi-user joint pmf marginals must match") {
    MultiUserModel m;
    m.users.push_back(DiscreteLoadModel({0.0, 1.0}, {0.5, 0.5}));
    m.users.push_back(DiscreteLoadModel({0.0, 1.0}, {0.5, 0.5}));
    // Correlated but marginal-consistent.
    m.joint_pmf = std::vector<double>{0.4, 0.1, 0.1, 0.4};
    CHECK_NOTHROW(m.validate());
    CHECK(m.all_discrete());

    m.joint_pmf = std::vector<double>{0.7, 0.1, 0.1, 0.1};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);

    m.joint_pmf = std::vector<double>{0.5, 0.5};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("joint pmf requires all-discrete users") {
    MultiUserModel m;
    m.users.push_back(DiscreteLoadModel({0.0, 1.0}, {0.5, 0.5}));
    m.users.push_back(ExponentialLoad(1.0));
    CHECK_FALSE(m.all_discrete());
    m.joint_pmf = std::vector<double>{0.5, 0.5};
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("quadrature sanity") {
    CHECK(integrate([](double x) { return x * x; }, 0.0, 1.0) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, 50.0) ==
          doctest::Approx(1.0).epsilon(1e-9));
}
