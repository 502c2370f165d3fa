#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smpriv/allocator.hpp"
#include "smpriv/ba.hpp"
#include "smpriv/load_models.hpp"
#include "smpriv/units.hpp"

namespace smpriv {

// Binary privacy-power function: (I_B(P))^+ with
// I_B(P) = (P/D) log(P/D) - (p + P/D) log(p + P/D) - (1-p) log(1-p).
double binary_leakage(const BinaryLoadModel& model, double power, Unit unit = Unit::Bits);

// d/dP of binary_leakage on the interior (negative; -inf at P = 0).
double binary_leakage_slope(const BinaryLoadModel& model, double power, Unit unit = Unit::Bits);

// Optimal 2x2 conditional pmf achieving binary_leakage at the given power.
Policy binary_policy(const BinaryLoadModel& model, double power);

// Optimal AES split across independent binary users: interior users get
// P_i* = D_i p_i (1 - p_D_i) / p_D_i with p_D_i = 1 - exp(-level * D_i),
// saturated users get D_i (1 - p_i).
Allocation binary_allocate(const std::vector<BinaryLoadModel>& models, double power,
                           Unit unit = Unit::Bits);

// ln(mean / P) nats for P <= mean, 0 beyond; +infinity at P = 0.
double exponential_leakage(double mean, double power, Unit unit = Unit::Nats);

// Samplable descriptor of the SLB-achieving conditional for an exponential
// load: emit the atom Y = 0 with probability exp(-alpha x), otherwise invert
// the continuous conditional CDF in closed form; V = X - Y is Exp(power)
// independent of Y.
struct ExponentialPolicy {
    double mean = 1.0;
    double power = 0.5;
    double alpha = 0.0;  // 1/power - 1/mean

    ExponentialPolicy(double mean_, double power_);

    double atom_probability(double x) const;
    // Marginal weight of the atom at y = 0: power / mean.
    double marginal_atom_weight() const { return power / mean; }
    // Map a uniform draw u in [0,1) to an output load given input x.
    double sample(double x, double u) const;
};

// Shannon lower bound (h(X) - h(Exp(P)))^+ = (h(X) - 1 - ln P)^+ nats.
double slb_bound(const ContinuousLoadModel& model, double power, Unit unit = Unit::Nats);

struct SlbAtom {
    double x = 0.0;
    double weight = 0.0;  // E[V] * jump size
};

struct SlbReport {
    double power = 0.0;
    bool nonneg = false;
    double critical_power = 0.0;  // P0: largest P with g_Y >= 0 everywhere
    std::vector<SlbAtom> atoms;
    std::optional<double> g_integral;  // ~1 when nonneg
    std::string method;                // "analytic" or "numerical"
    bool has_achieving = false;        // f_{Y|X} = f_V(x-y) f_Y(y) / f_X(x)
    std::optional<ExponentialPolicy> exponential_achieving;
};

// Tightness test: g_Y(y) = f_X(y) + E[V] f_X'(y) plus atoms E[V] dX(x_i);
// the SLB is achieved at P iff g_Y >= 0 on R+.
SlbReport slb_check(const ContinuousLoadModel& model, double power);

}  // namespace smpriv
