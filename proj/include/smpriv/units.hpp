#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace smpriv {

enum class Unit { Bits, Nats };

inline double nats_to(double nats, Unit u) {
    return u == Unit::Nats ? nats : nats / std::log(2.0);
}

inline double to_nats(double value, Unit u) {
    return u == Unit::Nats ? value : value * std::log(2.0);
}

inline std::string unit_name(Unit u) { return u == Unit::Bits ? "bits" : "nats"; }

inline Unit unit_from_name(const std::string& s) {
    if (s == "bits") return Unit::Bits;
    if (s == "nats") return Unit::Nats;
    throw std::invalid_argument("unknown unit: " + s);
}

// x ln x with the 0 log 0 := 0 convention. Probabilities below 1e-15 are
// treated as exact zeros to avoid log underflow.
inline double xlnx(double x) {
    return x < 1e-15 ? 0.0 : x * std::log(x);
}

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// Entropy of Ber(p) in nats.
inline double binary_entropy_nats(double p) {
    return -(xlnx(p) + xlnx(1.0 - p));
}

}  // namespace smpriv
