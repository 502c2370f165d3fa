#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smpriv/units.hpp"

namespace smpriv {

// Finite-alphabet per-user demand distribution. Immutable after construction.
class DiscreteLoadModel {
  public:
    DiscreteLoadModel(std::vector<double> alphabet, std::vector<double> pmf);

    const std::vector<double>& alphabet() const { return alphabet_; }
    const std::vector<double>& pmf() const { return pmf_; }
    std::size_t size() const { return alphabet_.size(); }
    double min_level() const { return alphabet_.front(); }

    double entropy(Unit unit) const;
    double mean() const;

    // Smallest average AES power achieving zero leakage: E[X] - min level.
    double perfect_privacy_power() const { return mean() - min_level(); }

  private:
    std::vector<double> alphabet_;  // strictly increasing, >= 0
    std::vector<double> pmf_;       // >= 0, sums to 1 within 1e-12
};

// Two-level load: low (standby) level L with probability p_low, high level H.
struct BinaryLoadModel {
    double low = 0.0;
    double high = 1.0;
    double p_low = 0.5;

    BinaryLoadModel(double low_, double high_, double p_low_);

    double span() const { return high - low; }  // Delta
    double mean() const { return low + span() * (1.0 - p_low); }
    double entropy(Unit unit) const { return nats_to(binary_entropy_nats(p_low), unit); }
    double perfect_privacy_power() const { return span() * (1.0 - p_low); }

    DiscreteLoadModel to_discrete() const;
};

struct ExponentialLoad {
    double mean = 1.0;

    explicit ExponentialLoad(double mean_);

    // h(X) = 1 + ln(mean), nats.
    double differential_entropy() const { return 1.0 + std::log(mean); }
};

// One smooth piece of a piecewise density. The derivative must be supplied
// analytically; sign tests on f + E[V] f' need it pointwise and
// numerical differentiation would corrupt them.
struct DensitySegment {
    enum class Kind { Constant, Linear, ExponentialTail, Generic };

    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double)> density;
    std::function<double(double)> derivative;
    Kind kind = Kind::Generic;
};

struct DensityJump {
    double x = 0.0;
    double delta = 0.0;  // f(x+) - f(x-)
};

class PiecewiseDensity {
  public:
    explicit PiecewiseDensity(std::vector<DensitySegment> segments);

    const std::vector<DensitySegment>& segments() const { return segments_; }
    // Jump discontinuities, including the origin atom when f(0+) > 0.
    const std::vector<DensityJump>& jumps() const { return jumps_; }

    double density(double x) const;
    double mean() const;
    double differential_entropy() const;  // nats
    double support_hi() const { return segments_.back().hi; }

    static PiecewiseDensity uniform(double lo, double hi);

  private:
    std::vector<DensitySegment> segments_;
    std::vector<DensityJump> jumps_;
};

using ContinuousLoadModel = std::variant<ExponentialLoad, PiecewiseDensity>;

double differential_entropy(const ContinuousLoadModel& model);
double mean(const ContinuousLoadModel& model);

using UserModel = std::variant<DiscreteLoadModel, BinaryLoadModel, ExponentialLoad, PiecewiseDensity>;

double user_mean(const UserModel& user);

struct MultiUserModel {
    std::vector<UserModel> users;
    // Optional joint pmf over the product alphabet (row-major over user
    // alphabets, last user fastest) for correlated discrete users.
    std::optional<std::vector<double>> joint_pmf;

    void validate() const;
    bool all_discrete() const;
};

// Adaptive Simpson quadrature used for density normalization and entropies.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-11);

}  // namespace smpriv
