#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smpriv/load_models.hpp"
#include "smpriv/units.hpp"

namespace smpriv {

// Conditional pmf f_{Y|X}, rows indexed by input symbol, columns by output
// symbol. Rows sum to 1; zero mass on infeasible (x, y) pairs.
struct Policy {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<double> rows;  // nx * ny, row-major

    double operator()(std::size_t x, std::size_t y) const { return rows[x * ny + y]; }
    double& at(std::size_t x, std::size_t y) { return rows[x * ny + y]; }
};

struct CurvePoint {
    double power = 0.0;
    double leakage = 0.0;
    Unit unit = Unit::Bits;
    std::string solver;
    double multiplier = 0.0;  // Lagrange slope s <= 0, nats per energy unit
};

struct PrivacyCurve {
    std::vector<CurvePoint> points;
};

// Rate-distortion style problem over finite alphabets with the asymmetric
// feasibility mask y_i <= x_i. Infeasible pairs are excluded structurally,
// never penalized with large finite distortions.
class BaProblem {
  public:
    // Single-user problem; output alphabet defaults to the input alphabet
    // (restriction is lossless for this mask) unless a refinement is given.
    static BaProblem from_model(const DiscreteLoadModel& model);
    static BaProblem from_model(const DiscreteLoadModel& model,
                                const std::vector<double>& output_alphabet);

    // Correlated multi-user problem on the product alphabet. Throws if the
    // product alphabet exceeds 4096 entries.
    static BaProblem from_joint(const std::vector<std::vector<double>>& alphabets,
                                const std::vector<double>& joint_pmf);

    std::size_t nx() const { return px_.size(); }
    std::size_t ny() const { return ny_; }
    const std::vector<double>& input_pmf() const { return px_; }
    bool allowed(std::size_t x, std::size_t y) const { return allowed_[x * ny_ + y]; }
    double distortion(std::size_t x, std::size_t y) const { return dist_[x * ny_ + y]; }

    double entropy_nats() const;
    std::size_t cheapest_output(std::size_t x) const { return cheapest_y_[x]; }
    // Distortion of the constant minimal-output policy, i.e. the perfect
    // privacy power E[sum_i X_i] - sum_i min(X_i).
    double max_useful_power() const;

  private:
    std::vector<double> px_;
    std::size_t ny_ = 0;
    std::vector<std::uint8_t> allowed_;
    std::vector<double> dist_;
    std::vector<std::size_t> cheapest_y_;  // argmin_y d(x, y), per x
    friend struct BaCore;
};

struct BaSolution {
    Policy policy;
    std::vector<double> output_pmf;
    double mutual_info_nats = 0.0;
    double avg_distortion = 0.0;
    double lagrangian_nats = 0.0;
    double gap = 0.0;
    int iterations = 0;
};

// Blahut-Arimoto fixed point of I(X;Y) - slope * E[d] at a fixed Lagrange
// slope (nats per energy unit, slope <= 0). Converged when successive
// Lagrangian values differ by less than tol. Throws BaNonConvergence
// otherwise.
BaSolution ba_fixed_slope(const BaProblem& problem, double slope, double tol = 1e-9,
                          int max_iter = 100000);

struct BaNonConvergence : std::runtime_error {
    BaNonConvergence(std::string msg, BaSolution last) ;
    BaSolution last_iterate;
};

struct BaPoint {
    Policy policy;
    CurvePoint point;
};

// Solve at a fixed slope and report the (P, I) point it achieves.
BaPoint solve_point(const BaProblem& problem, double slope, Unit unit = Unit::Bits,
                    double tol = 1e-9, int max_iter = 100000);

// Hit a requested average power by bisecting the Lagrange slope (valid
// because I(P) is convex). Flat segments are resolved by time-sharing, ties
// to the smallest P achieving the value. P = 0 and P >= perfect-privacy
// power are pinned exactly.
BaPoint solve_at_power(const BaProblem& problem, double power, Unit unit = Unit::Bits,
                       double tol = 1e-9, double power_tol = 0.0);

PrivacyCurve solve_curve(const BaProblem& problem, const std::vector<double>& power_grid,
                         Unit unit = Unit::Bits, double tol = 1e-9);

PrivacyCurve solve_curve(const DiscreteLoadModel& model, const std::vector<double>& power_grid,
                         Unit unit = Unit::Bits, double tol = 1e-9);

// Restriction check: compare BA restricted to Y = X against BA on an
// output alphabet refined with `refinement` extra levels between
// consecutive input levels.
struct AlphabetRestrictionReport {
    double power = 0.0;
    double restricted_leakage = 0.0;  // bits
    double refined_leakage = 0.0;     // bits
    double improvement = 0.0;         // restricted - refined (should be <= tol)
    std::size_t refined_outputs = 0;
};

AlphabetRestrictionReport validate_alphabet_restriction(const DiscreteLoadModel& model,
                                                        int refinement, double power,
                                                        double tol = 1e-9);

}  // namespace smpriv
