#include "smpriv/load_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smpriv {

namespace {

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double fa, double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (hi <= lo) return 0.0;
    const double m = 0.5 * (lo + hi);
    const double fa = f(lo), fm = f(m), fb = f(hi);
    return adaptive(f, lo, hi, fa, fm, fb, simpson(lo, hi, fa, fm, fb), tol, 40);
}

DiscreteLoadModel::DiscreteLoadModel(std::vector<double> alphabet, std::vector<double> pmf)
    : alphabet_(std::move(alphabet)), pmf_(std::move(pmf)) {
    if (alphabet_.empty()) throw std::invalid_argument("alphabet must be non-empty");
    if (alphabet_.size() != pmf_.size())
        throw std::invalid_argument("alphabet/pmf size mismatch");
    if (alphabet_.front() < 0.0)
        throw std::invalid_argument("load levels must be non-negative");
    for (std::size_t i = 1; i < alphabet_.size(); ++i) {
        if (alphabet_[i] <= alphabet_[i - 1])
            throw std::invalid_argument("alphabet must be strictly increasing");
    }
    double total = 0.0;
    for (double p : pmf_) {
        if (p < 0.0) throw std::invalid_argument("pmf entries must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("pmf must sum to 1");
}

double DiscreteLoadModel::entropy(Unit unit) const {
    double h = 0.0;
    for (double p : pmf_) h -= xlnx(p);
    return nats_to(h, unit);
}

double DiscreteLoadModel::mean() const {
    return std::inner_product(alphabet_.begin(), alphabet_.end(), pmf_.begin(), 0.0);
}

BinaryLoadModel::BinaryLoadModel(double low_, double high_, double p_low_)
    : low(low_), high(high_), p_low(p_low_) {
    if (low < 0.0) throw std::invalid_argument("low level must be non-negative");
    if (high <= low) throw std::invalid_argument("high level must exceed low level");
    if (p_low < 0.0 || p_low > 1.0) throw std::invalid_argument("p_low must be in [0,1]");
}

DiscreteLoadModel BinaryLoadModel::to_discrete() const {
    return DiscreteLoadModel({low, high}, {p_low, 1.0 - p_low});
}

ExponentialLoad::ExponentialLoad(double mean_) : mean(mean_) {
    if (!(mean > 0.0)) throw std::invalid_argument("exponential mean must be positive");
}

PiecewiseDensity::PiecewiseDensity(std::vector<DensitySegment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) throw std::invalid_argument("density needs at least one segment");
    for (const auto& s : segments_) {
        if (!(s.hi > s.lo)) throw std::invalid_argument("segment bounds must satisfy lo < hi");
        if (s.lo < 0.0) throw std::invalid_argument("support must lie in R+");
        if (!s.density || !s.derivative)
            throw std::invalid_argument("segment requires density and analytic derivative");
    }
    std::sort(segments_.begin(), segments_.end(),
              [](const DensitySegment& a, const DensitySegment& b) { return a.lo < b.lo; });
    for (std::size_t i = 1; i < segments_.size(); ++i) {
        if (segments_[i].lo < segments_[i - 1].hi - 1e-12)
            throw std::invalid_argument("segments must not overlap");
    }

    double total = 0.0;
    for (const auto& s : segments_) {
        total += integrate(s.density, s.lo, s.hi);
        const int probes = 257;
        for (int k = 0; k <= probes; ++k) {
            const double x = s.lo + (s.hi - s.lo) * k / probes;
            if (s.density(x) < -1e-12)
                throw std::invalid_argument("density must be non-negative on its support");
        }
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("density must integrate to 1");

    // Collect jump discontinuities: segment boundaries where the one-sided
    // limits disagree, with f == 0 outside the support. The origin atom is
    // included whenever f(0+) > 0.
    const double eps = 1e-9;
    auto push_jump = [this](double x, double delta) {
        if (std::abs(delta) > 1e-12) jumps_.push_back({x, delta});
    };
    double prev_hi = 0.0;
    double prev_val = 0.0;  // f just left of the boundary
    for (const auto& s : segments_) {
        const double at_lo = s.density(s.lo + eps * (s.hi - s.lo));
        if (s.lo > prev_hi + 1e-12) {
            push_jump(prev_hi, -prev_val);  // support gap: falls to zero
            push_jump(s.lo, at_lo);
        } else {
            push_jump(s.lo, at_lo - prev_val);
        }
        prev_hi = s.hi;
        prev_val = s.density(s.hi - eps * (s.hi - s.lo));
    }
    push_jump(prev_hi, -prev_val);
    std::sort(jumps_.begin(), jumps_.end(),
              [](const DensityJump& a, const DensityJump& b) { return a.x < b.x; });
}

double PiecewiseDensity::density(double x) const {
    for (const auto& s : segments_) {
        if (x >= s.lo && x <= s.hi) return s.density(x);
    }
    return 0.0;
}

double PiecewiseDensity::mean() const {
    double m = 0.0;
    for (const auto& s : segments_) {
        m += integrate([&](double x) { return x * s.density(x); }, s.lo, s.hi);
    }
    return m;
}

double PiecewiseDensity::differential_entropy() const {
    double h = 0.0;
    for (const auto& s : segments_) {
        h -= integrate([&](double x) { return xlnx(s.density(x)); }, s.lo, s.hi);
    }
    if (!std::isfinite(h)) throw std::domain_error("differential entropy diverges");
    return h;
}

PiecewiseDensity PiecewiseDensity::uniform(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("uniform needs lo < hi");
    const double v = 1.0 / (hi - lo);
    DensitySegment seg;
    seg.lo = lo;
    seg.hi = hi;
    seg.density = [v](double) { return v; };
    seg.derivative = [](double) { return 0.0; };
    seg.kind = DensitySegment::Kind::Constant;
    return PiecewiseDensity({seg});
}

double differential_entropy(const ContinuousLoadModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ExponentialLoad>) {
                return m.differential_entropy();
            } else {
                return m.differential_entropy();
            }
        },
        model);
}

double mean(const ContinuousLoadModel& model) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ExponentialLoad>) {
                return m.mean;
            } else {
                return m.mean();
            }
        },
        model);
}

double user_mean(const UserModel& user) {
    return std::visit(
        [](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ExponentialLoad>) {
                return m.mean;
            } else {
                return m.mean();
            }
        },
        user);
}

bool MultiUserModel::all_discrete() const {
    for (const auto& u : users) {
        if (!std::holds_alternative<DiscreteLoadModel>(u) &&
            !std::holds_alternative<BinaryLoadModel>(u))
            return false;
    }
    return true;
}

void MultiUserModel::validate() const {
    if (users.empty()) throw std::invalid_argument("scenario needs at least one user");
    if (!joint_pmf) return;
    if (!all_discrete())
        throw std::invalid_argument("joint pmf requires all-discrete users");

    std::vector<std::vector<double>> marginals;
    std::size_t product = 1;
    for (const auto& u : users) {
        const DiscreteLoadModel d = std::holds_alternative<BinaryLoadModel>(u)
                                        ? std::get<BinaryLoadModel>(u).to_discrete()
                                        : std::get<DiscreteLoadModel>(u);
        marginals.push_back(d.pmf());
        product *= d.size();
    }
    if (joint_pmf->size() != product)
        throw std::invalid_argument("joint pmf size does not match product alphabet");
    double total = 0.0;
    for (double p : *joint_pmf) {
        if (p < 0.0) throw std::invalid_argument("joint pmf entries must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("joint pmf must sum to 1");

    // Marginals must match the per-user models within 1e-9.
    std::size_t stride = product;
    for (std::size_t i = 0; i < marginals.size(); ++i) {
        const std::size_t m = marginals[i].size();
        stride /= m;
        std::vector<double> marg(m, 0.0);
        for (std::size_t idx = 0; idx < joint_pmf->size(); ++idx) {
            marg[(idx / stride) % m] += (*joint_pmf)[idx];
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (std::abs(marg[j] - marginals[i][j]) > 1e-9)
                throw std::invalid_argument("joint pmf marginal mismatch for user " +
                                            std::to_string(i));
        }
    }
}

}  // namespace smpriv
