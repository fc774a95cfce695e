#pragma once

// Nonclassicality quantifiers.
//
// Depth: G(s) = criterion value on the s-ordered counting distribution; the
// depth is tau = (1 - s_th)/2 where s_th is the largest s at which the
// negativity vanishes.  Noise budget: H(nu) = criterion value after admixing
// nu thermal photons per mode into each arm; the budget is the largest noise
// that preserves negativity.
//
// Both evaluators compute only the cells a criterion actually references
// (ordered cells via kernel rows, noisy cells via short convolution prefixes).
// Materializing whole transformed tables would be wasteful for the depth scan
// and infeasible for the noise search near the nu cap, where band tails span
// tens of thousands of counts.  Per-term products are summed in ascending
// order, keeping results deterministic and transpose-exact.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "criteria.hpp"
#include "kernels.hpp"
#include "pmf.hpp"

namespace qnc {

/// Result of a depth or noise-budget search.
struct NCResult {
    std::string label;                  ///< criterion identification
    double modes = 1.0;                 ///< mode count assumed by the transform
    double origin_value = 0.0;          ///< criterion at s = 1 resp. nu = 0
    int origin_branch = -1;             ///< attained branch at the origin
    bool nonclassical = false;          ///< origin below the tolerance
    std::optional<double> tau;          ///< depth, set by the s-scan
    std::optional<double> nu;           ///< noise budget, set by the nu-scan
    bool capped = false;                ///< negativity survived the whole s grid
    bool unbounded = false;             ///< negativity survived up to nu_cap
    bool multiple_roots = false;        ///< more than one sign change on the grid
    std::pair<double, double> bracket{1.0, 1.0};  ///< final search interval
    int evaluations = 0;                ///< number of criterion evaluations
};

/// Evaluates criterion cells of the s-ordered distribution on demand, sharing
/// kernel rows and computed cells across criteria and bisection steps.
class OrderingEvaluator {
public:
    OrderingEvaluator(const JointPMF& pmf, double modes)
        : pmf_(pmf), modes_(modes) {}

    double cell(double s, int n, int m) {
        PerS& e = entry(s);
        auto it = e.cells.find({n, m});
        if (it != e.cells.end()) return it->second;
        const std::vector<double>& rs = e.ks.row(n);
        const std::vector<double>& ri = e.ki.row(m);
        std::vector<double> prods;
        pmf_.for_each([&](int a, int b, double p) {
            prods.push_back(rs[std::size_t(a)] * ri[std::size_t(b)] * p);
        });
        std::sort(prods.begin(), prods.end());
        double v = 0.0;
        for (double x : prods) v += x;
        e.cells.emplace(std::pair<int, int>{n, m}, v);
        return v;
    }

    double criterion_value(const Criterion& c, double s, int* attained = nullptr) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1;
        for (std::size_t i = 0; i < c.prob.size(); ++i) {
            double v = c.prob[i].eval_cells([&](int a, int b) { return cell(s, a, b); });
            if (v < best) {
                best = v;
                bi = int(i);
            }
        }
        if (attained) *attained = bi;
        return best;
    }

    const JointPMF& pmf() const { return pmf_; }
    double modes() const { return modes_; }

private:
    struct PerS {
        KernelRowCache ks, ki;
        std::map<std::pair<int, int>, double> cells;
        PerS(double s, double modes, int ns, int ni)
            : ks(s, modes, ns), ki(s, modes, ni) {}
    };

    PerS& entry(double s) {
        auto it = per_s_.find(s);
        if (it == per_s_.end())
            it = per_s_
                     .emplace(std::piecewise_construct, std::forward_as_tuple(s),
                              std::forward_as_tuple(s, modes_, pmf_.cutoff_s(),
                                                    pmf_.cutoff_i()))
                     .first;
        return it->second;
    }

    const JointPMF& pmf_;
    double modes_;
    std::map<double, PerS> per_s_;
};

/// Evaluates criterion cells of the noise-admixed distribution on demand;
/// only convolution prefixes up to the referenced cell indices are needed.
class NoiseEvaluator {
public:
    NoiseEvaluator(const JointPMF& pmf, double modes) : pmf_(pmf), modes_(modes) {}

    double cell(double nu, int n, int m) {
        PerNu& e = entry(nu);
        auto it = e.cells.find({n, m});
        if (it != e.cells.end()) return it->second;
        grow_band(e, nu, std::max(n, m));
        std::vector<double> prods;
        pmf_.for_each([&](int a, int b, double p) {
            if (a > n || b > m) return;
            prods.push_back(p * e.band[std::size_t(n - a)] * e.band[std::size_t(m - b)]);
        });
        std::sort(prods.begin(), prods.end());
        double v = 0.0;
        for (double x : prods) v += x;
        e.cells.emplace(std::pair<int, int>{n, m}, v);
        return v;
    }

    double criterion_value(const Criterion& c, double nu, int* attained = nullptr) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1;
        for (std::size_t i = 0; i < c.prob.size(); ++i) {
            double v = c.prob[i].eval_cells([&](int a, int b) { return cell(nu, a, b); });
            if (v < best) {
                best = v;
                bi = int(i);
            }
        }
        if (attained) *attained = bi;
        return best;
    }

private:
    struct PerNu {
        std::vector<double> band;
        std::map<std::pair<int, int>, double> cells;
    };

    PerNu& entry(double nu) { return per_nu_[nu]; }

    void grow_band(PerNu& e, double nu, int upto) {
        for (int k = int(e.band.size()); k <= upto; ++k)
            e.band.push_back(mandel_rice(k, nu, modes_));
    }

    const JointPMF& pmf_;
    double modes_;
    std::map<double, PerNu> per_nu_;
};

namespace detail {

/// Shared depth contract: origin verdict, 33-point downward grid over
/// (-1 + delta, 1], largest sign change, absolute-width bisection.
inline NCResult depth_scan(const std::string& label, double modes,
                           const std::function<double(double, int*)>& G,
                           double eps_stat) {
    constexpr double kDelta = 1e-3;
    constexpr int kGridSteps = 32;
    constexpr double kWidth = 1e-4;

    NCResult r;
    r.label = label;
    r.modes = modes;
    r.origin_value = G(1.0, &r.origin_branch);
    ++r.evaluations;
    r.nonclassical = r.origin_value < -eps_stat;
    if (!r.nonclassical) {
        r.tau = 0.0;
        r.bracket = {1.0, 1.0};
        return r;
    }

    auto grid_s = [&](int j) { return 1.0 - j * (2.0 - kDelta) / kGridSteps; };
    std::vector<bool> negative(kGridSteps + 1);
    negative[0] = true;  // the origin evaluation is grid point 0
    int first_change = -1;
    int changes = 0;
    for (int j = 1; j <= kGridSteps; ++j) {
        double g = G(grid_s(j), nullptr);
        ++r.evaluations;
        negative[std::size_t(j)] = g < 0.0;
        if (negative[std::size_t(j)] != negative[std::size_t(j - 1)]) {
            ++changes;
            if (first_change < 0) first_change = j;
        }
    }
    r.multiple_roots = changes > 1;
    if (first_change < 0) {
        r.capped = true;
        r.tau = (2.0 - kDelta) / 2.0;
        r.bracket = {grid_s(kGridSteps), grid_s(kGridSteps)};
        return r;
    }

    double lo = grid_s(first_change);      // criterion nonnegative here
    double hi = grid_s(first_change - 1);  // negativity persists here
    while (hi - lo > kWidth) {
        double mid = 0.5 * (lo + hi);
        double g = G(mid, nullptr);
        ++r.evaluations;
        if (g < 0.0)
            hi = mid;
        else
            lo = mid;
    }
    double s_root = 0.5 * (lo + hi);
    r.tau = (1.0 - s_root) / 2.0;
    r.bracket = {lo, hi};
    return r;
}

/// Shared noise contract: origin verdict, geometric doubling from 0.01 up to
/// nu_cap, relative-width bisection.
inline NCResult noise_scan(const std::string& label, double modes,
                           const std::function<double(double, int*)>& H,
                           double eps_stat, double nu_cap) {
    constexpr double kStart = 0.01;
    constexpr double kRelWidth = 1e-4;
    if (nu_cap <= 0.0) throw ValidationError("noise cap must be positive");

    NCResult r;
    r.label = label;
    r.modes = modes;
    r.origin_value = H(0.0, &r.origin_branch);
    ++r.evaluations;
    r.nonclassical = r.origin_value < -eps_stat;
    if (!r.nonclassical) {
        r.nu = 0.0;
        r.bracket = {0.0, 0.0};
        return r;
    }

    double lo = 0.0;  // negativity persists here
    double hi = kStart;
    bool bracketed = false;
    while (hi <= nu_cap) {
        double h = H(hi, nullptr);
        ++r.evaluations;
        if (h >= 0.0) {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!bracketed) {
        r.unbounded = true;
        r.bracket = {lo, nu_cap};
        return r;
    }
    while (hi - lo > kRelWidth * hi) {
        double mid = 0.5 * (lo + hi);
        double h = H(mid, nullptr);
        ++r.evaluations;
        if (h < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    r.nu = 0.5 * (lo + hi);
    r.bracket = {lo, hi};
    return r;
}

}  // namespace detail

/// Depth of a criterion's negativity on a counting distribution, via the
/// s-ordered probability route, sharing one evaluator across the search.
inline NCResult ncd(const Criterion& c, OrderingEvaluator& ev, double eps_stat = 0.0) {
    return detail::depth_scan(
        c.label, ev.modes(),
        [&](double s, int* att) { return ev.criterion_value(c, s, att); }, eps_stat);
}

inline NCResult ncd(const Criterion& c, const JointPMF& pmf, double modes,
                    double eps_stat = 0.0) {
    OrderingEvaluator ev(pmf, modes);
    return ncd(c, ev, eps_stat);
}

/// Depth via the moment route: the criterion's moment form evaluated on
/// s-transformed factorial moments.
inline NCResult moment_ncd(const Criterion& c, const MomentVector& mv, double modes,
                           double eps_stat = 0.0) {
    return detail::depth_scan(
        c.label, modes,
        [&](double s, int* att) {
            MomentVector t = transform_moments(mv, s, modes, modes);
            return eval_moment(c, t, att);
        },
        eps_stat);
}

/// Largest admissible per-mode thermal noise preserving the negativity.
inline NCResult nccp(const Criterion& c, const JointPMF& pmf, double modes,
                     double eps_stat = 0.0, double nu_cap = 1e3) {
    NoiseEvaluator ev(pmf, modes);
    return detail::noise_scan(
        c.label, modes,
        [&](double nu, int* att) { return ev.criterion_value(c, nu, att); }, eps_stat,
        nu_cap);
}

}  // namespace qnc
