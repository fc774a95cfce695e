#pragma once
// Joint photocount/photon-number distribution over two arms (signal, idler),
// with marginals, convolution against 1-D noise bands and moment extraction.
//
// JointPMF is immutable after construction and all free functions are pure, so
// instances can be shared freely.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <tuple>
#include <vector>

#include "qnc/errors.hpp"

namespace qnc {

enum class Arm { signal, idler };

/// Arm selector for mode-count estimation; `mean` averages the two arms.
enum class ModeArm { signal, idler, mean };

/// n! as a double; exact up to 170! and via lgamma beyond.
inline double factorial_d(int n) {
    if (n <= 170) {
        double f = 1.0;
        for (int i = 2; i <= n; ++i) f *= double(i);
        return f;
    }
    return std::exp(std::lgamma(double(n) + 1.0));
}

/// Falling factorial n (n-1) ... (n-k+1); zero when k > n.
inline double falling_factorial(int n, int k) {
    if (k > n) return 0.0;
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= double(n - i);
    return f;
}

/// Dense nonnegative joint distribution p(n_s, n_i) with explicit truncation
/// bookkeeping: stored mass + norm_deficit accounts for 1.
class JointPMF {
public:
    /// Build from (n_s, n_i, probability) cells; duplicate cells accumulate.
    static JointPMF from_cells(const std::vector<std::tuple<int, int, double>>& cells,
                               double norm_deficit = 0.0) {
        int cs = 0, ci = 0;
        for (const auto& [a, b, p] : cells) {
            if (a < 0 || b < 0) throw ValidationError("negative photon-number index");
            if (p < 0.0) throw ValidationError("negative probability");
            cs = std::max(cs, a);
            ci = std::max(ci, b);
        }
        JointPMF pmf;
        pmf.cutoff_s_ = cs;
        pmf.cutoff_i_ = ci;
        pmf.p_.assign(std::size_t(cs + 1) * std::size_t(ci + 1), 0.0);
        for (const auto& [a, b, p] : cells) pmf.p_[pmf.index(a, b)] += p;
        pmf.norm_deficit_ = norm_deficit;
        pmf.check_normalization();
        return pmf;
    }

    /// Build from a dense matrix; row index = n_s, column index = n_i.
    static JointPMF from_dense(const std::vector<std::vector<double>>& rows,
                               double norm_deficit = 0.0) {
        std::vector<std::tuple<int, int, double>> cells;
        for (std::size_t a = 0; a < rows.size(); ++a)
            for (std::size_t b = 0; b < rows[a].size(); ++b)
                cells.emplace_back(int(a), int(b), rows[a][b]);
        return from_cells(cells, norm_deficit);
    }

    double at(int ns, int ni) const {
        if (ns < 0 || ni < 0 || ns > cutoff_s_ || ni > cutoff_i_) return 0.0;
        return p_[index(ns, ni)];
    }

    int cutoff_s() const { return cutoff_s_; }
    int cutoff_i() const { return cutoff_i_; }
    double norm_deficit() const { return norm_deficit_; }

    /// Stored probability mass (= 1 - norm_deficit up to rounding).
    double total() const {
        double t = 0.0;
        for (double x : p_) t += x;
        return t;
    }

    /// Visit nonzero cells in row-major (n_s-major) order: f(n_s, n_i, p).
    template <class F>
    void for_each(F&& f) const {
        for (int a = 0; a <= cutoff_s_; ++a)
            for (int b = 0; b <= cutoff_i_; ++b) {
                double v = p_[index(a, b)];
                if (v != 0.0) f(a, b, v);
            }
    }

    /// Swap the two arms.
    JointPMF transposed() const {
        JointPMF t;
        t.cutoff_s_ = cutoff_i_;
        t.cutoff_i_ = cutoff_s_;
        t.norm_deficit_ = norm_deficit_;
        t.p_.assign(p_.size(), 0.0);
        for (int a = 0; a <= cutoff_s_; ++a)
            for (int b = 0; b <= cutoff_i_; ++b) t.p_[std::size_t(b) * (cutoff_s_ + 1) + a] = p_[index(a, b)];
        return t;
    }

private:
    std::size_t index(int ns, int ni) const {
        return std::size_t(ns) * std::size_t(cutoff_i_ + 1) + std::size_t(ni);
    }
    void check_normalization() const {
        if (norm_deficit_ < -1e-12) throw ValidationError("negative truncation deficit");
        double t = total() + norm_deficit_;
        if (std::abs(t - 1.0) > 1e-12)
            throw ValidationError("probabilities + truncation deficit sum to " +
                                  std::to_string(t) + ", expected 1");
    }

    int cutoff_s_ = 0, cutoff_i_ = 0;
    double norm_deficit_ = 0.0;
    std::vector<double> p_;
};

/// One-dimensional marginal of the chosen arm; sums to 1 - norm_deficit.
inline std::vector<double> marginal(const JointPMF& pmf, Arm arm) {
    int n = (arm == Arm::signal) ? pmf.cutoff_s() : pmf.cutoff_i();
    std::vector<double> m(std::size_t(n) + 1, 0.0);
    pmf.for_each([&](int a, int b, double p) { m[arm == Arm::signal ? a : b] += p; });
    return m;
}

/// Independent additive noise on each arm: out(n,m) = sum p(a,b) ns(n-a) ni(m-b).
/// Output support is the full index sum; truncated mass is recorded, not hidden.
inline JointPMF convolve(const JointPMF& pmf, const std::vector<double>& noise_s,
                         const std::vector<double>& noise_i) {
    if (noise_s.empty() || noise_i.empty())
        throw ValidationError("noise band must have at least one entry");
    int cs = pmf.cutoff_s() + int(noise_s.size()) - 1;
    int ci = pmf.cutoff_i() + int(noise_i.size()) - 1;
    std::vector<std::vector<double>> out(cs + 1, std::vector<double>(ci + 1, 0.0));
    pmf.for_each([&](int a, int b, double p) {
        for (std::size_t u = 0; u < noise_s.size(); ++u) {
            if (noise_s[u] == 0.0) continue;
            double pu = p * noise_s[u];
            for (std::size_t v = 0; v < noise_i.size(); ++v)
                out[a + u][b + v] += pu * noise_i[v];
        }
    });
    double mass = 0.0;
    for (const auto& row : out)
        for (double x : row) mass += x;
    return JointPMF::from_dense(out, 1.0 - mass);
}

/// Joint falling-factorial moment <W_s^k W_i^l> = sum p(n,m) (n)_k (m)_l.
/// Sets *truncation_warning when the requested order exceeds the stored support,
/// i.e. when the stored table cannot witness the moment at all.
inline double factorial_moment(const JointPMF& pmf, int k, int l,
                               bool* truncation_warning = nullptr) {
    if (k < 0 || l < 0) throw InvalidIndices("moment orders must be nonnegative");
    if (truncation_warning && (k > pmf.cutoff_s() || l > pmf.cutoff_i()))
        *truncation_warning = true;
    double acc = 0.0;
    pmf.for_each([&](int a, int b, double p) {
        if (a < k || b < l) return;
        acc += p * falling_factorial(a, k) * falling_factorial(b, l);
    });
    return acc;
}

/// Vacuum-normalized cell moment n_s! n_i! p(n_s,n_i) / p(0,0).
inline double modified_moment(const JointPMF& pmf, int ns, int ni) {
    double p00 = pmf.at(0, 0);
    if (p00 <= 0.0) throw DivisionByVacuum();
    return factorial_d(ns) * factorial_d(ni) * pmf.at(ns, ni) / p00;
}

/// Chaotic-field mode estimate <W>^2 / (<W^2> - <W>^2) of the chosen arm.
inline double estimate_modes(const JointPMF& pmf, ModeArm arm) {
    if (arm == ModeArm::mean)
        return 0.5 * (estimate_modes(pmf, ModeArm::signal) + estimate_modes(pmf, ModeArm::idler));
    bool sig = (arm == ModeArm::signal);
    double w1 = factorial_moment(pmf, sig ? 1 : 0, sig ? 0 : 1);
    double w2 = factorial_moment(pmf, sig ? 2 : 0, sig ? 0 : 2);
    double var = w2 - w1 * w1;
    if (var <= 1e-12 * std::max(w1 * w1, 1e-300))
        throw NotChaoticLike("no excess intensity fluctuations: variance " +
                             std::to_string(var));
    return w1 * w1 / var;
}

/// Table of joint factorial moments up to a maximal per-arm order.
/// `ordering` records which operator ordering the entries refer to (1 = normal).
struct MomentVector {
    int max_order = 0;
    double ordering = 1.0;
    std::vector<double> v;  ///< (max_order+1)^2 entries, k-major

    bool has(int k, int l) const {
        return k >= 0 && l >= 0 && k <= max_order && l <= max_order;
    }
    double at(int k, int l) const {
        if (!has(k, l))
            throw MissingOrder("moment order (" + std::to_string(k) + "," +
                               std::to_string(l) + ") beyond table order " +
                               std::to_string(max_order));
        return v[std::size_t(k) * (max_order + 1) + l];
    }
    double& slot(int k, int l) { return v[std::size_t(k) * (max_order + 1) + l]; }
};

/// Extract all normally-ordered factorial moments with k,l <= max_order.
inline MomentVector moments_of(const JointPMF& pmf, int max_order) {
    MomentVector mv;
    mv.max_order = max_order;
    mv.ordering = 1.0;
    mv.v.assign(std::size_t(max_order + 1) * (max_order + 1), 0.0);
    for (int k = 0; k <= max_order; ++k)
        for (int l = 0; l <= max_order; ++l) mv.slot(k, l) = factorial_moment(pmf, k, l);
    return mv;
}

/// Table of vacuum-normalized cell moments; substituting these for the
/// factorial moments turns a moment criterion into its probability form up to
/// a positive factor.
inline MomentVector modified_moments(const JointPMF& pmf, int max_order) {
    MomentVector mv;
    mv.max_order = max_order;
    mv.ordering = 1.0;
    mv.v.assign(std::size_t(max_order + 1) * (max_order + 1), 0.0);
    for (int k = 0; k <= max_order; ++k)
        for (int l = 0; l <= max_order; ++l) mv.slot(k, l) = modified_moment(pmf, k, l);
    return mv;
}

}  // namespace qnc
