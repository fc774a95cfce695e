#pragma once

// Operator-ordering kernels and field transforms.
//
// The kernel K_s(n,m;M) expresses an s-ordered M-mode photocount
// quasi-distribution in terms of the measured (normally ordered) one,
//     p_s(n) = sum_m K_s(n,m;M) p(m),
// and joint tables transform with one kernel factor per arm.  Entries are
// alternating sums with potentially catastrophic cancellation, so they are
// evaluated either in exact rational arithmetic (integer mode number; every
// binary-float s is an exact rational) or in big-float arithmetic with an
// explicit cancellation check that escalates the working precision.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "errors.hpp"
#include "pmf.hpp"

namespace qnc {

using rational = boost::multiprecision::mpq_rational;
using bigfloat = boost::multiprecision::mpfr_float;

/// Generalized Laguerre polynomial L_k^alpha(x) by the stable three-term
/// recurrence (std::assoc_laguerre only accepts integer alpha).
inline double laguerre(int k, double alpha, double x) {
    if (k < 0) throw InvalidIndices("Laguerre degree must be nonnegative");
    if (k == 0) return 1.0;
    double lm2 = 1.0, lm1 = 1.0 + alpha - x;
    for (int j = 2; j <= k; ++j) {
        double cur = ((2.0 * j - 1.0 + alpha - x) * lm1 - (j - 1.0 + alpha) * lm2) / j;
        lm2 = lm1;
        lm1 = cur;
    }
    return lm1;
}

namespace detail {

inline rational rat_pow(rational base, unsigned long e) {
    rational acc(1);
    while (e) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

/// Restores the global big-float default precision on scope exit.
struct PrecisionScope {
    unsigned saved;
    explicit PrecisionScope(unsigned digits10) : saved(bigfloat::default_precision()) {
        bigfloat::default_precision(digits10);
    }
    ~PrecisionScope() { bigfloat::default_precision(saved); }
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;
};

inline unsigned bits_to_digits10(int bits) { return unsigned(bits * 0.30103) + 4; }

}  // namespace detail

/// S(n,m,alpha) = 2^{m-n} sum_{l=0}^m (-1)^{m-l} C(m,l) C(n+l+alpha, n),
/// evaluated exactly.  Vanishes for n < m and equals 1 on the diagonal.
inline rational s_function_exact(int n, int m, const rational& alpha) {
    if (n < 0 || m < 0) throw InvalidIndices("S-function indices must be nonnegative");
    if (alpha <= -1) throw ValidationError("S-function parameter must exceed -1");
    // gb = C(n+l+alpha, n), advanced in l; binom = C(m,l)
    rational gb(1);
    for (int j = 1; j <= n; ++j) gb *= (alpha + j) / j;
    rational acc(0), binom(1);
    for (int l = 0; l <= m; ++l) {
        if (l) {
            binom *= rational(m - l + 1, l);
            gb *= (alpha + l + n) / (alpha + l);
        }
        if ((m - l) & 1)
            acc -= binom * gb;
        else
            acc += binom * gb;
    }
    if (m >= n) return acc * detail::rat_pow(rational(2), (unsigned long)(m - n));
    return acc / detail::rat_pow(rational(2), (unsigned long)(n - m));
}

/// Double-precision wrapper; exact internally because every binary-float
/// alpha is a rational number.
inline double s_function(int n, int m, double alpha) {
    return s_function_exact(n, m, rational(alpha)).convert_to<double>();
}

namespace detail {

inline void check_kernel_args(int n, int m, double s, double modes) {
    if (n < 0 || m < 0) throw InvalidIndices("kernel indices must be nonnegative");
    if (!(s > -1.0 && s <= 1.0))
        throw ValidationError("ordering parameter must lie in (-1, 1]");
    if (!(modes > 0.0)) throw ValidationError("mode number must be positive");
}

/// Exact-rational kernel row: K_s(n, m) for m = 0..N_in.  Requires integer M.
inline std::vector<rational> kernel_row_exact(int n, int N_in, const rational& s, long M) {
    rational r = (1 - s) / (3 - s);
    rational a = (1 + s) / (1 - s);
    rational x = rational(4) / ((1 + s) * (3 - s));
    rational c0 = rat_pow(rational(2) / (3 - s), (unsigned long)M);
    // Bx[l] = C(n+l+M-1, n) x^l
    std::vector<rational> Bx(std::size_t(N_in) + 1);
    rational B(1);
    for (long j = 1; j <= n; ++j) B *= rational(M - 1 + j, j);
    Bx[0] = B;
    rational xp(1);
    for (int l = 1; l <= N_in; ++l) {
        B *= rational(n + l + M - 1, l + M - 1);
        xp *= x;
        Bx[std::size_t(l)] = B * xp;
    }
    rational base = c0 * rat_pow(r, (unsigned long)n);
    std::vector<rational> out(std::size_t(N_in) + 1);
    rational apow(1);
    for (int m = 0; m <= N_in; ++m) {
        if (m) apow *= a;
        rational inner(0), binom(1);
        for (int l = 0; l <= m; ++l) {
            if (l) binom *= rational(m - l + 1, l);
            if ((m - l) & 1)
                inner -= binom * Bx[std::size_t(l)];
            else
                inner += binom * Bx[std::size_t(l)];
        }
        out[std::size_t(m)] = base * apow * inner;
    }
    return out;
}

/// Big-float kernel row at a fixed working precision.  A per-column
/// cancellation estimate guards the alternating sum; when the requested
/// precision cannot certify the column, PrecisionEscalation is thrown.
inline std::vector<double> kernel_row_bigfloat(int n, int N_in, double s, double modes,
                                               int bits) {
    PrecisionScope scope(bits_to_digits10(bits));
    bigfloat sp(s), M(modes);
    bigfloat r = (1 - sp) / (3 - sp);
    bigfloat a = (1 + sp) / (1 - sp);
    bigfloat x = 4 / ((1 + sp) * (3 - sp));
    bigfloat base = pow(bigfloat(2) / (3 - sp), M) * pow(r, n);
    std::vector<bigfloat> Bx(std::size_t(N_in) + 1);
    bigfloat B(1);
    for (int j = 1; j <= n; ++j) B = B * (M - 1 + j) / j;
    Bx[0] = B;
    bigfloat xp(1);
    for (int l = 1; l <= N_in; ++l) {
        B = B * (n + l + M - 1) / (l + M - 1);
        xp *= x;
        Bx[std::size_t(l)] = B * xp;
    }
    const double eps = std::pow(2.0, 1 - bits);
    std::vector<double> out(std::size_t(N_in) + 1);
    bigfloat apow(1);
    for (int m = 0; m <= N_in; ++m) {
        if (m) apow *= a;
        bigfloat inner(0), binom(1), maxterm(0);
        for (int l = 0; l <= m; ++l) {
            if (l) binom = binom * (m - l + 1) / l;
            bigfloat term = binom * Bx[std::size_t(l)];
            if (term > maxterm) maxterm = term;
            if ((m - l) & 1)
                inner -= term;
            else
                inner += term;
        }
        bigfloat pref = base * apow;
        double err_est = (maxterm * (m + 2)).convert_to<double>() * eps;
        double inner_d = inner.convert_to<double>();
        bool resolved = err_est <= 1e-13 * std::abs(inner_d) ||
                        (pref.convert_to<double>() * err_est) <= 1e-22;
        if (!resolved) throw PrecisionEscalation(n, m, s, modes, bits);
        out[std::size_t(m)] = (pref * inner).convert_to<double>();
    }
    return out;
}

inline double kernel_entry_bigfloat(int n, int m, double s, double modes, int bits) {
    check_kernel_args(n, m, s, modes);
    if (s == 1.0) return n == m ? 1.0 : 0.0;
    return kernel_row_bigfloat(n, m, s, modes, bits)[std::size_t(m)];
}

/// Big-float row with automatic precision escalation.  `bits` carries the last
/// sufficient precision in and the one actually used out.
inline std::vector<double> kernel_row_escalating(int n, int N_in, double s, double modes,
                                                 int& bits) {
    int b = std::clamp(bits, 64, 4096);
    for (;;) {
        try {
            std::vector<double> row = kernel_row_bigfloat(n, N_in, s, modes, b);
            bits = b;
            return row;
        } catch (const PrecisionEscalation&) {
            if (b >= 4096) throw;
            b = std::min(2 * b, 4096);
        }
    }
}

}  // namespace detail

/// True when the kernel can be evaluated on the exact-rational path
/// (integer mode number; the ordering parameter is always exact).
inline bool kernel_exact_applicable(double s, double modes) {
    (void)s;
    return modes == std::floor(modes) && modes >= 1.0 && modes <= 1e6;
}

/// One kernel row K_s(n, 0..N_in; M).
inline std::vector<double> kernel_row(double s, double modes, int N_in, int n) {
    detail::check_kernel_args(n, 0, s, modes);
    if (N_in < 0) throw InvalidIndices("kernel row width must be nonnegative");
    if (s == 1.0) {
        std::vector<double> row(std::size_t(N_in) + 1, 0.0);
        if (n <= N_in) row[std::size_t(n)] = 1.0;
        return row;
    }
    if (kernel_exact_applicable(s, modes)) {
        std::vector<rational> exact =
            detail::kernel_row_exact(n, N_in, rational(s), (long)std::llround(modes));
        std::vector<double> row(exact.size());
        for (std::size_t i = 0; i < exact.size(); ++i) row[i] = exact[i].convert_to<double>();
        return row;
    }
    int bits = 64 + 2 * (n + N_in + int(std::ceil(modes)));
    return detail::kernel_row_escalating(n, N_in, s, modes, bits);
}

/// Single kernel entry at a requested working precision.  On the exact path
/// the precision request is trivially satisfied; on the big-float path an
/// unresolvable cancellation raises PrecisionEscalation.
inline double kernel_entry(int n, int m, double s, double modes, int precision_bits) {
    detail::check_kernel_args(n, m, s, modes);
    if (s == 1.0) return n == m ? 1.0 : 0.0;
    if (kernel_exact_applicable(s, modes))
        return detail::kernel_row_exact(n, m, rational(s), (long)std::llround(modes))
            .back()
            .convert_to<double>();
    return detail::kernel_entry_bigfloat(n, m, s, modes, precision_bits);
}

/// Single kernel entry with automatic path selection and precision escalation.
inline double kernel_entry_auto(int n, int m, double s, double modes) {
    detail::check_kernel_args(n, m, s, modes);
    if (s == 1.0) return n == m ? 1.0 : 0.0;
    if (kernel_exact_applicable(s, modes))
        return detail::kernel_row_exact(n, m, rational(s), (long)std::llround(modes))
            .back()
            .convert_to<double>();
    int bits = 64 + 2 * (n + m + int(std::ceil(modes)));
    return detail::kernel_row_escalating(n, m, s, modes, bits)[std::size_t(m)];
}

/// Dense ordering kernel acting on photocount columns 0..N_in.  The output
/// range 0..N_out is grown until every column is normalized to within
/// `residual_target` and the falling-factorial-weighted tail (orders up to
/// `weight_order`) is negligible, so moments of transformed tables are
/// trustworthy, not just their mass.
struct OrderingKernel {
    double s = 1.0;
    double modes = 1.0;
    int N_in = 0;
    int N_out = 0;
    int precision_bits = 0;  ///< 0 = exact-rational path
    std::vector<double> entries;  ///< row-major (N_out+1) x (N_in+1)
    std::vector<double> column_norm_residuals;

    double entry(int n, int m) const {
        if (n < 0 || m < 0 || n > N_out || m > N_in) return 0.0;
        return entries[std::size_t(n) * (N_in + 1) + m];
    }
};

inline OrderingKernel build_kernel(double s, double modes, int N_in,
                                   double residual_target = 1e-10, int weight_order = 4) {
    detail::check_kernel_args(0, 0, s, modes);
    if (N_in < 0) throw InvalidIndices("kernel input range must be nonnegative");
    OrderingKernel k;
    k.s = s;
    k.modes = modes;
    k.N_in = N_in;
    if (s == 1.0) {
        k.N_out = N_in;
        k.entries.assign(std::size_t(N_in + 1) * (N_in + 1), 0.0);
        for (int n = 0; n <= N_in; ++n) k.entries[std::size_t(n) * (N_in + 1) + n] = 1.0;
        k.column_norm_residuals.assign(std::size_t(N_in) + 1, 0.0);
        return k;
    }
    const bool exact = kernel_exact_applicable(s, modes);
    const rational srat(s);
    const long Ml = exact ? (long)std::llround(modes) : 0;
    int bits = 64 + 2 * (N_in + int(std::ceil(modes)));
    std::vector<double> colsum(std::size_t(N_in) + 1, 0.0);
    double weighted_peak = 1.0;
    int quiet_rows = 0;
    int n = 0;
    for (;; ++n) {
        if (n > 50000) throw Error("ordering kernel tail failed to close by row 50000");
        std::vector<double> row;
        if (exact) {
            std::vector<rational> er = detail::kernel_row_exact(n, N_in, srat, Ml);
            row.resize(er.size());
            for (std::size_t i = 0; i < er.size(); ++i) row[i] = er[i].convert_to<double>();
        } else {
            row = detail::kernel_row_escalating(n, N_in, s, modes, bits);
            k.precision_bits = std::max(k.precision_bits, bits);
        }
        double rowmag = 0.0;
        for (int m = 0; m <= N_in; ++m) {
            colsum[std::size_t(m)] += row[std::size_t(m)];
            rowmag = std::max(rowmag, std::abs(row[std::size_t(m)]));
        }
        k.entries.insert(k.entries.end(), row.begin(), row.end());
        double weighted = rowmag * std::max(1.0, falling_factorial(n, weight_order));
        weighted_peak = std::max(weighted_peak, weighted);
        quiet_rows = (weighted < 1e-15 * weighted_peak) ? quiet_rows + 1 : 0;
        if (quiet_rows >= 12 && n >= N_in) {
            bool normalized = true;
            for (double c : colsum)
                if (std::abs(1.0 - c) >= residual_target) normalized = false;
            if (normalized) break;
        }
    }
    k.N_out = n;
    k.column_norm_residuals.resize(std::size_t(N_in) + 1);
    for (int m = 0; m <= N_in; ++m)
        k.column_norm_residuals[std::size_t(m)] = std::abs(1.0 - colsum[std::size_t(m)]);
    return k;
}

/// Lazily computed kernel rows, for criterion evaluations that touch only a
/// handful of output cells of a transformed distribution.
class KernelRowCache {
public:
    KernelRowCache(double s, double modes, int N_in) : s_(s), modes_(modes), N_in_(N_in) {
        detail::check_kernel_args(0, 0, s, modes);
        if (N_in < 0) throw InvalidIndices("kernel row width must be nonnegative");
    }
    const std::vector<double>& row(int n) {
        auto it = rows_.find(n);
        if (it != rows_.end()) return it->second;
        return rows_.emplace(n, kernel_row(s_, modes_, N_in_, n)).first->second;
    }
    double s() const { return s_; }
    double modes() const { return modes_; }
    int N_in() const { return N_in_; }

private:
    double s_, modes_;
    int N_in_;
    std::map<int, std::vector<double>> rows_;
};

/// A (possibly signed) joint quasi-distribution table.
struct SignedTable {
    int n_max_s = 0, n_max_i = 0;
    std::vector<double> v;  ///< row-major (n_max_s+1) x (n_max_i+1)

    double at(int n, int m) const {
        if (n < 0 || m < 0 || n > n_max_s || m > n_max_i) return 0.0;
        return v[std::size_t(n) * (n_max_i + 1) + m];
    }
    double total() const {
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc;
    }
    double factorial_moment(int k, int l) const {
        if (k < 0 || l < 0) throw InvalidIndices("moment orders must be nonnegative");
        double acc = 0.0;
        for (int n = 0; n <= n_max_s; ++n)
            for (int m = 0; m <= n_max_i; ++m)
                acc += at(n, m) * falling_factorial(n, k) * falling_factorial(m, l);
        return acc;
    }
};

/// Transform a photocount distribution to ordering s with per-arm parameters.
inline SignedTable apply_ordering(const JointPMF& pmf, double s_s, double modes_s,
                                  double s_i, double modes_i, int weight_order = 4) {
    SignedTable t;
    if (s_s == 1.0 && s_i == 1.0) {
        t.n_max_s = pmf.cutoff_s();
        t.n_max_i = pmf.cutoff_i();
        t.v.assign(std::size_t(t.n_max_s + 1) * (t.n_max_i + 1), 0.0);
        pmf.for_each([&](int a, int b, double p) {
            t.v[std::size_t(a) * (t.n_max_i + 1) + b] = p;
        });
        return t;
    }
    OrderingKernel ks = build_kernel(s_s, modes_s, pmf.cutoff_s(), 1e-10, weight_order);
    OrderingKernel ki = (s_s == s_i && modes_s == modes_i && pmf.cutoff_i() == pmf.cutoff_s())
                            ? ks
                            : build_kernel(s_i, modes_i, pmf.cutoff_i(), 1e-10, weight_order);
    // two-stage contraction: rows first, then columns
    int Ns = ks.N_out, Ni = ki.N_out;
    int ci = pmf.cutoff_i();
    std::vector<double> tmp(std::size_t(Ns + 1) * (ci + 1), 0.0);
    pmf.for_each([&](int a, int b, double p) {
        for (int n = 0; n <= Ns; ++n) tmp[std::size_t(n) * (ci + 1) + b] += ks.entry(n, a) * p;
    });
    t.n_max_s = Ns;
    t.n_max_i = Ni;
    t.v.assign(std::size_t(Ns + 1) * (Ni + 1), 0.0);
    for (int n = 0; n <= Ns; ++n)
        for (int b = 0; b <= ci; ++b) {
            double w = tmp[std::size_t(n) * (ci + 1) + b];
            if (w == 0.0) continue;
            for (int m = 0; m <= Ni; ++m)
                t.v[std::size_t(n) * (Ni + 1) + m] += ki.entry(m, b) * w;
        }
    return t;
}

inline SignedTable apply_ordering(const JointPMF& pmf, double s, double modes,
                                  int weight_order = 4) {
    return apply_ordering(pmf, s, modes, s, modes, weight_order);
}

namespace detail {

/// Per-arm moment conversion coefficients R[k][j] such that
/// <W^k>_s = sum_j R[k][j] <W^j>, with h = (1-s)/2 and
/// R[k][j] = C(k,j) * prod_{t=j}^{k-1} (M+t) * h^{k-j}.
inline std::vector<std::vector<double>> moment_transform_rows(int kmax, double s,
                                                              double modes) {
    double h = (1.0 - s) / 2.0;
    std::vector<std::vector<double>> R(std::size_t(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) {
        R[std::size_t(k)].assign(std::size_t(k) + 1, 0.0);
        for (int j = 0; j <= k; ++j) {
            double c = 1.0;
            for (int t = 0; t < j; ++t) c = c * (k - t) / (t + 1.0);  // C(k,j)
            for (int t = j; t < k; ++t) c *= modes + t;
            R[std::size_t(k)][std::size_t(j)] = c * std::pow(h, double(k - j));
        }
    }
    return R;
}

}  // namespace detail

/// Transform normally-ordered factorial moments to ordering s (per-arm modes).
inline MomentVector transform_moments(const MomentVector& mv, double s, double modes_s,
                                      double modes_i) {
    detail::check_kernel_args(0, 0, s, modes_s);
    detail::check_kernel_args(0, 0, s, modes_i);
    if (mv.ordering != 1.0)
        throw ValidationError("moment transform is defined from normal ordering");
    MomentVector out;
    out.max_order = mv.max_order;
    out.ordering = s;
    out.v.assign(std::size_t(mv.max_order + 1) * (mv.max_order + 1), 0.0);
    auto Rs = detail::moment_transform_rows(mv.max_order, s, modes_s);
    auto Ri = detail::moment_transform_rows(mv.max_order, s, modes_i);
    for (int k = 0; k <= mv.max_order; ++k)
        for (int l = 0; l <= mv.max_order; ++l) {
            double acc = 0.0;
            for (int j = 0; j <= k; ++j)
                for (int j2 = 0; j2 <= l; ++j2)
                    acc += Rs[std::size_t(k)][std::size_t(j)] *
                           Ri[std::size_t(l)][std::size_t(j2)] * mv.at(j, j2);
            out.slot(k, l) = acc;
        }
    return out;
}

inline MomentVector transform_moments(const MomentVector& mv, double s, double modes) {
    return transform_moments(mv, s, modes, modes);
}

/// Mandel-Rice photocount weight of an M-mode chaotic field with nu photons
/// per mode, evaluated in log space.
inline double mandel_rice(int n, double nu, double modes) {
    if (n < 0) throw InvalidIndices("photocount must be nonnegative");
    if (nu < 0.0) throw ValidationError("mean photon number per mode must be nonnegative");
    if (!(modes > 0.0)) throw ValidationError("mode number must be positive");
    if (nu == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(std::lgamma(n + modes) - std::lgamma(n + 1.0) - std::lgamma(modes) +
                    n * std::log(nu) - (n + modes) * std::log1p(nu));
}

/// Mandel-Rice band truncated once the missing tail mass drops below tail_tol.
inline std::vector<double> mandel_rice_band(double nu, double modes,
                                            double tail_tol = 1e-12) {
    if (nu == 0.0) return {1.0};
    std::vector<double> band;
    double cum = 0.0;
    double mean = modes * nu;
    for (int n = 0;; ++n) {
        if (n > 10000000) throw Error("noise band failed to close");
        double p = mandel_rice(n, nu, modes);
        band.push_back(p);
        cum += p;
        if (cum >= 1.0 - tail_tol && double(n) >= mean) break;
    }
    return band;
}

/// Superpose independent M-mode chaotic noise with nu photons per mode on each
/// arm (photocount convolution with the Mandel-Rice band).
inline JointPMF apply_noise(const JointPMF& pmf, double nu, double modes) {
    if (nu < 0.0) throw ValidationError("mean photon number per mode must be nonnegative");
    if (!(modes > 0.0)) throw ValidationError("mode number must be positive");
    if (nu == 0.0) return pmf;
    std::vector<double> band = mandel_rice_band(nu, modes);
    return convolve(pmf, band, band);
}

}  // namespace qnc
