#pragma once

// Criterion engine: every nonclassicality witness is built symbolically as a
// polynomial in joint factorial moments <W_s^a W_i^b>, then reduced to a
// canonical polynomial in probability cells p(a,b):
//   1. each moment factor maps to the vacuum-normalized cell moment
//      a! b! p(a,b) / p(0,0),
//   2. terms are homogenized with powers of p(0,0),
//   3. like monomials are combined, the shared vacuum power is stripped, and
//      the rational content is divided out (sign preserved).
// Both forms witness nonclassicality by a negative value; they differ by the
// positive factor content / p(0,0)^p00_excess.
//
// Evaluation sums per-term products in ascending order, which makes values of
// symmetric criteria exactly transpose-invariant and runs reproducible.

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "errors.hpp"
#include "kernels.hpp"
#include "pmf.hpp"

namespace qnc {

using bigint = boost::multiprecision::mpz_int;

namespace detail {

inline bigint binom_z(int n, int k) {
    if (k < 0 || k > n) return 0;
    bigint r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

inline rational factorial_q(int n) {
    bigint f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return rational(f);
}

inline std::string power_group(const char* sym,
                               const std::vector<std::pair<int, int>>& factors) {
    std::string out;
    std::size_t i = 0;
    while (i < factors.size()) {
        std::size_t j = i;
        while (j < factors.size() && factors[j] == factors[i]) ++j;
        if (!out.empty()) out += ' ';
        out += sym;
        out += '(' + std::to_string(factors[i].first) + ',' +
               std::to_string(factors[i].second) + ')';
        if (j - i > 1) out += '^' + std::to_string(j - i);
        i = j;
    }
    return out;
}

inline std::string coeff_string(const rational& c) {
    bigint num = boost::multiprecision::numerator(c);
    bigint den = boost::multiprecision::denominator(c);
    std::string s = boost::multiprecision::abs(num).convert_to<std::string>();
    if (den != 1) s += '/' + den.convert_to<std::string>();
    return s;
}

template <class Term>
inline std::string poly_string(const std::vector<Term>& terms, const char* sym,
                               const std::vector<std::pair<int, int>>& (*f)(const Term&)) {
    if (terms.empty()) return "0";
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const rational& c = terms[i].coeff;
        bool neg = c < 0;
        if (i == 0)
            out += neg ? "-" : "";
        else
            out += neg ? " - " : " + ";
        const auto& factors = f(terms[i]);
        std::string mag = coeff_string(c);
        if (mag != "1" || factors.empty()) {
            out += mag;
            if (!factors.empty()) out += ' ';
        }
        out += power_group(sym, factors);
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Moment polynomials

struct MomTerm {
    rational coeff;
    std::vector<std::pair<int, int>> factors;  ///< product of <W_s^a W_i^b>
    double coeff_d = 0.0;
};

inline bool operator==(const MomTerm& x, const MomTerm& y) {
    return x.coeff == y.coeff && x.factors == y.factors;
}

struct MomPoly {
    std::vector<MomTerm> terms;

    void add_term(rational c, std::vector<std::pair<int, int>> factors) {
        MomTerm t;
        t.coeff = std::move(c);
        t.factors = std::move(factors);
        terms.push_back(std::move(t));
    }

    /// Sort factors, drop unit factors <W^0 W^0>, combine like terms, drop
    /// zeros, order terms lexicographically.
    void canonicalize() {
        for (auto& t : terms) {
            t.factors.erase(std::remove(t.factors.begin(), t.factors.end(),
                                        std::pair<int, int>{0, 0}),
                            t.factors.end());
            std::sort(t.factors.begin(), t.factors.end());
        }
        std::sort(terms.begin(), terms.end(),
                  [](const MomTerm& a, const MomTerm& b) { return a.factors < b.factors; });
        std::vector<MomTerm> out;
        for (auto& t : terms) {
            if (!out.empty() && out.back().factors == t.factors)
                out.back().coeff += t.coeff;
            else
                out.push_back(std::move(t));
        }
        terms.clear();
        for (auto& t : out)
            if (t.coeff != 0) {
                t.coeff_d = t.coeff.convert_to<double>();
                terms.push_back(std::move(t));
            }
    }

    MomPoly transposed() const {
        MomPoly p;
        p.terms = terms;
        for (auto& t : p.terms)
            for (auto& f : t.factors) std::swap(f.first, f.second);
        p.canonicalize();
        return p;
    }

    int max_order() const {
        int m = 0;
        for (const auto& t : terms)
            for (const auto& f : t.factors) m = std::max({m, f.first, f.second});
        return m;
    }

    double eval(const MomentVector& mv) const {
        std::vector<double> vals;
        vals.reserve(terms.size());
        for (const auto& t : terms) {
            double v = t.coeff_d;
            for (const auto& f : t.factors) v *= mv.at(f.first, f.second);
            vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end());
        double acc = 0.0;
        for (double v : vals) acc += v;
        return acc;
    }

    std::string to_string() const {
        return detail::poly_string<MomTerm>(
            terms, "m", +[](const MomTerm& t) -> const std::vector<std::pair<int, int>>& {
                return t.factors;
            });
    }
};

inline bool operator==(const MomPoly& x, const MomPoly& y) { return x.terms == y.terms; }

// ---------------------------------------------------------------------------
// Probability polynomials

struct ProbTerm {
    rational coeff;
    std::vector<std::pair<int, int>> cells;  ///< product of p(a,b)
    double coeff_d = 0.0;
};

inline bool operator==(const ProbTerm& x, const ProbTerm& y) {
    return x.coeff == y.coeff && x.cells == y.cells;
}

struct ProbPoly {
    std::vector<ProbTerm> terms;

    void sort_and_combine() {
        for (auto& t : terms) std::sort(t.cells.begin(), t.cells.end());
        std::sort(terms.begin(), terms.end(),
                  [](const ProbTerm& a, const ProbTerm& b) { return a.cells < b.cells; });
        std::vector<ProbTerm> out;
        for (auto& t : terms) {
            if (!out.empty() && out.back().cells == t.cells)
                out.back().coeff += t.coeff;
            else
                out.push_back(std::move(t));
        }
        terms.clear();
        for (auto& t : out)
            if (t.coeff != 0) {
                t.coeff_d = t.coeff.convert_to<double>();
                terms.push_back(std::move(t));
            }
    }

    template <class F>
    double eval_cells(F&& cell) const {
        std::vector<double> vals;
        vals.reserve(terms.size());
        for (const auto& t : terms) {
            double v = t.coeff_d;
            for (const auto& c : t.cells) v *= cell(c.first, c.second);
            vals.push_back(v);
        }
        std::sort(vals.begin(), vals.end());
        double acc = 0.0;
        for (double v : vals) acc += v;
        return acc;
    }

    double eval(const JointPMF& pmf) const {
        return eval_cells([&](int a, int b) { return pmf.at(a, b); });
    }

    double eval(const SignedTable& t) const {
        return eval_cells([&](int a, int b) { return t.at(a, b); });
    }

    std::vector<std::pair<int, int>> distinct_cells() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& t : terms)
            for (const auto& c : t.cells) out.push_back(c);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    std::string to_string() const {
        return detail::poly_string<ProbTerm>(
            terms, "p", +[](const ProbTerm& t) -> const std::vector<std::pair<int, int>>& {
                return t.cells;
            });
    }
};

inline bool operator==(const ProbPoly& x, const ProbPoly& y) { return x.terms == y.terms; }

namespace detail {

/// gcd of numerators over lcm of denominators: dividing by it leaves coprime
/// integer coefficients with signs intact.
inline rational content_of(const std::vector<const ProbPoly*>& polys) {
    bigint num_gcd = 0, den_lcm = 1;
    for (const ProbPoly* p : polys)
        for (const auto& t : p->terms) {
            num_gcd = boost::multiprecision::gcd(
                num_gcd, bigint(boost::multiprecision::abs(
                             boost::multiprecision::numerator(t.coeff))));
            den_lcm = boost::multiprecision::lcm(
                den_lcm, bigint(boost::multiprecision::denominator(t.coeff)));
        }
    if (num_gcd == 0) return rational(1);
    return rational(num_gcd) / rational(den_lcm);
}

}  // namespace detail

/// Canonicalize a hand-written homogeneous probability polynomial with the
/// same reduction the engine applies (combine, strip the shared vacuum power,
/// divide out the content).
inline ProbPoly canonicalize_literal(std::vector<ProbTerm> ts) {
    ProbPoly p;
    p.terms = std::move(ts);
    p.sort_and_combine();
    int g = INT_MAX;
    for (const auto& t : p.terms)
        g = std::min(g, int(std::count(t.cells.begin(), t.cells.end(),
                                       std::pair<int, int>{0, 0})));
    if (g == INT_MAX) g = 0;
    for (auto& t : p.terms)
        for (int r = 0; r < g; ++r)
            t.cells.erase(std::find(t.cells.begin(), t.cells.end(),
                                    std::pair<int, int>{0, 0}));
    rational content = detail::content_of({&p});
    for (auto& t : p.terms) {
        t.coeff /= content;
        t.coeff_d = t.coeff.convert_to<double>();
    }
    p.sort_and_combine();
    return p;
}

// ---------------------------------------------------------------------------
// Criterion: one or more branches sharing a canonical scale; the criterion
// value is the branch minimum (single-branch for most families).

struct Criterion {
    std::string label;
    std::vector<std::string> branch_tags;
    std::vector<MomPoly> mom;
    std::vector<ProbPoly> prob;
    rational content = rational(1);
    int p00_excess = 0;
    int max_order = 0;

    std::vector<std::pair<int, int>> required_cells() const {
        std::vector<std::pair<int, int>> out;
        for (const auto& b : prob) {
            auto c = b.distinct_cells();
            out.insert(out.end(), c.begin(), c.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

namespace detail {

inline Criterion finalize_criterion(std::string label,
                                    std::vector<std::string> tags,
                                    std::vector<MomPoly> branches) {
    Criterion c;
    c.label = std::move(label);
    c.branch_tags = std::move(tags);
    for (auto& b : branches) b.canonicalize();
    int fmax = 0;
    for (const auto& b : branches)
        for (const auto& t : b.terms) fmax = std::max(fmax, int(t.factors.size()));
    for (const auto& b : branches) c.max_order = std::max(c.max_order, b.max_order());
    for (auto& b : branches) {
        ProbPoly p;
        for (const auto& t : b.terms) {
            ProbTerm pt;
            pt.coeff = t.coeff;
            for (const auto& f : t.factors) {
                pt.coeff *= factorial_q(f.first) * factorial_q(f.second);
                pt.cells.push_back(f);
            }
            for (int pad = int(t.factors.size()); pad < fmax; ++pad)
                pt.cells.emplace_back(0, 0);
            p.terms.push_back(std::move(pt));
        }
        p.sort_and_combine();
        c.prob.push_back(std::move(p));
        c.mom.push_back(std::move(b));
    }
    int g = INT_MAX;
    for (const auto& p : c.prob)
        for (const auto& t : p.terms)
            g = std::min(g, int(std::count(t.cells.begin(), t.cells.end(),
                                           std::pair<int, int>{0, 0})));
    if (g == INT_MAX) g = 0;
    std::vector<const ProbPoly*> ptrs;
    for (const auto& p : c.prob) ptrs.push_back(&p);
    rational content = content_of(ptrs);
    for (auto& p : c.prob) {
        for (auto& t : p.terms) {
            for (int r = 0; r < g; ++r)
                t.cells.erase(std::find(t.cells.begin(), t.cells.end(),
                                        std::pair<int, int>{0, 0}));
            t.coeff /= content;
            t.coeff_d = t.coeff.convert_to<double>();
        }
        p.sort_and_combine();
    }
    c.content = content;
    c.p00_excess = fmax - g;
    return c;
}

inline Criterion finalize_single(std::string label, MomPoly poly) {
    return finalize_criterion(std::move(label), {"-"}, {std::move(poly)});
}

}  // namespace detail

/// Branch-minimum probability-form evaluation; reports the attained branch.
inline double eval_probability(const Criterion& c, const JointPMF& pmf,
                               int* attained = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1;
    for (std::size_t i = 0; i < c.prob.size(); ++i) {
        double v = c.prob[i].eval(pmf);
        if (v < best) {
            best = v;
            bi = int(i);
        }
    }
    if (attained) *attained = bi;
    return best;
}

/// Branch-minimum moment-form evaluation (true modified-moment scale).
inline double eval_moment(const Criterion& c, const MomentVector& mv,
                          int* attained = nullptr) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1;
    for (std::size_t i = 0; i < c.mom.size(); ++i) {
        double v = c.mom[i].eval(mv);
        if (v < best) {
            best = v;
            bi = int(i);
        }
    }
    if (attained) *attained = bi;
    return best;
}

// ---------------------------------------------------------------------------
// Family builders

namespace detail {

/// <W_s^ks W_i^ki (W_s - W_i)^{2l}>
inline MomPoly e3_poly(int ks, int ki, int l) {
    MomPoly p;
    for (int j = 0; j <= 2 * l; ++j) {
        rational c = rational(binom_z(2 * l, j));
        if (j & 1) c = -c;
        p.add_term(c, {{ks + 2 * l - j, ki + j}});
    }
    p.canonicalize();
    return p;
}

/// <W_s^ks W_i^ki (W_s - <W_s>)^{2ls} (W_i - <W_i>)^{2li}>
inline MomPoly e4_poly(int ks, int ki, int ls, int li) {
    MomPoly p;
    for (int u = 0; u <= 2 * ls; ++u)
        for (int v = 0; v <= 2 * li; ++v) {
            rational c = rational(binom_z(2 * ls, u) * binom_z(2 * li, v));
            if ((u + v) & 1) c = -c;  // (-1)^{(2ls-u)+(2li-v)}
            std::vector<std::pair<int, int>> f{{ks + u, ki + v}};
            f.insert(f.end(), std::size_t(2 * ls - u), {1, 0});
            f.insert(f.end(), std::size_t(2 * li - v), {0, 1});
            p.add_term(c, std::move(f));
        }
    p.canonicalize();
    return p;
}

/// f(k,l,m) of the three-variable majorization family, signal-arm weights:
/// cyclic sum of (<W_s^k W_i^l> + <W_s^l W_i^k>) <W_s^m>.
inline MomPoly d3_f(std::array<int, 3> t) {
    MomPoly p;
    const std::array<std::array<int, 3>, 3> rot{{{t[0], t[1], t[2]},
                                                 {t[2], t[0], t[1]},
                                                 {t[1], t[2], t[0]}}};
    for (const auto& r : rot) {
        p.add_term(rational(1), {{r[0], r[1]}, {r[2], 0}});
        p.add_term(rational(1), {{r[1], r[0]}, {r[2], 0}});
    }
    return p;
}

/// f(k,l,m,n) of the four-variable family: sum over the three pairings of
/// sym(a,b) sym(c,d) with sym(a,b) = <W_s^a W_i^b> + <W_s^b W_i^a>.
inline MomPoly d4_f(std::array<int, 4> t) {
    MomPoly p;
    const std::array<std::array<int, 4>, 3> pairing{{{t[0], t[1], t[2], t[3]},
                                                     {t[0], t[2], t[1], t[3]},
                                                     {t[0], t[3], t[1], t[2]}}};
    for (const auto& q : pairing)
        for (int o1 = 0; o1 < 2; ++o1)
            for (int o2 = 0; o2 < 2; ++o2) {
                std::pair<int, int> f1 = o1 ? std::pair<int, int>{q[1], q[0]}
                                            : std::pair<int, int>{q[0], q[1]};
                std::pair<int, int> f2 = o2 ? std::pair<int, int>{q[3], q[2]}
                                            : std::pair<int, int>{q[2], q[3]};
                p.add_term(rational(1), {f1, f2});
            }
    return p;
}

inline void require_nonneg(const std::vector<int>& v, const char* what) {
    for (int x : v)
        if (x < 0) throw InvalidIndices(std::string(what) + ": indices must be nonnegative");
}

/// Strict majorization of index tuples (sorted descending, equal sums,
/// dominating partial sums, not identical).
inline bool majorizes_strict(std::vector<int> a, std::vector<int> b) {
    if (a.size() != b.size()) return false;
    std::sort(a.rbegin(), a.rend());
    std::sort(b.rbegin(), b.rend());
    if (a == b) return false;
    long pa = 0, pb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa += a[i];
        pb += b[i];
        if (pa < pb) return false;
    }
    return pa == pb;
}

inline std::string tuple_tag(const std::vector<int>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s + ")";
}

inline Criterion finalize_with_arm(std::string label, std::vector<std::string> tags,
                                   std::vector<MomPoly> branches, Arm arm) {
    if (arm == Arm::idler)
        for (auto& b : branches) b = b.transposed();
    return finalize_criterion(std::move(label), std::move(tags), std::move(branches));
}

}  // namespace detail

/// Intensity-difference criterion <W_s^ks W_i^ki (W_s - W_i)^{2l}>, indexed by
/// the moment powers.
inline Criterion criterion_E3(int ks, int ki, int l) {
    if (ks < 0 || ki < 0 || l < 1)
        throw InvalidIndices("difference family needs ks,ki >= 0 and l >= 1");
    return detail::finalize_single(
        "E:" + std::to_string(ks) + ',' + std::to_string(ki) + ',' + std::to_string(l),
        detail::e3_poly(ks, ki, l));
}

/// Same criterion labeled by the centered cell indices (ns, ni) >= l.
inline Criterion criterion_E3_centered(int ns, int ni, int l) {
    if (l < 1 || ns < l || ni < l)
        throw InvalidIndices("centered difference labels need ns,ni >= l >= 1");
    Criterion c = criterion_E3(ns - l, ni - l, l);
    c.label = "Ec:" + std::to_string(ns) + ',' + std::to_string(ni) + ',' + std::to_string(l);
    return c;
}

/// Central-moment criterion <W_s^ks W_i^ki (W_s - <W_s>)^{2ls} (W_i - <W_i>)^{2li}>.
/// The idler arm swaps the roles of the two arms throughout.
inline Criterion criterion_E4(int ks, int ki, int ls, int li, Arm arm = Arm::signal) {
    if (ks < 0 || ki < 0 || ls < 0 || li < 0 || ls + li < 1)
        throw InvalidIndices("central-moment family needs nonnegative indices, ls+li >= 1");
    std::string label = "E4:" + std::to_string(ks) + ',' + std::to_string(ki) + ',' +
                        std::to_string(ls) + ',' + std::to_string(li) +
                        (arm == Arm::idler ? ":i" : "");
    return detail::finalize_with_arm(std::move(label), {"-"},
                                     {detail::e4_poly(ks, ki, ls, li)}, arm);
}

inline Criterion criterion_E4_centered(int ns, int ni, int ls, int li,
                                       Arm arm = Arm::signal) {
    if (ls < 0 || li < 0 || ls + li < 1 || ns < ls || ni < li)
        throw InvalidIndices("centered labels need ns >= ls, ni >= li, ls+li >= 1");
    Criterion c = criterion_E4(ns - ls, ni - li, ls, li, arm);
    c.label = "E4c:" + std::to_string(ns) + ',' + std::to_string(ni) + ',' +
              std::to_string(ls) + ',' + std::to_string(li) + (arm == Arm::idler ? ":i" : "");
    return c;
}

/// Cauchy-Schwarz criterion <W^L><W^{2N-L}> - <W^N>^2 (componentwise indices).
inline Criterion criterion_CS(int Ns, int Ni, int Ls, int Li) {
    if (Ns < 0 || Ni < 0 || Ls < 0 || Li < 0)
        throw InvalidIndices("Cauchy-Schwarz indices must be nonnegative");
    if (Ls > 2 * Ns || Li > 2 * Ni)
        throw InvalidIndices("Cauchy-Schwarz needs L <= 2N componentwise");
    if (Ls == Ns && Li == Ni)
        throw InvalidIndices("Cauchy-Schwarz with L = N is identically zero");
    MomPoly p;
    p.add_term(rational(1), {{Ls, Li}, {2 * Ns - Ls, 2 * Ni - Li}});
    p.add_term(rational(-1), {{Ns, Ni}, {Ns, Ni}});
    return detail::finalize_single("CS:N=" + std::to_string(Ns) + ',' + std::to_string(Ni) +
                                       ";L=" + std::to_string(Ls) + ',' + std::to_string(Li),
                                   std::move(p));
}

/// 2x2 moment-matrix determinant; an instance of the Cauchy-Schwarz family.
inline Criterion criterion_M2(int Ls, int Li, int Ns, int Ni) {
    if (Ls < 0 || Li < 0 || Ns < 0 || Ni < 0)
        throw InvalidIndices("matrix indices must be nonnegative");
    if (Ls == Ns && Li == Ni)
        throw InvalidIndices("matrix criterion needs distinct index pairs");
    Criterion c = criterion_CS(Ls + Ns, Li + Ni, 2 * Ls, 2 * Li);
    c.label = "M2:L=" + std::to_string(Ls) + ',' + std::to_string(Li) +
              ";N=" + std::to_string(Ns) + ',' + std::to_string(Ni);
    return c;
}

/// 3x3 moment-matrix determinant with row/column index pairs K, L, N.
inline Criterion criterion_M3(std::pair<int, int> K, std::pair<int, int> L,
                              std::pair<int, int> N) {
    for (auto& q : {K, L, N})
        if (q.first < 0 || q.second < 0)
            throw InvalidIndices("matrix indices must be nonnegative");
    if (K == L || K == N || L == N)
        throw InvalidIndices("matrix criterion needs distinct index pairs");
    auto plus = [](std::pair<int, int> a, std::pair<int, int> b) {
        return std::pair<int, int>{a.first + b.first, a.second + b.second};
    };
    const std::array<std::pair<int, int>, 3> R{K, L, N};
    auto e = [&](int i, int j) { return plus(R[std::size_t(i)], R[std::size_t(j)]); };
    MomPoly p;
    const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    for (int i = 0; i < 6; ++i)
        p.add_term(rational(i < 3 ? 1 : -1),
                   {e(0, perm[i][0]), e(1, perm[i][1]), e(2, perm[i][2])});
    return detail::finalize_single("M3:K=" + std::to_string(K.first) + ',' +
                                       std::to_string(K.second) + ";L=" +
                                       std::to_string(L.first) + ',' +
                                       std::to_string(L.second) + ";N=" +
                                       std::to_string(N.first) + ',' +
                                       std::to_string(N.second),
                                   std::move(p));
}

/// Three-variable majorization criterion f(hi) - f(lo) for hi majorizing lo.
inline Criterion criterion_D3(std::array<int, 3> hi, std::array<int, 3> lo,
                              Arm arm = Arm::signal) {
    std::vector<int> vh(hi.begin(), hi.end()), vl(lo.begin(), lo.end());
    detail::require_nonneg(vh, "majorization family");
    detail::require_nonneg(vl, "majorization family");
    if (!detail::majorizes_strict(vh, vl))
        throw InvalidIndices("first index triple must strictly majorize the second");
    std::sort(hi.rbegin(), hi.rend());
    std::sort(lo.rbegin(), lo.rend());
    MomPoly p = detail::d3_f(hi);
    MomPoly q = detail::d3_f(lo);
    for (auto& t : q.terms) p.add_term(-t.coeff, t.factors);
    std::string label = "D3:" + detail::tuple_tag(std::vector<int>(hi.begin(), hi.end())) +
                        "/" + detail::tuple_tag(std::vector<int>(lo.begin(), lo.end())) +
                        (arm == Arm::idler ? ":i" : "");
    return detail::finalize_with_arm(std::move(label), {"-"}, {std::move(p)}, arm);
}

/// Four-variable majorization criterion (arm-independent).
inline Criterion criterion_D4(std::array<int, 4> hi, std::array<int, 4> lo) {
    std::vector<int> vh(hi.begin(), hi.end()), vl(lo.begin(), lo.end());
    detail::require_nonneg(vh, "majorization family");
    detail::require_nonneg(vl, "majorization family");
    if (!detail::majorizes_strict(vh, vl))
        throw InvalidIndices("first index quadruple must strictly majorize the second");
    std::sort(hi.rbegin(), hi.rend());
    std::sort(lo.rbegin(), lo.rend());
    MomPoly p = detail::d4_f(hi);
    MomPoly q = detail::d4_f(lo);
    for (auto& t : q.terms) p.add_term(-t.coeff, t.factors);
    std::string label = "D4:" + detail::tuple_tag(std::vector<int>(hi.begin(), hi.end())) +
                        "/" + detail::tuple_tag(std::vector<int>(lo.begin(), lo.end()));
    return detail::finalize_single(std::move(label), std::move(p));
}

/// First parametric system: (k+m, k, l-m) against (k, k, l), k >= l >= m >= 1.
inline Criterion criterion_Dsys1(int k, int l, int m, Arm arm = Arm::signal) {
    if (!(k >= l && l >= m && m >= 1))
        throw InvalidIndices("first index system needs k >= l >= m >= 1");
    Criterion c = criterion_D3({k + m, k, l - m}, {k, k, l}, arm);
    c.label = "D3sys1:" + std::to_string(k) + ',' + std::to_string(l) + ',' +
              std::to_string(m) + (arm == Arm::idler ? ":i" : "");
    return c;
}

/// Second parametric system: (k+m, k-m, l) against (k, k, l), k-m >= l, k,m >= 1.
inline Criterion criterion_Dsys2(int k, int l, int m, Arm arm = Arm::signal) {
    if (!(k >= 1 && m >= 1 && l >= 0 && k - m >= l))
        throw InvalidIndices("second index system needs k,m >= 1 and k-m >= l >= 0");
    Criterion c = criterion_D3({k + m, k - m, l}, {k, k, l}, arm);
    c.label = "D3sys2:" + std::to_string(k) + ',' + std::to_string(l) + ',' +
              std::to_string(m) + (arm == Arm::idler ? ":i" : "");
    return c;
}

/// Third parametric system (quadruples): (k+m, k, l, l-m) against (k, k, l, l).
inline Criterion criterion_Dsys3(int k, int l, int m) {
    if (!(k >= l && l >= m && m >= 1))
        throw InvalidIndices("third index system needs k >= l >= m >= 1");
    Criterion c = criterion_D4({k + m, k, l, l - m}, {k, k, l, l});
    c.label = "Dsys3:" + std::to_string(k) + ',' + std::to_string(l) + ',' +
              std::to_string(m);
    return c;
}

/// Minimal-dominating search around a sorted base triple: the criterion value
/// is the minimum of f(c) - f(base) over the nearest strictly dominating
/// neighbors c; inadmissible neighbors are excluded, not clamped.
inline Criterion criterion_D3_minball(int k, int l, int m, Arm arm = Arm::signal) {
    if (!(k >= l && l >= m && m >= 1))
        throw InvalidIndices("minimal-dominating base needs k >= l >= m >= 1");
    std::vector<std::array<int, 3>> cands;
    if (l - 1 >= m) cands.push_back({k + 1, l - 1, m});
    cands.push_back({k + 1, l, m - 1});
    if (k >= l + 1) cands.push_back({k, l + 1, m - 1});
    std::vector<std::string> tags;
    std::vector<MomPoly> branches;
    MomPoly base = detail::d3_f({k, l, m});
    for (const auto& c : cands) {
        MomPoly p = detail::d3_f(c);
        for (auto& t : base.terms) p.add_term(-t.coeff, t.factors);
        tags.push_back(detail::tuple_tag(std::vector<int>(c.begin(), c.end())));
        branches.push_back(std::move(p));
    }
    std::string label = "DB3:" + std::to_string(k) + ',' + std::to_string(l) + ',' +
                        std::to_string(m) + (arm == Arm::idler ? ":i" : "");
    return detail::finalize_with_arm(std::move(label), std::move(tags), std::move(branches),
                                     arm);
}

/// Minimal-dominating search around a sorted base quadruple.
inline Criterion criterion_D4_minball(int k, int l, int m, int n) {
    if (!(k >= l && l >= m && m >= n && n >= 1))
        throw InvalidIndices("minimal-dominating base needs k >= l >= m >= n >= 1");
    std::vector<std::array<int, 4>> cands;
    cands.push_back({k + 1, l, m, n - 1});
    if (m - 1 >= n) cands.push_back({k + 1, l, m - 1, n});
    if (l - 1 >= m) cands.push_back({k + 1, l - 1, m, n});
    if (k >= l + 1) cands.push_back({k, l + 1, m, n - 1});
    if (k >= l + 1 && m - 1 >= n) cands.push_back({k, l + 1, m - 1, n});
    if (l >= m + 1) cands.push_back({k, l, m + 1, n - 1});
    std::vector<std::string> tags;
    std::vector<MomPoly> branches;
    MomPoly base = detail::d4_f({k, l, m, n});
    for (const auto& c : cands) {
        MomPoly p = detail::d4_f(c);
        for (auto& t : base.terms) p.add_term(-t.coeff, t.factors);
        tags.push_back(detail::tuple_tag(std::vector<int>(c.begin(), c.end())));
        branches.push_back(std::move(p));
    }
    std::string label = "DB4:" + std::to_string(k) + ',' + std::to_string(l) + ',' +
                        std::to_string(m) + ',' + std::to_string(n);
    return detail::finalize_criterion(std::move(label), std::move(tags), std::move(branches));
}

/// Paired-power criterion with symmetrized moments g(a,b) = m(a,b) + m(b,a):
///   g(k+m,l+n) + s g(k+m,0) g(l+n,0)
///   - g(m,n) m(1,1)^s - s g(m,1) g(n,1) m(1,1)^{s-1},   s = (k+l)/2.
inline Criterion criterion_Dmn(int k, int l, int m, int n) {
    if (k < 0 || l < 0 || n < 1 || m < n)
        throw InvalidIndices("paired-power family needs k,l >= 0 and m >= n >= 1");
    if ((k + l) % 2 != 0 || k + l < 2)
        throw InvalidIndices("paired-power family needs k+l even and >= 2");
    const int sig = (k + l) / 2;
    MomPoly p;
    auto add_g = [&](int a, int b, rational c, std::vector<std::pair<int, int>> extra) {
        std::vector<std::pair<int, int>> f1 = extra, f2 = std::move(extra);
        f1.emplace_back(a, b);
        f2.emplace_back(b, a);
        p.add_term(c, std::move(f1));
        p.add_term(c, std::move(f2));
    };
    add_g(k + m, l + n, rational(1), {});
    // s * g(k+m,0) g(l+n,0): expand both symmetrizations
    for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2)
            p.add_term(rational(sig),
                       {o1 ? std::pair<int, int>{0, k + m} : std::pair<int, int>{k + m, 0},
                        o2 ? std::pair<int, int>{0, l + n} : std::pair<int, int>{l + n, 0}});
    std::vector<std::pair<int, int>> bracket(std::size_t(sig), {1, 1});
    add_g(m, n, rational(-1), bracket);
    std::vector<std::pair<int, int>> bracket1(std::size_t(sig - 1), {1, 1});
    for (int o1 = 0; o1 < 2; ++o1)
        for (int o2 = 0; o2 < 2; ++o2) {
            std::vector<std::pair<int, int>> f = bracket1;
            f.push_back(o1 ? std::pair<int, int>{1, m} : std::pair<int, int>{m, 1});
            f.push_back(o2 ? std::pair<int, int>{1, n} : std::pair<int, int>{n, 1});
            p.add_term(rational(-sig), std::move(f));
        }
    return detail::finalize_single("Dmn:" + std::to_string(k) + ',' + std::to_string(l) +
                                       ',' + std::to_string(m) + ',' + std::to_string(n),
                                   std::move(p));
}

// ---------------------------------------------------------------------------
// Majorization ladder identity

namespace detail {

inline void check_ladder_indices(int k, int l, int m) {
    if (!(k >= l && l >= 1 && m >= 1 && m <= l))
        throw InvalidIndices("ladder identity needs k >= l >= m >= 1");
}

inline MomPoly ladder_lhs(int k, int l, int m) {
    MomPoly p;
    p.add_term(rational(1), {{k + m, l - m}});
    p.add_term(rational(1), {{l - m, k + m}});
    p.add_term(rational(-1), {{k, l}});
    p.add_term(rational(-1), {{l, k}});
    p.canonicalize();
    return p;
}

inline MomPoly ladder_rhs(int k, int l, int m) {
    MomPoly p;
    for (int x = l - m + 1; x <= k + m - 1; ++x) {
        int c = std::min({m, k + m - x, x - l + m});
        MomPoly e = e3_poly(x - 1, k + l - x - 1, 1);
        for (auto& t : e.terms) p.add_term(t.coeff * c, t.factors);
    }
    p.canonicalize();
    return p;
}

}  // namespace detail

/// Symbolic defect of the ladder identity relating symmetrized moment pairs to
/// a weighted sum of second-order difference criteria; empty when it cancels.
inline MomPoly majorization_identity_defect(int k, int l, int m) {
    detail::check_ladder_indices(k, l, m);
    MomPoly p = detail::ladder_lhs(k, l, m);
    MomPoly r = detail::ladder_rhs(k, l, m);
    for (auto& t : r.terms) p.add_term(-t.coeff, t.factors);
    p.canonicalize();
    return p;
}

/// Numeric residual |lhs - rhs| of the ladder identity on a distribution.
inline double majorization_identity_residual(const JointPMF& pmf, int k, int l, int m) {
    detail::check_ladder_indices(k, l, m);
    MomentVector mv = moments_of(pmf, k + m);
    double lhs = detail::ladder_lhs(k, l, m).eval(mv);
    double rhs = detail::ladder_rhs(k, l, m).eval(mv);
    return std::abs(lhs - rhs);
}

}  // namespace qnc
