#pragma once

// Scan drivers: depth maps over whole criterion families on one field.
//
//   scan_grid       — tau map of a two-index family over its index grid
//   scan_touching   — per cell, the best Cauchy-Schwarz criterion whose index
//                     set touches that cell
//   scan_local      — per cell, the best 3x3 determinant criterion whose
//                     index pairs stay within a locality radius of the cell
//   scan_index_sum  — best minimal-dominating tuple per total index order
//   bootstrap_errors — multinomial resampling error bars for raw counts
//
// One ordering evaluator is shared across every criterion and bisection step
// of a scan (kernel rows dominate the cost), and results are memoized per
// criterion label, so identical criteria reached through different scan cells
// are computed once.  Cells whose indices violate the family constraints are
// left absent from the map — distinct from present cells with tau = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "criteria.hpp"
#include "io.hpp"
#include "parse.hpp"
#include "pmf.hpp"
#include "quantifiers.hpp"

namespace qnc {

enum class ScanScenario { grid, touching, local, index_sum };
enum class GridFamily { ec_l1, ec_l2, sys2_m1, sys3_m1 };
enum class MinBallFamily { triples, quadruples };

/// Inclusive index rectangle for two-index scans.
struct GridRange {
    int a_lo = 0, a_hi = 0, b_lo = 0, b_hi = 0;
};

struct ScanReport {
    ScanScenario scenario = ScanScenario::grid;
    std::string family;
    std::map<std::vector<int>, NCResult> grid;
    NCResult max_result;  ///< the grid entry with the largest depth
    std::map<std::vector<int>, double> errors;  ///< optional bootstrap errors
};

namespace detail {

inline void check_range(const GridRange& r) {
    if (r.a_lo < 0 || r.b_lo < 0 || r.a_lo > r.a_hi || r.b_lo > r.b_hi)
        throw ValidationError("scan range must satisfy 0 <= lo <= hi per axis");
}

/// Shared kernel cache + per-label memo for one scan over one field.
class ScanRunner {
public:
    ScanRunner(const JointPMF& pmf, double modes, double eps_stat)
        : ev_(pmf, modes), eps_(eps_stat) {}

    const NCResult& depth(const Criterion& c) {
        auto it = memo_.find(c.label);
        if (it == memo_.end()) it = memo_.emplace(c.label, ncd(c, ev_, eps_)).first;
        return it->second;
    }

private:
    OrderingEvaluator ev_;
    double eps_;
    std::map<std::string, NCResult> memo_;
};

inline void set_max(ScanReport& r) {
    bool first = true;
    for (const auto& [key, res] : r.grid)
        if (first || res.tau.value_or(0.0) > r.max_result.tau.value_or(0.0)) {
            r.max_result = res;
            first = false;
        }
}

}  // namespace detail

/// Depth map of a two-index criterion family; map keys are {a, b} with a, b
/// the cell indices (difference windows) or system orders (parametric grids).
/// Arm-sensitive families report the better of the two arm assignments per
/// cell (ties keep the signal arm), so the map is invariant under signal/idler
/// exchange of the field.
inline ScanReport scan_grid(GridFamily family, const JointPMF& pmf, double modes,
                            GridRange range, double eps_stat = 0.0) {
    detail::check_range(range);
    ScanReport rep;
    rep.scenario = ScanScenario::grid;
    switch (family) {
        case GridFamily::ec_l1: rep.family = "Ec1"; break;
        case GridFamily::ec_l2: rep.family = "Ec2"; break;
        case GridFamily::sys2_m1: rep.family = "D3sys2"; break;
        case GridFamily::sys3_m1: rep.family = "Dsys3"; break;
    }
    detail::ScanRunner run(pmf, modes, eps_stat);
    for (int a = range.a_lo; a <= range.a_hi; ++a)
        for (int b = range.b_lo; b <= range.b_hi; ++b) {
            std::vector<Criterion> cs;
            switch (family) {
                case GridFamily::ec_l1:
                    if (a >= 1 && b >= 1) cs.push_back(criterion_E3_centered(a, b, 1));
                    break;
                case GridFamily::ec_l2:
                    if (a >= 2 && b >= 2) cs.push_back(criterion_E3_centered(a, b, 2));
                    break;
                case GridFamily::sys2_m1:
                    if (a >= 1 && b >= 0 && a - 1 >= b) {
                        cs.push_back(criterion_Dsys2(a, b, 1, Arm::signal));
                        cs.push_back(criterion_Dsys2(a, b, 1, Arm::idler));
                    }
                    break;
                case GridFamily::sys3_m1:
                    if (a >= b && b >= 1) cs.push_back(criterion_Dsys3(a, b, 1));
                    break;
            }
            std::optional<NCResult> best;
            for (const Criterion& c : cs) {
                const NCResult& res = run.depth(c);
                if (!best || res.tau.value_or(0.0) > best->tau.value_or(0.0)) best = res;
            }
            if (best) rep.grid.emplace(std::vector<int>{a, b}, *best);
        }
    detail::set_max(rep);
    return rep;
}

/// For every cell (n_s, n_i) with indices up to max_index, the best depth over
/// all Cauchy-Schwarz criteria whose index set {L, N, 2N-L} contains the cell.
/// The L <-> 2N-L mirror pair names one criterion; only the lexicographically
/// smaller L is evaluated.
inline ScanReport scan_touching(const JointPMF& pmf, double modes, int max_index,
                                double eps_stat = 0.0) {
    if (max_index < 0) throw ValidationError("index bound must be nonnegative");
    ScanReport rep;
    rep.scenario = ScanScenario::touching;
    rep.family = "CS";
    detail::ScanRunner run(pmf, modes, eps_stat);
    auto update = [&](int x, int y, const NCResult& res) {
        std::vector<int> key{x, y};
        auto it = rep.grid.find(key);
        if (it == rep.grid.end())
            rep.grid.emplace(std::move(key), res);
        else if (res.tau.value_or(0.0) > it->second.tau.value_or(0.0))
            it->second = res;
    };
    for (int Ns = 0; Ns <= max_index; ++Ns)
        for (int Ni = 0; Ni <= max_index; ++Ni)
            for (int Ls = std::max(0, 2 * Ns - max_index); Ls <= std::min(max_index, 2 * Ns);
                 ++Ls)
                for (int Li = std::max(0, 2 * Ni - max_index);
                     Li <= std::min(max_index, 2 * Ni); ++Li) {
                    if (Ls == Ns && Li == Ni) continue;
                    int Ms = 2 * Ns - Ls, Mi = 2 * Ni - Li;
                    if (std::pair<int, int>{Ls, Li} > std::pair<int, int>{Ms, Mi})
                        continue;  // mirror of an already-enumerated criterion
                    const NCResult& res = run.depth(criterion_CS(Ns, Ni, Ls, Li));
                    update(Ls, Li, res);
                    update(Ns, Ni, res);
                    update(Ms, Mi, res);
                }
    detail::set_max(rep);
    return rep;
}

/// For every cell in the range, the best depth over 3x3 determinant criteria
/// whose index pairs all lie within a box of radius d around the cell.
/// Criteria are canonicalized by sorting their index pairs, so the same
/// determinant reached from different cells is evaluated once.
inline ScanReport scan_local(const JointPMF& pmf, double modes, int d, GridRange range,
                             double eps_stat = 0.0) {
    if (d < 0) throw ValidationError("locality radius must be nonnegative");
    detail::check_range(range);
    ScanReport rep;
    rep.scenario = ScanScenario::local;
    rep.family = "M3";
    detail::ScanRunner run(pmf, modes, eps_stat);
    for (int a = range.a_lo; a <= range.a_hi; ++a)
        for (int b = range.b_lo; b <= range.b_hi; ++b) {
            std::vector<std::pair<int, int>> box;
            for (int x = std::max(0, a - d); x <= a + d; ++x)
                for (int y = std::max(0, b - d); y <= b + d; ++y)
                    if (!(x == a && y == b)) box.emplace_back(x, y);
            std::optional<NCResult> best;
            for (std::size_t i = 0; i < box.size(); ++i)
                for (std::size_t j = i + 1; j < box.size(); ++j) {
                    std::array<std::pair<int, int>, 3> t{box[i], box[j],
                                                         std::pair<int, int>{a, b}};
                    std::sort(t.begin(), t.end());
                    const NCResult& res = run.depth(criterion_M3(t[0], t[1], t[2]));
                    if (!best || res.tau.value_or(0.0) > best->tau.value_or(0.0))
                        best = res;
                }
            if (best) rep.grid.emplace(std::vector<int>{a, b}, *best);
        }
    detail::set_max(rep);
    return rep;
}

/// Best minimal-dominating criterion per total index order sigma; the result
/// label records the maximizing tuple. Orders with no admissible tuple are
/// absent. The triple family is arm-sensitive, so both arm assignments enter
/// the per-order maximum (ties keep the signal arm) and the report is
/// invariant under signal/idler exchange of the field.
inline ScanReport scan_index_sum(MinBallFamily family, const JointPMF& pmf, double modes,
                                 int sum_lo, int sum_hi, double eps_stat = 0.0) {
    if (sum_lo > sum_hi) throw ValidationError("index-sum range must satisfy lo <= hi");
    ScanReport rep;
    rep.scenario = ScanScenario::index_sum;
    rep.family = family == MinBallFamily::triples ? "DB3" : "DB4";
    detail::ScanRunner run(pmf, modes, eps_stat);
    for (int sigma = sum_lo; sigma <= sum_hi; ++sigma) {
        std::optional<NCResult> best;
        auto consider = [&](const Criterion& c) {
            const NCResult& res = run.depth(c);
            if (!best || res.tau.value_or(0.0) > best->tau.value_or(0.0)) best = res;
        };
        if (family == MinBallFamily::triples) {
            for (int m = 1; 3 * m <= sigma; ++m)
                for (int l = m; 2 * l <= sigma - m; ++l) {
                    consider(criterion_D3_minball(sigma - l - m, l, m, Arm::signal));
                    consider(criterion_D3_minball(sigma - l - m, l, m, Arm::idler));
                }
        } else {
            for (int n = 1; 4 * n <= sigma; ++n)
                for (int m = n; 3 * m <= sigma - n; ++m)
                    for (int l = m; 2 * l <= sigma - m - n; ++l)
                        consider(criterion_D4_minball(sigma - l - m - n, l, m, n));
        }
        if (best) rep.grid.emplace(std::vector<int>{sigma}, *best);
    }
    detail::set_max(rep);
    return rep;
}

// ---- Bootstrap error bars ---------------------------------------------------

struct BootstrapErrors {
    int resamples = 0;
    double value_stderr = 0.0;
    std::optional<double> tau_stderr;
};

namespace detail {

/// Raw-count validation; rejects normalized input and returns the total.
inline long long checked_counts_total(const RawHistogram& h) {
    if (h.counts.empty() || h.total <= 0.0)
        throw ValidationError("histogram has zero total count");
    auto near_int = [](double x) {
        return std::abs(x - double(std::llround(x))) <= 1e-9 * std::max(1.0, std::abs(x));
    };
    for (const auto& [a, b, c] : h.counts) {
        (void)a;
        (void)b;
        if (c < 0.0) throw ValidationError("negative count");
        if (!near_int(c))
            throw NotCounts("bootstrap needs raw integer counts, not normalized frequencies");
    }
    if (!near_int(h.total))
        throw NotCounts("bootstrap needs raw integer counts, not normalized frequencies");
    return std::llround(h.total);
}

/// One multinomial resample, drawn as sequential binomials.
inline JointPMF resample_pmf(const RawHistogram& h, long long total,
                             std::mt19937_64& rng) {
    std::vector<std::tuple<int, int, double>> cells;
    cells.reserve(h.counts.size());
    double p_left = 1.0;
    long long n_left = total;
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const auto& [a, b, c] = h.counts[i];
        double pi = c / h.total;
        long long ni = 0;
        if (i + 1 == h.counts.size() || pi >= p_left)
            ni = n_left;
        else if (n_left > 0 && pi > 0.0) {
            std::binomial_distribution<long long> bin(n_left, std::min(1.0, pi / p_left));
            ni = bin(rng);
        }
        cells.emplace_back(a, b, double(ni) / double(total));
        p_left -= pi;
        n_left -= ni;
    }
    return JointPMF::from_cells(cells);
}

inline double sample_stddev(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= double(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(v.size() - 1));
}

inline void check_resamples(int R) {
    if (R < 100) throw ValidationError("bootstrap needs at least 100 resamples");
}

}  // namespace detail

/// Standard errors of one criterion's value (and optionally its depth) under
/// multinomial resampling of a raw count histogram.
inline BootstrapErrors bootstrap_errors(const RawHistogram& counts, const Criterion& c,
                                        double modes, int R, std::uint64_t seed,
                                        bool with_tau = false) {
    detail::check_resamples(R);
    long long total = detail::checked_counts_total(counts);
    std::mt19937_64 rng(seed);
    std::vector<double> values, taus;
    values.reserve(std::size_t(R));
    for (int r = 0; r < R; ++r) {
        JointPMF pmf = detail::resample_pmf(counts, total, rng);
        values.push_back(eval_probability(c, pmf));
        if (with_tau) taus.push_back(ncd(c, pmf, modes).tau.value());
    }
    BootstrapErrors out;
    out.resamples = R;
    out.value_stderr = detail::sample_stddev(values);
    if (with_tau) out.tau_stderr = detail::sample_stddev(taus);
    return out;
}

/// Per-cell standard errors of the criterion values behind a scan report;
/// cell criteria are recovered from the report labels.
inline std::map<std::vector<int>, double> bootstrap_errors(const RawHistogram& counts,
                                                           const ScanReport& report,
                                                           int R, std::uint64_t seed) {
    detail::check_resamples(R);
    long long total = detail::checked_counts_total(counts);
    std::map<std::string, Criterion> by_label;
    for (const auto& [key, res] : report.grid)
        if (!by_label.count(res.label)) by_label.emplace(res.label, parse_criterion(res.label));
    std::mt19937_64 rng(seed);
    std::map<std::vector<int>, std::vector<double>> samples;
    for (int r = 0; r < R; ++r) {
        JointPMF pmf = detail::resample_pmf(counts, total, rng);
        for (const auto& [key, res] : report.grid)
            samples[key].push_back(eval_probability(by_label.at(res.label), pmf));
    }
    std::map<std::vector<int>, double> out;
    for (const auto& [key, v] : samples) out.emplace(key, detail::sample_stddev(v));
    return out;
}

// ---- Serialization ----------------------------------------------------------

namespace detail {

inline const char* scenario_name(ScanScenario s) {
    switch (s) {
        case ScanScenario::grid: return "grid";
        case ScanScenario::touching: return "touching";
        case ScanScenario::local: return "local";
        case ScanScenario::index_sum: return "index_sum";
    }
    return "?";
}

inline std::string flag_string(const NCResult& r) {
    std::string s;
    auto add = [&](const char* f) {
        if (!s.empty()) s += '|';
        s += f;
    };
    if (r.capped) add("capped");
    if (r.unbounded) add("unbounded");
    if (r.multiple_roots) add("multiroot");
    return s;
}

}  // namespace detail

/// Long-form CSV: one row per grid cell, directly plottable.
inline std::string scan_report_csv(const ScanReport& r) {
    std::ostringstream out;
    std::size_t arity = r.grid.empty() ? 0 : r.grid.begin()->first.size();
    out << "scenario,family";
    for (std::size_t i = 0; i < arity; ++i) out << ",idx" << (i + 1);
    out << ",value,tau,nu,flag";
    const bool with_err = !r.errors.empty();
    if (with_err) out << ",err";
    out << '\n';
    for (const auto& [key, res] : r.grid) {
        out << detail::scenario_name(r.scenario) << ',' << r.family;
        for (int k : key) out << ',' << k;
        out << ',' << format_double(res.origin_value) << ',';
        if (res.tau) out << format_double(*res.tau);
        out << ',';
        if (res.nu) out << format_double(*res.nu);
        out << ',' << detail::flag_string(res);
        if (with_err) {
            out << ',';
            auto it = r.errors.find(key);
            if (it != r.errors.end()) out << format_double(it->second);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace qnc
