#pragma once

// Fixed catalog of 32 low-order nonclassicality witnesses in closed
// probability form.  Each entry stores its canonical polynomial; most entries
// also know which parametric family instance they are, which the tests use to
// cross-check the symbolic engine against these hand-written forms.
//
// Entry labels encode the family and indices, e.g. E101 (intensity-difference
// moment indices 1,0 with l=1), C12_10 (Cauchy-Schwarz with printed lower
// index 12 and upper 10), Da111_210 (arm-superscripted three-variable
// majorization step (2,1,0) over (1,1,1)).  Labels prefixed Da/Ta admit a
// signal/idler arm choice; all other entries are fixed-arm or symmetric.

#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "criteria.hpp"

namespace qnc {

struct CatalogEntry {
    std::string label;
    bool arm_sensitive = false;
    bool has_general = false;
    ProbPoly form;  ///< canonical closed form (signal arm where applicable)
    std::function<Criterion(Arm)> make_general;
};

namespace detail {

inline ProbPoly closed_form(
    std::vector<std::pair<long, std::vector<std::pair<int, int>>>> ts) {
    ProbPoly p;
    for (auto& [c, cells] : ts) {
        ProbTerm t;
        t.coeff = rational(c);
        t.coeff_d = double(c);
        t.cells = std::move(cells);
        p.terms.push_back(std::move(t));
    }
    p.sort_and_combine();
    return p;
}

inline ProbPoly transpose_prob(const ProbPoly& f) {
    ProbPoly p;
    p.terms = f.terms;
    for (auto& t : p.terms)
        for (auto& c : t.cells) std::swap(c.first, c.second);
    p.sort_and_combine();
    return p;
}

inline std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> cat;
    auto add = [&](const char* label, bool armful,
                   std::vector<std::pair<long, std::vector<std::pair<int, int>>>> ts,
                   std::function<Criterion(Arm)> gen) {
        CatalogEntry e;
        e.label = label;
        e.arm_sensitive = armful;
        e.has_general = bool(gen);
        e.form = closed_form(std::move(ts));
        e.make_general = std::move(gen);
        cat.push_back(std::move(e));
    };

    // --- intensity-difference family ------------------------------------
    add("E001", false,
        {{1, {{2, 0}}}, {1, {{0, 2}}}, {-1, {{1, 1}}}},
        [](Arm) { return criterion_E3(0, 0, 1); });
    add("E101", false,
        {{3, {{3, 0}}}, {1, {{1, 2}}}, {-2, {{2, 1}}}},
        [](Arm) { return criterion_E3(1, 0, 1); });
    add("E011", false,
        {{3, {{0, 3}}}, {1, {{2, 1}}}, {-2, {{1, 2}}}},
        [](Arm) { return criterion_E3(0, 1, 1); });
    add("E201", false,
        {{6, {{4, 0}}}, {1, {{2, 2}}}, {-3, {{3, 1}}}},
        [](Arm) { return criterion_E3(2, 0, 1); });
    add("E021", false,
        {{6, {{0, 4}}}, {1, {{2, 2}}}, {-3, {{1, 3}}}},
        [](Arm) { return criterion_E3(0, 2, 1); });
    add("E111", false,
        {{3, {{3, 1}}}, {3, {{1, 3}}}, {-4, {{2, 2}}}},
        [](Arm) { return criterion_E3(1, 1, 1); });
    add("E301", false,
        {{10, {{5, 0}}}, {1, {{3, 2}}}, {-4, {{4, 1}}}},
        [](Arm) { return criterion_E3(3, 0, 1); });
    add("E031", false,
        {{10, {{0, 5}}}, {1, {{2, 3}}}, {-4, {{1, 4}}}},
        [](Arm) { return criterion_E3(0, 3, 1); });
    add("E211", false,
        {{2, {{4, 1}}}, {1, {{2, 3}}}, {-2, {{3, 2}}}},
        [](Arm) { return criterion_E3(2, 1, 1); });
    add("E121", false,
        {{2, {{1, 4}}}, {1, {{3, 2}}}, {-2, {{2, 3}}}},
        [](Arm) { return criterion_E3(1, 2, 1); });
    add("E002", false,
        {{1, {{4, 0}}}, {1, {{2, 2}}}, {1, {{0, 4}}}, {-1, {{3, 1}}}, {-1, {{1, 3}}}},
        [](Arm) { return criterion_E3(0, 0, 2); });
    add("E102", false,
        {{5, {{5, 0}}}, {3, {{3, 2}}}, {1, {{1, 4}}}, {-4, {{4, 1}}}, {-2, {{2, 3}}}},
        [](Arm) { return criterion_E3(1, 0, 2); });
    add("E012", false,
        {{5, {{0, 5}}}, {3, {{2, 3}}}, {1, {{4, 1}}}, {-4, {{1, 4}}}, {-2, {{3, 2}}}},
        [](Arm) { return criterion_E3(0, 1, 2); });

    // --- central-moment family ------------------------------------------
    add("E1011", false,
        {{12, {{3, 2}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
         {2, {{1, 0}, {1, 0}, {1, 2}, {0, 0}, {0, 0}}},
         {6, {{0, 1}, {0, 1}, {3, 0}, {0, 0}, {0, 0}}},
         {8, {{0, 1}, {1, 0}, {2, 1}, {0, 0}, {0, 0}}},
         {1, {{0, 1}, {0, 1}, {1, 0}, {1, 0}, {1, 0}}},
         {-8, {{1, 0}, {2, 2}, {0, 0}, {0, 0}, {0, 0}}},
         {-12, {{0, 1}, {3, 1}, {0, 0}, {0, 0}, {0, 0}}},
         {-4, {{0, 1}, {0, 1}, {1, 0}, {2, 0}, {0, 0}}},
         {-2, {{1, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}}}},
        [](Arm) { return criterion_E4(1, 0, 1, 1); });
    add("E0111", false,
        {{12, {{2, 3}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}},
         {2, {{0, 1}, {0, 1}, {2, 1}, {0, 0}, {0, 0}}},
         {6, {{1, 0}, {1, 0}, {0, 3}, {0, 0}, {0, 0}}},
         {8, {{1, 0}, {0, 1}, {1, 2}, {0, 0}, {0, 0}}},
         {1, {{1, 0}, {1, 0}, {0, 1}, {0, 1}, {0, 1}}},
         {-8, {{0, 1}, {2, 2}, {0, 0}, {0, 0}, {0, 0}}},
         {-12, {{1, 0}, {1, 3}, {0, 0}, {0, 0}, {0, 0}}},
         {-4, {{1, 0}, {1, 0}, {0, 1}, {0, 2}, {0, 0}}},
         {-2, {{0, 1}, {0, 1}, {1, 0}, {1, 1}, {0, 0}}}},
        [](Arm) { return criterion_E4(0, 1, 1, 1); });
    add("E0011", false,
        {{4, {{2, 2}, {0, 0}, {0, 0}, {0, 0}}},
         {2, {{1, 0}, {1, 0}, {0, 2}, {0, 0}}},
         {2, {{0, 1}, {0, 1}, {2, 0}, {0, 0}}},
         {4, {{1, 0}, {0, 1}, {1, 1}, {0, 0}}},
         {-4, {{1, 0}, {1, 2}, {0, 0}, {0, 0}}},
         {-4, {{0, 1}, {2, 1}, {0, 0}, {0, 0}}},
         {-3, {{1, 0}, {1, 0}, {0, 1}, {0, 1}}}},
        [](Arm) { return criterion_E4(0, 0, 1, 1); });

    // --- Cauchy-Schwarz family ------------------------------------------
    add("C12_10", false,
        {{2, {{1, 2}, {1, 0}}}, {-1, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_CS(1, 1, 1, 0); });
    add("C01_21", false,
        {{2, {{2, 1}, {0, 1}}}, {-1, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_CS(1, 1, 2, 1); });

    // --- moment-matrix determinants -------------------------------------
    add("M1100", false,
        {{4, {{2, 2}, {0, 0}}}, {-1, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_M2(1, 1, 0, 0); });
    add("M1001", false,
        {{4, {{2, 0}, {0, 2}}}, {-1, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_M2(1, 0, 0, 1); });
    add("M001001", false,
        {{4, {{2, 0}, {0, 2}, {0, 0}}},
         {2, {{1, 1}, {1, 0}, {0, 1}}},
         {-1, {{1, 1}, {1, 1}, {0, 0}}},
         {-2, {{2, 0}, {0, 1}, {0, 1}}},
         {-2, {{0, 2}, {1, 0}, {1, 0}}}},
        [](Arm) { return criterion_M3({0, 0}, {1, 0}, {0, 1}); });

    // --- majorization steps ---------------------------------------------
    add("Da111_210", true,
        {{2, {{2, 0}, {1, 0}}},
         {1, {{2, 1}, {0, 0}}},
         {1, {{1, 2}, {0, 0}}},
         {1, {{2, 0}, {0, 1}}},
         {1, {{0, 2}, {1, 0}}},
         {-3, {{1, 0}, {1, 1}}}},
        [](Arm a) { return criterion_D3({2, 1, 0}, {1, 1, 1}, a); });
    add("Da211_220", true,
        {{2, {{2, 0}, {2, 0}}},
         {2, {{2, 2}, {0, 0}}},
         {2, {{2, 0}, {0, 2}}},
         {-1, {{2, 1}, {1, 0}}},
         {-1, {{1, 2}, {1, 0}}},
         {-1, {{2, 0}, {1, 1}}}},
        [](Arm a) { return criterion_D3({2, 2, 0}, {2, 1, 1}, a); });
    add("D1111_2110", false,
        {{1, {{2, 1}, {1, 0}}},
         {1, {{2, 1}, {0, 1}}},
         {1, {{1, 2}, {1, 0}}},
         {1, {{1, 2}, {0, 1}}},
         {1, {{2, 0}, {1, 1}}},
         {1, {{0, 2}, {1, 1}}},
         {-3, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_D4({2, 1, 1, 0}, {1, 1, 1, 1}); });
    add("D1111_2200", false,
        {{2, {{2, 0}, {2, 0}}},
         {4, {{2, 0}, {0, 2}}},
         {2, {{0, 2}, {0, 2}}},
         {4, {{2, 2}, {0, 0}}},
         {-3, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_D4({2, 2, 0, 0}, {1, 1, 1, 1}); });
    add("D1111_4000", false,
        {{12, {{4, 0}, {0, 0}}}, {12, {{0, 4}, {0, 0}}}, {-1, {{1, 1}, {1, 1}}}},
        [](Arm) { return criterion_D4({4, 0, 0, 0}, {1, 1, 1, 1}); });

    // --- triple-product closed forms (no parametric counterpart) --------
    add("Ta1110_2100", true,
        {{2, {{2, 1}, {0, 0}, {0, 0}}},
         {2, {{1, 2}, {0, 0}, {0, 0}}},
         {12, {{2, 0}, {1, 0}, {0, 0}}},
         {4, {{2, 0}, {0, 1}, {0, 0}}},
         {4, {{0, 2}, {1, 0}, {0, 0}}},
         {-6, {{1, 0}, {1, 1}, {0, 0}}},
         {-3, {{1, 0}, {1, 0}, {1, 0}}},
         {-3, {{1, 0}, {1, 0}, {0, 1}}}},
        nullptr);
    add("T1110_2100", false,
        {{2, {{2, 1}, {0, 0}, {0, 0}}},
         {2, {{1, 2}, {0, 0}, {0, 0}}},
         {4, {{2, 0}, {1, 0}, {0, 0}}},
         {4, {{0, 2}, {0, 1}, {0, 0}}},
         {6, {{2, 0}, {0, 1}, {0, 0}}},
         {6, {{0, 2}, {1, 0}, {0, 0}}},
         {-3, {{1, 0}, {1, 1}, {0, 0}}},
         {-3, {{0, 1}, {1, 1}, {0, 0}}},
         {-3, {{1, 0}, {1, 0}, {0, 1}}},
         {-3, {{0, 1}, {0, 1}, {1, 0}}}},
        nullptr);
    add("Ta2110_2200", true,
        {{4, {{2, 2}, {0, 0}, {0, 0}}},
         {12, {{2, 0}, {2, 0}, {0, 0}}},
         {8, {{2, 0}, {0, 2}, {0, 0}}},
         {-2, {{2, 1}, {1, 0}, {0, 0}}},
         {-2, {{1, 2}, {1, 0}, {0, 0}}},
         {-2, {{2, 0}, {1, 1}, {0, 0}}},
         {-3, {{2, 0}, {1, 0}, {1, 0}}},
         {-1, {{0, 2}, {1, 0}, {1, 0}}},
         {-2, {{2, 0}, {1, 0}, {0, 1}}}},
        nullptr);
    add("T2110_2200", false,
        {{4, {{2, 2}, {0, 0}, {0, 0}}},
         {4, {{2, 0}, {2, 0}, {0, 0}}},
         {4, {{0, 2}, {0, 2}, {0, 0}}},
         {12, {{2, 0}, {0, 2}, {0, 0}}},
         {-1, {{1, 0}, {2, 1}, {0, 0}}},
         {-1, {{1, 0}, {1, 2}, {0, 0}}},
         {-1, {{0, 1}, {2, 1}, {0, 0}}},
         {-1, {{0, 1}, {1, 2}, {0, 0}}},
         {-1, {{2, 0}, {1, 1}, {0, 0}}},
         {-1, {{0, 2}, {1, 1}, {0, 0}}},
         {-2, {{2, 0}, {1, 0}, {0, 1}}},
         {-2, {{0, 2}, {1, 0}, {0, 1}}},
         {-1, {{2, 0}, {0, 1}, {0, 1}}},
         {-1, {{0, 2}, {1, 0}, {1, 0}}}},
        nullptr);
    add("Ta1111_2110", true,
        {{2, {{2, 1}, {1, 0}, {0, 0}}},
         {2, {{1, 2}, {1, 0}, {0, 0}}},
         {2, {{2, 0}, {1, 1}, {0, 0}}},
         {3, {{2, 0}, {1, 0}, {1, 0}}},
         {1, {{0, 2}, {1, 0}, {1, 0}}},
         {2, {{2, 0}, {1, 0}, {0, 1}}},
         {-6, {{1, 0}, {1, 0}, {1, 1}}}},
        nullptr);
    add("T1111_2110", false,
        {{1, {{1, 0}, {2, 1}, {0, 0}}},
         {1, {{1, 0}, {1, 2}, {0, 0}}},
         {1, {{0, 1}, {2, 1}, {0, 0}}},
         {1, {{0, 1}, {1, 2}, {0, 0}}},
         {1, {{2, 0}, {1, 1}, {0, 0}}},
         {1, {{0, 2}, {1, 1}, {0, 0}}},
         {2, {{2, 0}, {1, 0}, {0, 1}}},
         {2, {{0, 2}, {1, 0}, {0, 1}}},
         {1, {{2, 0}, {0, 1}, {0, 1}}},
         {1, {{0, 2}, {1, 0}, {1, 0}}},
         {-6, {{1, 0}, {0, 1}, {1, 1}}}},
        nullptr);

    return cat;
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> cat = detail::build_catalog();
    return cat;
}

inline const CatalogEntry& catalog_entry(const std::string& label) {
    for (const auto& e : catalog())
        if (e.label == label) return e;
    throw InvalidIndices("unknown catalog label: " + label);
}

namespace detail {

inline void check_catalog_arm(const CatalogEntry& e, Arm arm) {
    if (arm == Arm::idler && !e.arm_sensitive)
        throw InvalidIndices("catalog entry " + e.label + " does not take an arm");
}

}  // namespace detail

/// Wrap a catalog entry as a Criterion.  Entries that instantiate a parametric
/// family return the engine-built criterion (whose canonical probability form
/// equals the stored one); closed-only entries get their moment form by the
/// inverse vacuum-normalized substitution, so both evaluation routes work.
inline Criterion catalog_criterion(const CatalogEntry& e, Arm arm = Arm::signal) {
    detail::check_catalog_arm(e, arm);
    std::string label = "A:" + e.label + (arm == Arm::idler ? ":i" : "");
    if (e.has_general) {
        Criterion c = e.make_general(arm);
        c.label = std::move(label);
        return c;
    }
    ProbPoly form = (arm == Arm::idler) ? detail::transpose_prob(e.form) : e.form;
    Criterion c;
    c.label = std::move(label);
    c.branch_tags = {"-"};
    MomPoly m;
    for (const auto& t : form.terms) {
        MomTerm mt;
        mt.coeff = t.coeff;
        for (const auto& cell : t.cells) {
            if (cell == std::pair<int, int>{0, 0}) continue;
            mt.coeff /= detail::factorial_q(cell.first) * detail::factorial_q(cell.second);
            mt.factors.push_back(cell);
        }
        m.terms.push_back(std::move(mt));
    }
    m.canonicalize();
    c.max_order = m.max_order();
    c.mom.push_back(std::move(m));
    c.p00_excess = form.terms.empty() ? 0 : int(form.terms.front().cells.size());
    c.content = rational(1);
    c.prob.push_back(std::move(form));
    return c;
}

inline Criterion catalog_criterion(const std::string& label, Arm arm = Arm::signal) {
    return catalog_criterion(catalog_entry(label), arm);
}

inline double eval_catalog_entry(const CatalogEntry& e, const JointPMF& pmf,
                                 Arm arm = Arm::signal) {
    detail::check_catalog_arm(e, arm);
    if (arm == Arm::idler) return e.form.eval(pmf.transposed());
    return e.form.eval(pmf);
}

}  // namespace qnc
