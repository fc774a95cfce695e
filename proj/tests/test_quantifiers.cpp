// Depth and noise quantifiers: the smoothing parameter tau at which a
// criterion's negativity vanishes, and the admixed-noise budget nu.  The
// root-finding contracts (grid, largest sign change, bisection widths, caps,
// multiplicity warnings) are pinned on synthetic profile functions; analytic
// values are pinned on a two-cell diagonal state where both routes have exact
// closed-form roots.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "qnc/catalog.hpp"
#include "qnc/quantifiers.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using qnc::Arm;
using qnc::JointPMF;

namespace {

/// Two-cell diagonal state p(0,0) = 1-q, p(1,1) = q.
JointPMF pair_state(double q) {
    return JointPMF::from_cells({{0, 0, 1.0 - q}, {1, 1, q}});
}

}  // namespace

TEST_CASE("depth scan contract on synthetic profiles") {
    SECTION("nonnegative origin short-circuits") {
        auto G = [](double, int*) { return 0.75; };
        qnc::NCResult r = qnc::detail::depth_scan("toy", 1.0, G, 0.0);
        REQUIRE(r.tau.has_value());
        REQUIRE(r.tau.value() == 0.0);
        REQUIRE_FALSE(r.nonclassical);
        REQUIRE(r.evaluations == 1);
        REQUIRE(r.bracket.first == 1.0);
        REQUIRE(r.bracket.second == 1.0);
    }
    SECTION("single crossing is bisected to width 1e-4") {
        auto G = [](double s, int*) { return 0.25 - s; };
        qnc::NCResult r = qnc::detail::depth_scan("toy", 1.0, G, 0.0);
        REQUIRE(r.nonclassical);
        REQUIRE_FALSE(r.capped);
        REQUIRE_FALSE(r.multiple_roots);
        REQUIRE_THAT(r.tau.value(), WithinAbs(0.375, 1e-4));
        REQUIRE(r.bracket.second - r.bracket.first <= 1e-4);
        // root lies inside the reported bracket
        REQUIRE(r.bracket.first <= 0.25);
        REQUIRE(0.25 <= r.bracket.second);
        // origin + full 33-point grid (origin included) + 10 halvings
        REQUIRE(r.evaluations == 43);
    }
    SECTION("negativity persisting over the whole grid is capped") {
        auto G = [](double, int*) { return -1.0; };
        qnc::NCResult r = qnc::detail::depth_scan("toy", 1.0, G, 0.0);
        REQUIRE(r.capped);
        REQUIRE(r.nonclassical);
        REQUIRE_THAT(r.tau.value(), WithinAbs((2.0 - 1e-3) / 2.0, 1e-12));
        REQUIRE(r.evaluations == 33);
    }
    SECTION("oscillating profile takes the largest root and warns") {
        auto G = [](double s, int*) { return -(s - 0.2) * (s + 0.3) * (s + 0.8); };
        qnc::NCResult r = qnc::detail::depth_scan("toy", 1.0, G, 0.0);
        REQUIRE(r.nonclassical);
        REQUIRE(r.multiple_roots);
        REQUIRE_FALSE(r.capped);
        REQUIRE_THAT(r.tau.value(), WithinAbs(0.4, 1e-4));
    }
    SECTION("statistical tolerance applies to the origin verdict only") {
        auto G = [](double, int*) { return -5e-11; };
        qnc::NCResult tol = qnc::detail::depth_scan("toy", 1.0, G, 1e-10);
        REQUIRE(tol.tau.value() == 0.0);
        REQUIRE_FALSE(tol.nonclassical);
        qnc::NCResult strict = qnc::detail::depth_scan("toy", 1.0, G, 0.0);
        REQUIRE(strict.nonclassical);
        REQUIRE(strict.capped);
    }
}

TEST_CASE("noise scan contract on synthetic profiles") {
    SECTION("root found by doubling then relative bisection") {
        auto H = [](double nu, int*) { return nu - 0.37; };
        qnc::NCResult r = qnc::detail::noise_scan("toy", 1.0, H, 0.0, 1e3);
        REQUIRE(r.nonclassical);
        REQUIRE_FALSE(r.unbounded);
        REQUIRE_THAT(r.nu.value(), WithinRel(0.37, 2e-4));
        REQUIRE(r.bracket.second - r.bracket.first <= 1e-4 * r.bracket.second);
    }
    SECTION("nonnegative origin gives zero noise budget") {
        auto H = [](double, int*) { return 0.2; };
        qnc::NCResult r = qnc::detail::noise_scan("toy", 1.0, H, 0.0, 1e3);
        REQUIRE(r.nu.value() == 0.0);
        REQUIRE_FALSE(r.nonclassical);
    }
    SECTION("negativity beyond the cap reports unbounded") {
        auto H = [](double, int*) { return -1.0; };
        qnc::NCResult r = qnc::detail::noise_scan("toy", 1.0, H, 0.0, 1e3);
        REQUIRE(r.unbounded);
        REQUIRE_FALSE(r.nu.has_value());
        REQUIRE(r.nonclassical);
    }
}

TEST_CASE("ordering evaluator") {
    JointPMF toy = pair_state(9.0 / 16.0);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    qnc::OrderingEvaluator ev(toy, 1.0);
    SECTION("normal ordering reproduces the plain evaluation exactly") {
        REQUIRE(ev.criterion_value(e001, 1.0) == qnc::eval_probability(e001, toy));
    }
    SECTION("cells agree with the closed-form kernel values at s = 0") {
        // p_0(0,0) = sum K(0,a)K(0,b) p(a,b) with K(0,0)=2/3, K(1,0)=2/9
        double want = (2.0 / 3) * (2.0 / 3) * toy.at(0, 0) +
                      (2.0 / 9) * (2.0 / 9) * toy.at(1, 1);
        REQUIRE_THAT(ev.cell(0.0, 0, 0), WithinRel(want, 1e-12));
        // the analytic root: the criterion vanishes identically at s = 0
        REQUIRE_THAT(ev.criterion_value(e001, 0.0), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("depth of a diagonal pair state") {
    JointPMF toy = pair_state(9.0 / 16.0);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    SECTION("probability route has its exact root at s = 0") {
        qnc::NCResult r = qnc::ncd(e001, toy, 1.0);
        REQUIRE(r.nonclassical);
        REQUIRE_FALSE(r.capped);
        REQUIRE_FALSE(r.multiple_roots);
        REQUIRE_THAT(r.origin_value, WithinAbs(-9.0 / 16.0, 1e-15));
        REQUIRE_THAT(r.tau.value(), WithinAbs(0.5, 1e-4));
        REQUIRE(r.modes == 1.0);
    }
    SECTION("moment route has its exact root at s = 1/4") {
        qnc::MomentVector mv = qnc::moments_of(toy, e001.max_order);
        qnc::NCResult r = qnc::moment_ncd(e001, mv, 1.0);
        REQUIRE(r.nonclassical);
        REQUIRE_THAT(r.origin_value, WithinAbs(-2.0 * 9.0 / 16.0, 1e-15));
        REQUIRE_THAT(r.tau.value(), WithinAbs(0.375, 1e-4));
    }
    SECTION("results are deterministic") {
        qnc::NCResult a = qnc::ncd(e001, toy, 1.0);
        qnc::NCResult b = qnc::ncd(e001, toy, 1.0);
        REQUIRE(a.tau.value() == b.tau.value());
        REQUIRE(a.bracket == b.bracket);
        REQUIRE(a.evaluations == b.evaluations);
    }
}

TEST_CASE("noise budget of a diagonal pair state") {
    // For p(1,1) = q < 1/2 the noise profile (1-q) M nu^2 - q (1+nu)^2 has the
    // exact root nu = sqrt(q) / (sqrt((1-q) M) - sqrt(q)).
    JointPMF toy = pair_state(0.25);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    qnc::NCResult r = qnc::nccp(e001, toy, 1.0);
    REQUIRE(r.nonclassical);
    REQUIRE_FALSE(r.unbounded);
    REQUIRE_THAT(r.nu.value(), WithinRel((std::sqrt(3.0) + 1.0) / 2.0, 2e-4));
    SECTION("the returned bracket straddles the sign change") {
        double lo = r.bracket.first, hi = r.bracket.second;
        REQUIRE(qnc::eval_probability(e001, qnc::apply_noise(toy, lo, 1.0)) < 0.0);
        REQUIRE(qnc::eval_probability(e001, qnc::apply_noise(toy, hi, 1.0)) >= 0.0);
    }
    SECTION("noise budget dominates depth on the same criterion") {
        qnc::NCResult d = qnc::ncd(e001, toy, 1.0);
        REQUIRE(r.nu.value() >= d.tau.value());
    }
}

TEST_CASE("strong pair correlations exhaust any noise budget") {
    // With q > 1/2 the same profile is negative for every nu: the budget is
    // unbounded, and the search must stay cheap all the way to the cap.
    JointPMF toy = pair_state(9.0 / 16.0);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    qnc::NCResult r = qnc::nccp(e001, toy, 1.0);
    REQUIRE(r.nonclassical);
    REQUIRE(r.unbounded);
    REQUIRE_FALSE(r.nu.has_value());
}

TEST_CASE("classical fields have zero depth and noise budget") {
    std::vector<std::pair<JointPMF, double>> fields;
    fields.emplace_back(qt::poisson_product_pmf(1.0, 1.0), 1.0);
    fields.emplace_back(qt::thermal_product_pmf(0.6, 2.0), 2.0);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    for (const auto& [pmf, modes] : fields) {
        qnc::NCResult d = qnc::ncd(e001, pmf, modes, 1e-10);
        REQUIRE(d.tau.value() == 0.0);
        REQUIRE_FALSE(d.nonclassical);
        qnc::NCResult n = qnc::nccp(e001, pmf, modes, 1e-10);
        REQUIRE(n.nu.value() == 0.0);
    }
}

TEST_CASE("depth decreases with assumed mode count") {
    JointPMF toy = pair_state(0.25);
    qnc::Criterion e001 = qnc::criterion_E3(0, 0, 1);
    double prev_tau = 2.0, prev_nu = std::numeric_limits<double>::infinity();
    for (double M : {1.0, 2.0, 5.0}) {
        qnc::NCResult d = qnc::ncd(e001, toy, M);
        qnc::NCResult n = qnc::nccp(e001, toy, M);
        REQUIRE(d.tau.value() <= prev_tau + 1e-9);
        REQUIRE(n.nu.has_value());
        REQUIRE(n.nu.value() <= prev_nu + 1e-9);
        REQUIRE(n.nu.value() >= d.tau.value() - 1e-6);
        prev_tau = d.tau.value();
        prev_nu = n.nu.value();
    }
}

TEST_CASE("depth works on catalog criteria") {
    JointPMF toy = pair_state(9.0 / 16.0);
    qnc::Criterion a1 = qnc::catalog_criterion(qnc::catalog_entry("E001"), Arm::signal);
    qnc::NCResult r = qnc::ncd(a1, toy, 1.0);
    REQUIRE_THAT(r.tau.value(), WithinAbs(0.5, 1e-4));
}
