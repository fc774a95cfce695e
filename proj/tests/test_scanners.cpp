// Scan drivers: depth maps over criterion families, index-set and locality
// searches, index-sum maximization, and bootstrap error bars.
//
// Oracle notes:
//   - On an ideal pair source the one-step difference criteria are negative
//     exactly on the diagonal cells, and the two-step window is negative
//     exactly two cells off the diagonal (the window coefficient hitting the
//     diagonal is -4 there) — so the tau maps have a known support.
//   - The diagonal two-cell state p(0,0) = 7/16, p(1,1) = 9/16 places the
//     covariance-determinant root exactly at s = 0, giving tau = 1/2.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qnc/catalog.hpp"
#include "qnc/criteria.hpp"
#include "qnc/generators.hpp"
#include "qnc/io.hpp"
#include "qnc/quantifiers.hpp"
#include "qnc/scanners.hpp"

using Catch::Matchers::WithinAbs;

namespace {

qnc::JointPMF pair_state(double q) {
    return qnc::JointPMF::from_cells({{0, 0, 1.0 - q}, {1, 1, q}});
}

double grid_tau(const qnc::ScanReport& r, std::vector<int> key) {
    return r.grid.at(key).tau.value();
}

double max_tau(const qnc::ScanReport& r) {
    double best = 0.0;
    for (const auto& [k, v] : r.grid) best = std::max(best, v.tau.value_or(0.0));
    return best;
}

}  // namespace

TEST_CASE("one-step difference grid lights up the pair-source diagonal") {
    qnc::JointPMF twin = qnc::gen_ideal_twin(1.0, 1.0, 6);
    qnc::ScanReport r =
        qnc::scan_grid(qnc::GridFamily::ec_l1, twin, 1.0, {1, 3, 1, 3});
    REQUIRE(r.scenario == qnc::ScanScenario::grid);
    REQUIRE(r.family == "Ec1");
    REQUIRE(r.grid.size() == 9);
    for (int n = 1; n <= 3; ++n) REQUIRE(grid_tau(r, {n, n}) > 0.0);
    REQUIRE(grid_tau(r, {1, 2}) == 0.0);
    REQUIRE(grid_tau(r, {2, 1}) == 0.0);
    REQUIRE(grid_tau(r, {1, 3}) == 0.0);
    REQUIRE(r.max_result.tau.value() == max_tau(r));
    REQUIRE(r.max_result.label.rfind("Ec:", 0) == 0);
}

TEST_CASE("two-step difference grid flags strips beside the diagonal") {
    qnc::JointPMF twin = qnc::gen_ideal_twin(1.0, 1.0, 6);
    qnc::ScanReport r =
        qnc::scan_grid(qnc::GridFamily::ec_l2, twin, 1.0, {1, 4, 1, 4});
    // Window indices below the window width are inadmissible and stay absent.
    REQUIRE(r.grid.count({1, 2}) == 0);
    REQUIRE(r.grid.count({1, 4}) == 0);
    REQUIRE(r.grid.count({4, 1}) == 0);
    REQUIRE(r.grid.size() == 9);
    REQUIRE(grid_tau(r, {2, 2}) == 0.0);
    REQUIRE(grid_tau(r, {3, 3}) == 0.0);
    REQUIRE(grid_tau(r, {2, 3}) == 0.0);
    REQUIRE(grid_tau(r, {2, 4}) > 0.0);
    REQUIRE(grid_tau(r, {4, 2}) > 0.0);
}

TEST_CASE("difference grids on classical light are identically zero") {
    qnc::JointPMF coh = qnc::gen_coherent_product(0.5, 0.7);
    qnc::ScanReport r =
        qnc::scan_grid(qnc::GridFamily::ec_l1, coh, 1.0, {1, 2, 1, 2});
    REQUIRE(r.grid.size() == 4);
    for (const auto& [key, res] : r.grid) {
        REQUIRE(res.tau.value() == 0.0);
        REQUIRE_FALSE(res.nonclassical);
    }
    REQUIRE(r.max_result.tau.value() == 0.0);
}

TEST_CASE("grid scans transpose with the field") {
    qnc::JointPMF pmf = qt::pmf_P3();
    qnc::ScanReport r = qnc::scan_grid(qnc::GridFamily::ec_l1, pmf, 1.0, {1, 3, 1, 3});
    qnc::ScanReport rt =
        qnc::scan_grid(qnc::GridFamily::ec_l1, pmf.transposed(), 1.0, {1, 3, 1, 3});
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
            const qnc::NCResult& x = r.grid.at({a, b});
            const qnc::NCResult& y = rt.grid.at({b, a});
            REQUIRE(x.origin_value == y.origin_value);
            REQUIRE(x.tau.value() == y.tau.value());
        }
}

TEST_CASE("parametric grids respect their admissible wedges") {
    qnc::JointPMF ps = pair_state(9.0 / 16.0);

    qnc::ScanReport r2 =
        qnc::scan_grid(qnc::GridFamily::sys2_m1, ps, 1.0, {1, 3, 0, 2});
    REQUIRE(r2.family == "D3sys2");
    REQUIRE(r2.grid.size() == 6);
    REQUIRE(r2.grid.count({1, 0}) == 1);
    REQUIRE(r2.grid.count({1, 1}) == 0);
    REQUIRE(r2.grid.count({2, 2}) == 0);
    REQUIRE(r2.grid.count({3, 2}) == 1);
    qnc::NCResult direct = qnc::ncd(qnc::criterion_Dsys2(2, 1, 1), ps, 1.0);
    REQUIRE(r2.grid.at({2, 1}).tau.value() == direct.tau.value());
    REQUIRE(r2.grid.at({2, 1}).origin_value == direct.origin_value);

    qnc::ScanReport r3 =
        qnc::scan_grid(qnc::GridFamily::sys3_m1, ps, 1.0, {1, 3, 1, 3});
    REQUIRE(r3.family == "Dsys3");
    REQUIRE(r3.grid.size() == 6);
    REQUIRE(r3.grid.count({1, 1}) == 1);
    REQUIRE(r3.grid.count({1, 2}) == 0);
    REQUIRE(r3.grid.count({3, 3}) == 1);
}

TEST_CASE("index-set scan takes the best criterion touching each cell") {
    qnc::JointPMF twin = qnc::gen_ideal_twin(1.0, 1.0, 6);
    qnc::ScanReport r = qnc::scan_touching(twin, 1.0, 2);
    REQUIRE(r.scenario == qnc::ScanScenario::touching);
    REQUIRE(r.family == "CS");
    REQUIRE(r.grid.size() == 9);

    // Members touched by a criterion never beat the cell maximum.
    qnc::NCResult c00 = qnc::ncd(qnc::criterion_CS(1, 1, 0, 0), twin, 1.0);
    REQUIRE(r.grid.at({0, 0}).tau.value() >= c00.tau.value());
    REQUIRE(r.grid.at({1, 1}).tau.value() >= c00.tau.value());
    REQUIRE(r.grid.at({2, 2}).tau.value() >= c00.tau.value());

    qnc::NCResult c20 = qnc::ncd(qnc::criterion_CS(1, 1, 2, 0), twin, 1.0);
    REQUIRE(c20.tau.value() > 0.0);
    REQUIRE(r.grid.at({1, 1}).tau.value() >= c20.tau.value());
    REQUIRE(r.grid.at({2, 0}).tau.value() >= c20.tau.value());
    REQUIRE(r.grid.at({0, 2}).tau.value() >= c20.tau.value());
    REQUIRE(r.grid.at({1, 1}).label.rfind("CS:", 0) == 0);

    REQUIRE(r.max_result.tau.value() == max_tau(r));
    REQUIRE(qnc::scan_touching(twin, 1.0, 0).grid.empty());
}

TEST_CASE("locality-constrained determinant scan grows with its radius") {
    qnc::JointPMF ps = pair_state(9.0 / 16.0);
    qnc::ScanReport d0 = qnc::scan_local(ps, 1.0, 0, {0, 1, 0, 1});
    REQUIRE(d0.grid.empty());
    REQUIRE_FALSE(d0.max_result.tau.has_value());

    qnc::ScanReport d1 = qnc::scan_local(ps, 1.0, 1, {0, 1, 0, 1});
    REQUIRE(d1.family == "M3");
    REQUIRE(d1.grid.size() == 4);
    REQUIRE(max_tau(d1) > 0.0);

    qnc::ScanReport d2 = qnc::scan_local(ps, 1.0, 2, {0, 1, 0, 1});
    for (const auto& [key, res] : d1.grid)
        REQUIRE(d2.grid.at(key).tau.value() >= res.tau.value());
}

TEST_CASE("index-sum scan reports the best tuple per total order") {
    qnc::JointPMF ps = pair_state(9.0 / 16.0);
    qnc::ScanReport r3 =
        qnc::scan_index_sum(qnc::MinBallFamily::triples, ps, 1.0, 2, 5);
    REQUIRE(r3.scenario == qnc::ScanScenario::index_sum);
    REQUIRE(r3.family == "DB3");
    REQUIRE(r3.grid.count({2}) == 0);
    REQUIRE(r3.grid.count({3}) == 1);
    REQUIRE(r3.grid.count({4}) == 1);
    REQUIRE(r3.grid.count({5}) == 1);
    REQUIRE(r3.grid.at({3}).label == "DB3:1,1,1");
    qnc::NCResult only4 = qnc::ncd(qnc::criterion_D3_minball(2, 1, 1), ps, 1.0);
    REQUIRE(r3.grid.at({4}).tau.value() == only4.tau.value());
    double best5 = std::max(qnc::ncd(qnc::criterion_D3_minball(2, 2, 1), ps, 1.0)
                                .tau.value(),
                            qnc::ncd(qnc::criterion_D3_minball(3, 1, 1), ps, 1.0)
                                .tau.value());
    REQUIRE(r3.grid.at({5}).tau.value() == best5);
    REQUIRE(r3.max_result.tau.value() == max_tau(r3));

    qnc::ScanReport r4 =
        qnc::scan_index_sum(qnc::MinBallFamily::quadruples, ps, 1.0, 3, 5);
    REQUIRE(r4.family == "DB4");
    REQUIRE(r4.grid.count({3}) == 0);
    REQUIRE(r4.grid.at({4}).label == "DB4:1,1,1,1");
    REQUIRE(r4.grid.at({5}).label == "DB4:2,1,1,1");
}

TEST_CASE("bootstrap errors shrink with the count budget") {
    qnc::Criterion e001 = qnc::catalog_criterion("E001");
    qnc::RawHistogram h4;
    h4.counts = {{0, 0, 4000.0}, {1, 0, 2000.0}, {0, 1, 1000.0}, {1, 1, 3000.0}};
    h4.total = 10000.0;
    qnc::RawHistogram h6;
    for (const auto& [a, b, c] : h4.counts) h6.counts.emplace_back(a, b, c * 100.0);
    h6.total = h4.total * 100.0;

    qnc::BootstrapErrors e4 = qnc::bootstrap_errors(h4, e001, 1.0, 200, 7);
    qnc::BootstrapErrors e6 = qnc::bootstrap_errors(h6, e001, 1.0, 200, 7);
    REQUIRE(e4.resamples == 200);
    REQUIRE(e4.value_stderr > 0.0);
    // Criterion value here is -p(1,1); its multinomial standard error is
    // sqrt(0.3 * 0.7 / N) = 4.6e-3 at N = 1e4.
    REQUIRE_THAT(e4.value_stderr, WithinAbs(4.58e-3, 1.5e-3));
    double shrink = e4.value_stderr / e6.value_stderr;
    REQUIRE(shrink > 5.0);
    REQUIRE(shrink < 20.0);
    REQUIRE_FALSE(e4.tau_stderr.has_value());

    // Same seed, same resamples: bit-identical error bars.
    qnc::BootstrapErrors again = qnc::bootstrap_errors(h4, e001, 1.0, 200, 7);
    REQUIRE(again.value_stderr == e4.value_stderr);
}

TEST_CASE("bootstrap can also spread the depth estimate") {
    qnc::RawHistogram h;
    h.counts = {{0, 0, 4375.0}, {1, 1, 5625.0}};
    h.total = 10000.0;
    qnc::Criterion e001 = qnc::catalog_criterion("E001");
    qnc::BootstrapErrors e = qnc::bootstrap_errors(h, e001, 1.0, 100, 11, true);
    REQUIRE(e.tau_stderr.has_value());
    REQUIRE(e.tau_stderr.value() > 0.0);
    REQUIRE(e.tau_stderr.value() < 0.2);
}

TEST_CASE("bootstrap validates its input") {
    qnc::Criterion e001 = qnc::catalog_criterion("E001");
    qnc::RawHistogram good;
    good.counts = {{0, 0, 50.0}, {1, 1, 50.0}};
    good.total = 100.0;
    REQUIRE_THROWS_AS(qnc::bootstrap_errors(good, e001, 1.0, 1, 1),
                      qnc::ValidationError);
    REQUIRE_THROWS_AS(qnc::bootstrap_errors(good, e001, 1.0, 99, 1),
                      qnc::ValidationError);

    qnc::RawHistogram normalized;
    normalized.counts = {{0, 0, 0.4}, {1, 1, 0.6}};
    normalized.total = 1.0;
    REQUIRE_THROWS_AS(qnc::bootstrap_errors(normalized, e001, 1.0, 100, 1),
                      qnc::NotCounts);

    qnc::RawHistogram degenerate;
    degenerate.counts = {{2, 2, 500.0}};
    degenerate.total = 500.0;
    qnc::BootstrapErrors e = qnc::bootstrap_errors(degenerate, e001, 1.0, 100, 1);
    REQUIRE(e.value_stderr == 0.0);
}

TEST_CASE("per-cell errors attach to a scan report") {
    qnc::RawHistogram h;
    h.counts = {{0, 0, 4375.0}, {1, 1, 5625.0}};
    h.total = 10000.0;
    qnc::JointPMF ps = h.to_pmf();
    qnc::ScanReport r = qnc::scan_grid(qnc::GridFamily::ec_l1, ps, 1.0, {1, 2, 1, 2});
    r.errors = qnc::bootstrap_errors(h, r, 150, 3);
    REQUIRE(r.errors.size() == r.grid.size());
    for (const auto& [key, err] : r.errors) REQUIRE(err >= 0.0);
    // The (1,1) window value is -p(1,1) up to positive scale; its resampled
    // spread must be of multinomial size, not zero.
    REQUIRE(r.errors.at({1, 1}) > 1e-4);
}

TEST_CASE("scan report serializes to long-form rows") {
    qnc::JointPMF ps = pair_state(9.0 / 16.0);
    qnc::ScanReport r = qnc::scan_grid(qnc::GridFamily::sys2_m1, ps, 1.0, {1, 2, 0, 1});
    std::string csv = qnc::scan_report_csv(r);
    REQUIRE(csv.rfind("scenario,family,idx1,idx2,value,tau,nu,flag\n", 0) == 0);
    std::size_t rows = 0;
    for (char ch : csv)
        if (ch == '\n') ++rows;
    REQUIRE(rows == 1 + r.grid.size());
    REQUIRE(csv.find("\ngrid,D3sys2,1,0,") != std::string::npos);

    // Determinism: repeating the scan reproduces the bytes.
    qnc::ScanReport r2 = qnc::scan_grid(qnc::GridFamily::sys2_m1, ps, 1.0, {1, 2, 0, 1});
    REQUIRE(qnc::scan_report_csv(r2) == csv);
}
