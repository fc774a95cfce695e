// Ordering-kernel module: Laguerre recurrence, the alternating S function, the
// ordering kernel K_s, the thermal noise band, and both distribution transforms.
// Closed-form oracles (hand-derived):
//   S(2,1,0)=1, S(3,1,0)=3/4, S(3,2,0)=3/2, S(2,1,1/2)=5/4
//   K_0(0,0;M)=(2/3)^M, K_0(n,0;1)=(2/3)(1/3)^n, K_0(0,m;1)=(2/3)(1/3)^m,
//   K_0(n,1;1)=(2/9)(4n+1)(1/3)^n

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "qnc/kernels.hpp"
#include "qnc/pmf.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using qnc::JointPMF;

TEST_CASE("generalized Laguerre recurrence") {
    REQUIRE(qnc::laguerre(0, 2.5, 1.7) == 1.0);
    // L_1^a(x) = 1 + a - x, so L_1^{M-1}(0) = M
    REQUIRE_THAT(qnc::laguerre(1, 79.0, 0.0), WithinRel(80.0, 1e-15));
    REQUIRE_THAT(qnc::laguerre(3, 0.0, 1.0), WithinRel(-2.0 / 3.0, 1e-13));
    // series cross-check: L_2^a(x) = x^2/2 - (a+2)x + (a+1)(a+2)/2
    double a = 1.5, x = 0.8;
    REQUIRE_THAT(qnc::laguerre(2, a, x),
                 WithinRel(0.5 * x * x - (a + 2) * x + 0.5 * (a + 1) * (a + 2), 1e-13));
}

TEST_CASE("alternating S function") {
    using rat = qnc::rational;
    SECTION("vanishes strictly below the diagonal, unity on it (exact)") {
        for (double alpha : {0.0, 0.5, 1.0, 79.0}) {
            rat ra(alpha);
            for (int m = 0; m <= 8; ++m)
                for (int n = 0; n <= 8; ++n) {
                    rat v = qnc::s_function_exact(n, m, ra);
                    if (n < m) REQUIRE(v == 0);
                    if (n == m) REQUIRE(v == 1);
                }
        }
    }
    SECTION("hand-derived values above the diagonal") {
        REQUIRE_THAT(qnc::s_function(2, 1, 0.0), WithinRel(1.0, 1e-15));
        REQUIRE_THAT(qnc::s_function(3, 1, 0.0), WithinRel(0.75, 1e-15));
        REQUIRE_THAT(qnc::s_function(3, 2, 0.0), WithinRel(1.5, 1e-15));
        REQUIRE_THAT(qnc::s_function(2, 1, 0.5), WithinRel(1.25, 1e-15));
        REQUIRE(qnc::s_function_exact(2, 1, qnc::rational(1, 2)) == qnc::rational(5, 4));
    }
}

TEST_CASE("kernel entries match closed forms") {
    SECTION("vacuum column at s=0") {
        REQUIRE_THAT(qnc::kernel_entry_auto(0, 0, 0.0, 1.0), WithinRel(2.0 / 3.0, 1e-14));
        REQUIRE_THAT(qnc::kernel_entry_auto(0, 0, 0.0, 80.0),
                     WithinRel(std::pow(2.0 / 3.0, 80.0), 1e-12));
        for (int n = 0; n <= 12; ++n)
            REQUIRE_THAT(qnc::kernel_entry_auto(n, 0, 0.0, 1.0),
                         WithinRel((2.0 / 3.0) * std::pow(1.0 / 3.0, n), 1e-13));
    }
    SECTION("single-photon column at s=0, M=1") {
        for (int n = 0; n <= 12; ++n)
            REQUIRE_THAT(qnc::kernel_entry_auto(n, 1, 0.0, 1.0),
                         WithinRel((2.0 / 9.0) * (4.0 * n + 1.0) * std::pow(1.0 / 3.0, n), 1e-13));
    }
    SECTION("top row at s=0, M=1") {
        for (int m = 0; m <= 10; ++m)
            REQUIRE_THAT(qnc::kernel_entry_auto(0, m, 0.0, 1.0),
                         WithinRel((2.0 / 3.0) * std::pow(1.0 / 3.0, m), 1e-13));
    }
    SECTION("big-float path agrees with the exact-rational path") {
        for (int n : {0, 3, 11})
            for (int m : {0, 2, 7}) {
                double exact = qnc::kernel_entry_auto(n, m, 0.5, 2.0);
                double bf = qnc::detail::kernel_entry_bigfloat(n, m, 0.5, 2.0, 256);
                REQUIRE_THAT(bf, WithinRel(exact, 1e-14));
            }
        // non-integer mode number only has the big-float path
        double v = qnc::kernel_entry_auto(2, 1, 0.25, 1.5);
        REQUIRE(std::isfinite(v));
        REQUIRE_THAT(qnc::detail::kernel_entry_bigfloat(2, 1, 0.25, 1.5, 512),
                     WithinRel(v, 1e-13));
    }
    SECTION("insufficient working precision escalates") {
        REQUIRE_THROWS_AS(qnc::detail::kernel_entry_bigfloat(0, 25, -0.5, 1.0, 32),
                          qnc::PrecisionEscalation);
        REQUIRE(std::isfinite(qnc::detail::kernel_entry_bigfloat(0, 25, -0.5, 1.0, 160)));
    }
}

TEST_CASE("kernel matrices") {
    SECTION("normal ordering is the identity") {
        qnc::OrderingKernel k = qnc::build_kernel(1.0, 80.0, 12);
        REQUIRE(k.N_out >= k.N_in);
        for (int n = 0; n <= k.N_out; ++n)
            for (int m = 0; m <= k.N_in; ++m)
                REQUIRE(k.entry(n, m) == (n == m ? 1.0 : 0.0));
    }
    SECTION("columns are normalized after tail growth") {
        for (double s : {-0.5, 0.5}) {
            qnc::OrderingKernel k = qnc::build_kernel(s, 1.0, 10);
            REQUIRE(int(k.column_norm_residuals.size()) == k.N_in + 1);
            for (double r : k.column_norm_residuals) REQUIRE(r < 1e-9);
        }
        qnc::OrderingKernel k80 = qnc::build_kernel(0.5, 80.0, 30);
        for (double r : k80.column_norm_residuals) REQUIRE(r < 1e-9);
    }
    SECTION("row access agrees with the built matrix") {
        qnc::OrderingKernel k = qnc::build_kernel(-0.25, 2.0, 6);
        qnc::KernelRowCache rows(-0.25, 2.0, 6);
        for (int n : {0, 1, 5, 9}) {
            const auto& r = rows.row(n);
            for (int m = 0; m <= 6; ++m) REQUIRE_THAT(r[m], WithinAbs(k.entry(n, m), 1e-15));
        }
    }
}

TEST_CASE("thermal noise band") {
    SECTION("closed forms") {
        REQUIRE_THAT(qnc::mandel_rice(0, 0.7, 3.0), WithinRel(std::pow(1.7, -3.0), 1e-13));
        for (int n = 0; n <= 10; ++n)
            REQUIRE_THAT(qnc::mandel_rice(n, 0.5, 1.0),
                         WithinRel(std::pow(0.5, n) / std::pow(1.5, n + 1), 1e-13));
        REQUIRE(qnc::mandel_rice(0, 0.0, 4.0) == 1.0);
        REQUIRE(qnc::mandel_rice(3, 0.0, 4.0) == 0.0);
    }
    SECTION("80-mode band at unit mean sums to one") {
        double acc = 0.0;
        for (int n = 0; n < 800; ++n) acc += qnc::mandel_rice(n, 1.0, 80.0);
        REQUIRE_THAT(acc, WithinAbs(1.0, 1e-9));
        auto band = qnc::mandel_rice_band(1.0, 80.0);
        double mass = 0.0, mean = 0.0;
        for (std::size_t n = 0; n < band.size(); ++n) {
            mass += band[n];
            mean += double(n) * band[n];
        }
        REQUIRE_THAT(mass, WithinAbs(1.0, 1e-11));
        REQUIRE_THAT(mean, WithinRel(80.0, 1e-9));
    }
}

TEST_CASE("noise mixing") {
    std::mt19937_64 rng(5);
    JointPMF pmf = qt::random_pmf(rng, 4, 4);
    SECTION("zero noise is the identity") {
        JointPMF out = qnc::apply_noise(pmf, 0.0, 3.0);
        for (int a = 0; a <= pmf.cutoff_s(); ++a)
            for (int b = 0; b <= pmf.cutoff_i(); ++b) REQUIRE(out.at(a, b) == pmf.at(a, b));
    }
    SECTION("vacuum mixed with single-mode noise becomes a geometric product") {
        JointPMF vac = JointPMF::from_cells({{0, 0, 1.0}});
        JointPMF out = qnc::apply_noise(vac, 1.0, 1.0);
        for (int n = 0; n <= 8; ++n)
            for (int m = 0; m <= 8; ++m)
                REQUIRE_THAT(out.at(n, m),
                             WithinRel(std::pow(0.5, n + m + 2.0), 1e-11));
    }
    SECTION("mean grows by exactly M nu per arm") {
        double nu = 0.37, modes = 5.0;
        JointPMF out = qnc::apply_noise(pmf, nu, modes);
        REQUIRE_THAT(qnc::factorial_moment(out, 1, 0),
                     WithinAbs(qnc::factorial_moment(pmf, 1, 0) + modes * nu, 1e-9));
        REQUIRE_THAT(qnc::factorial_moment(out, 0, 1),
                     WithinAbs(qnc::factorial_moment(pmf, 0, 1) + modes * nu, 1e-9));
    }
    SECTION("two mixings match one total mixing in the first two moments") {
        double n1 = 0.2, n2 = 0.5, modes = 2.0;
        JointPMF twice = qnc::apply_noise(qnc::apply_noise(pmf, n1, modes), n2, modes);
        JointPMF once = qnc::apply_noise(pmf, n1 + n2, modes);
        for (auto [k, l] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}}) {
            REQUIRE_THAT(qnc::factorial_moment(twice, k, l),
                         WithinRel(qnc::factorial_moment(once, k, l), 1e-9));
        }
        // second moments agree only through the added-mean bookkeeping; check mean shift
        REQUIRE_THAT(qnc::factorial_moment(twice, 1, 0),
                     WithinAbs(qnc::factorial_moment(pmf, 1, 0) + modes * (n1 + n2), 1e-9));
    }
}

TEST_CASE("ordering transform of distributions") {
    std::mt19937_64 rng(9);
    JointPMF pmf = qt::random_pmf(rng, 4, 4);
    SECTION("s=1 leaves the distribution unchanged") {
        qnc::SignedTable t = qnc::apply_ordering(pmf, 1.0, 7.0);
        for (int a = 0; a <= pmf.cutoff_s(); ++a)
            for (int b = 0; b <= pmf.cutoff_i(); ++b) REQUIRE(t.at(a, b) == pmf.at(a, b));
    }
    SECTION("vacuum at s=0, M=1 becomes the geometric product") {
        JointPMF vac = JointPMF::from_cells({{0, 0, 1.0}});
        qnc::SignedTable t = qnc::apply_ordering(vac, 0.0, 1.0);
        for (int n = 0; n <= 10; ++n)
            for (int m = 0; m <= 10; ++m)
                REQUIRE_THAT(t.at(n, m),
                             WithinRel(4.0 / 9.0 * std::pow(1.0 / 3.0, n + m), 1e-12));
        REQUIRE_THAT(t.total(), WithinAbs(1.0, 1e-9));
    }
    SECTION("classical products stay nonnegative under smoothing") {
        // coherent product, mu = 1 per arm
        std::vector<std::tuple<int, int, double>> cells;
        double mass = 0.0;
        for (int a = 0; a <= 12; ++a)
            for (int b = 0; b <= 12; ++b) {
                double p = std::exp(-2.0) / (qnc::factorial_d(a) * qnc::factorial_d(b));
                cells.emplace_back(a, b, p);
                mass += p;
            }
        JointPMF coh = JointPMF::from_cells(cells, 1.0 - mass);
        qnc::SignedTable t = qnc::apply_ordering(coh, 0.5, 1.0);
        for (double x : t.v) REQUIRE(x >= -1e-12);
        REQUIRE_THAT(t.total(), WithinAbs(1.0, 1e-9));
    }
    SECTION("total signed mass stays 1") {
        qnc::SignedTable t = qnc::apply_ordering(pmf, -0.5, 2.0);
        REQUIRE_THAT(t.total(), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("moment transform duality") {
    // Factorial moments of the transformed table must equal the transformed
    // factorial moments: the distribution and moment pictures are two views of
    // one object. Checked at orders <= 4 on random pmfs.
    std::mt19937_64 rng(2026);
    for (int rep = 0; rep < 5; ++rep) {
        JointPMF pmf = qt::random_pmf(rng, 4, 4);
        qnc::MomentVector base = qnc::moments_of(pmf, 4);
        for (double s : {-0.5, 0.0, 0.5}) {
            for (double modes : {1.0, 3.0}) {
                qnc::MomentVector want = qnc::transform_moments(base, s, modes);
                qnc::SignedTable table = qnc::apply_ordering(pmf, s, modes);
                for (int k = 0; k <= 4; ++k)
                    for (int l = 0; l <= 4; ++l) {
                        double got = table.factorial_moment(k, l);
                        REQUIRE_THAT(got, WithinRel(want.at(k, l), 1e-6));
                    }
            }
        }
    }
    // one heavy spot check at the large mode number
    JointPMF pmf = qt::random_pmf(rng, 3, 3);
    qnc::MomentVector base = qnc::moments_of(pmf, 3);
    qnc::MomentVector want = qnc::transform_moments(base, -0.5, 80.0);
    qnc::SignedTable table = qnc::apply_ordering(pmf, -0.5, 80.0);
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l <= 3; ++l)
            REQUIRE_THAT(table.factorial_moment(k, l), WithinRel(want.at(k, l), 1e-6));
}

TEST_CASE("moment transform closed forms") {
    // vacuum: <W^k>_s = Gamma(k+M)/Gamma(M) h^k with h = (1-s)/2
    qnc::MomentVector vac;
    vac.max_order = 3;
    vac.ordering = 1.0;
    vac.v.assign(16, 0.0);
    vac.slot(0, 0) = 1.0;
    qnc::MomentVector tv = qnc::transform_moments(vac, 0.0, 1.0);
    REQUIRE_THAT(tv.at(1, 0), WithinRel(0.5, 1e-14));
    REQUIRE_THAT(tv.at(2, 0), WithinRel(0.5, 1e-14));   // Gamma(3)/Gamma(1) * (1/2)^2
    REQUIRE_THAT(tv.at(3, 0), WithinRel(0.75, 1e-14));  // 3! * (1/2)^3
    REQUIRE(tv.ordering == 0.0);
    // single photon on the signal arm: <W^2>_{s=0,M=1} = 5/2
    qnc::MomentVector one;
    one.max_order = 2;
    one.ordering = 1.0;
    one.v.assign(9, 0.0);
    one.slot(0, 0) = 1.0;
    one.slot(1, 0) = 1.0;  // <W_s> of |1>
    qnc::MomentVector to = qnc::transform_moments(one, 0.0, 1.0);
    REQUIRE_THAT(to.at(2, 0), WithinRel(2.5, 1e-14));
    // identity at s = 1
    qnc::MomentVector id = qnc::transform_moments(one, 1.0, 5.0);
    for (int k = 0; k <= 2; ++k)
        for (int l = 0; l <= 2; ++l) REQUIRE(id.at(k, l) == one.at(k, l));
}
