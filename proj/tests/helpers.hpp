#pragma once
// Shared fixtures for the test suite: deterministic random distributions and the
// small hand-evaluated joint distributions used as closed-form oracles.

#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "qnc/pmf.hpp"

namespace qt {

/// Random normalized joint pmf on the grid [0,max_ns] x [0,max_ni] with a
/// guaranteed vacuum cell (criterion probability forms divide sign by p(0,0)).
inline qnc::JointPMF random_pmf(std::mt19937_64& rng, int max_ns = 5, int max_ni = 5,
                                double min_vacuum = 0.05) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::tuple<int, int, double>> cells;
    double total = 0.0;
    for (int a = 0; a <= max_ns; ++a)
        for (int b = 0; b <= max_ni; ++b) {
            double w = u(rng);
            if (a == 0 && b == 0) w += min_vacuum * double(max_ns + 1) * double(max_ni + 1);
            cells.emplace_back(a, b, w);
            total += w;
        }
    for (auto& [a, b, w] : cells) w /= total;
    return qnc::JointPMF::from_cells(cells);
}

/// Coherent (Poissonian) product field with per-arm means, truncated far out.
inline qnc::JointPMF poisson_product_pmf(double mu_s, double mu_i, int cutoff = 30) {
    std::vector<std::tuple<int, int, double>> cells;
    double mass = 0.0;
    auto pois = [](int n, double mu) {
        return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
    };
    for (int a = 0; a <= cutoff; ++a)
        for (int b = 0; b <= cutoff; ++b) {
            double p = pois(a, mu_s) * pois(b, mu_i);
            cells.emplace_back(a, b, p);
            mass += p;
        }
    return qnc::JointPMF::from_cells(cells, 1.0 - mass);
}

/// Multimode-thermal product field (same band on both arms), truncated far out.
inline qnc::JointPMF thermal_product_pmf(double nu, double modes, int cutoff = 40) {
    std::vector<std::tuple<int, int, double>> cells;
    double mass = 0.0;
    auto th = [](int n, double nu, double M) {
        return std::exp(std::lgamma(n + M) - std::lgamma(n + 1.0) - std::lgamma(M) +
                        n * std::log(nu) - (n + M) * std::log1p(nu));
    };
    for (int a = 0; a <= cutoff; ++a)
        for (int b = 0; b <= cutoff; ++b) {
            double p = th(a, nu, modes) * th(b, nu, modes);
            cells.emplace_back(a, b, p);
            mass += p;
        }
    return qnc::JointPMF::from_cells(cells, 1.0 - mass);
}

/// Sparse random pmf (random subset of cells) with vacuum mass.
inline qnc::JointPMF random_sparse_pmf(std::mt19937_64& rng, int max_n = 5) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::tuple<int, int, double>> cells;
    double total = 0.0;
    for (int a = 0; a <= max_n; ++a)
        for (int b = 0; b <= max_n; ++b) {
            if (u(rng) < 0.5 && !(a == 0 && b == 0)) continue;
            double w = u(rng) + ((a == 0 && b == 0) ? 2.0 : 0.0);
            cells.emplace_back(a, b, w);
            total += w;
        }
    for (auto& [a, b, w] : cells) w /= total;
    return qnc::JointPMF::from_cells(cells);
}

// ---- Hand-evaluated oracle distributions -----------------------------------
// The expected catalog-criterion values on these pmfs were computed by hand from
// the printed closed forms and are frozen in test_catalog.cpp.

/// P1: four low cells. p00=0.4 p10=0.2 p01=0.1 p11=0.3
inline qnc::JointPMF pmf_P1() {
    return qnc::JointPMF::from_cells({{0, 0, 0.4}, {1, 0, 0.2}, {0, 1, 0.1}, {1, 1, 0.3}});
}

/// P2: third-order cells. p00=0.7 p30=0.1 p12=0.1 p21=0.1
inline qnc::JointPMF pmf_P2() {
    return qnc::JointPMF::from_cells({{0, 0, 0.7}, {3, 0, 0.1}, {1, 2, 0.1}, {2, 1, 0.1}});
}

/// P3: mixed cells up to (2,2). p20=0.2 p22=0.1 p02=0.1 p21=0.1 p10=0.2 p11=0.1 p00=0.2
inline qnc::JointPMF pmf_P3() {
    return qnc::JointPMF::from_cells({{2, 0, 0.2}, {2, 2, 0.1}, {0, 2, 0.1}, {2, 1, 0.1},
                                      {1, 0, 0.2}, {1, 1, 0.1}, {0, 0, 0.2}});
}

/// P4: fourth-order band. p00=0.5 p40=0.1 p22=0.1 p04=0.1 p31=0.1 p13=0.1
inline qnc::JointPMF pmf_P4() {
    return qnc::JointPMF::from_cells(
        {{0, 0, 0.5}, {4, 0, 0.1}, {2, 2, 0.1}, {0, 4, 0.1}, {3, 1, 0.1}, {1, 3, 0.1}});
}

/// P5: fifth-order band. p00=0.5 p50=0.05 p05=0.05 p32=0.1 p23=0.1 p41=0.1 p14=0.1
inline qnc::JointPMF pmf_P5() {
    return qnc::JointPMF::from_cells({{0, 0, 0.5}, {5, 0, 0.05}, {0, 5, 0.05}, {3, 2, 0.1},
                                      {2, 3, 0.1}, {4, 1, 0.1}, {1, 4, 0.1}});
}

/// P6: Cauchy-Schwarz cells. p00=0.3 p12=0.1 p10=0.2 p11=0.2 p21=0.1 p01=0.1
inline qnc::JointPMF pmf_P6() {
    return qnc::JointPMF::from_cells(
        {{0, 0, 0.3}, {1, 2, 0.1}, {1, 0, 0.2}, {1, 1, 0.2}, {2, 1, 0.1}, {0, 1, 0.1}});
}

}  // namespace qt
