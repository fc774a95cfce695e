#pragma once

// Synthetic bipartite fields: an ideal photon-pair source (perfectly
// correlated multimode chaotic diagonal), classical product controls
// (coherent and multimode-thermal), and the pair source degraded by
// independent chaotic noise on each arm.
//
// Default cutoffs give mean + 10 standard deviations of headroom per arm —
// ordering transforms shift mass upward, so generous margins are needed —
// and then keep growing until the missing tail drops below the generator
// tail tolerance.  Truncated mass is always recorded, never hidden.

#include <cmath>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "pmf.hpp"

namespace qnc {

/// Tail tolerance for generator-chosen cutoffs; tight enough that a few
/// convolved components stay within a 1e-12 overall truncation deficit.
inline constexpr double kGeneratorTailTol = 1e-13;

namespace detail {

inline void check_mean_modes(double mean, double modes) {
    if (mean < 0.0) throw ValidationError("mean photon number must be nonnegative");
    if (!(modes >= 1.0)) throw ValidationError("mode number must be at least 1");
}

/// One-dimensional counting band. With cutoff < 0 the band starts at
/// mean + 10 stddev and grows until the missing tail is below the generator
/// tolerance; otherwise exactly cutoff + 1 weights are emitted.
template <class Weight>
std::vector<double> counting_band(Weight&& w, double mean, double stddev, int cutoff) {
    std::vector<double> band;
    if (cutoff >= 0) {
        for (int n = 0; n <= cutoff; ++n) band.push_back(w(n));
        return band;
    }
    int headroom = int(std::ceil(mean + 10.0 * stddev));
    double cum = 0.0;
    for (int n = 0;; ++n) {
        if (n > 10000000) throw Error("counting band failed to close");
        double p = w(n);
        band.push_back(p);
        cum += p;
        if (n >= headroom && 1.0 - cum < kGeneratorTailTol) break;
    }
    return band;
}

inline double poisson_weight(int n, double mu) {
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

}  // namespace detail

/// Ideal pair source: B mean photon pairs spread over Mp modes, photocounts
/// perfectly correlated across the arms. Marginals are exactly the Mp-mode
/// chaotic counting distribution with mean B.
inline JointPMF gen_ideal_twin(double B, double Mp, int cutoff = -1) {
    detail::check_mean_modes(B, Mp);
    double nu = B / Mp;
    std::vector<double> diag = detail::counting_band(
        [&](int n) { return mandel_rice(n, nu, Mp); }, B, std::sqrt(B * (1.0 + nu)),
        cutoff);
    std::vector<std::tuple<int, int, double>> cells;
    double mass = 0.0;
    for (std::size_t n = 0; n < diag.size(); ++n) {
        cells.emplace_back(int(n), int(n), diag[n]);
        mass += diag[n];
    }
    return JointPMF::from_cells(cells, 1.0 - mass);
}

namespace detail {

inline JointPMF product_pmf(const std::vector<double>& band_s,
                            const std::vector<double>& band_i) {
    std::vector<std::vector<double>> rows(band_s.size());
    double mass = 0.0;
    for (std::size_t a = 0; a < band_s.size(); ++a) {
        rows[a].resize(band_i.size());
        for (std::size_t b = 0; b < band_i.size(); ++b) {
            rows[a][b] = band_s[a] * band_i[b];
            mass += rows[a][b];
        }
    }
    return JointPMF::from_dense(rows, 1.0 - mass);
}

}  // namespace detail

/// Independent coherent (Poissonian) beams with the given per-arm means.
inline JointPMF gen_coherent_product(double mu_s, double mu_i, int cutoff = -1) {
    detail::check_mean_modes(mu_s, 1.0);
    detail::check_mean_modes(mu_i, 1.0);
    auto band = [&](double mu) {
        return detail::counting_band([&](int n) { return detail::poisson_weight(n, mu); },
                                     mu, std::sqrt(mu), cutoff);
    };
    return detail::product_pmf(band(mu_s), band(mu_i));
}

/// Independent multimode chaotic beams: nu photons per mode over M modes on
/// each arm.
inline JointPMF gen_thermal_product(double nu_s, double Ms, double nu_i, double Mi,
                                    int cutoff = -1) {
    detail::check_mean_modes(nu_s, Ms);
    detail::check_mean_modes(nu_i, Mi);
    auto band = [&](double nu, double M) {
        double mean = M * nu;
        return detail::counting_band([&](int n) { return mandel_rice(n, nu, M); }, mean,
                                     std::sqrt(mean * (1.0 + nu)), cutoff);
    };
    return detail::product_pmf(band(nu_s, Ms), band(nu_i, Mi));
}

/// Pair source degraded by independent chaotic noise per arm. Noise is given
/// as (total mean, modes); zero mean leaves the arm untouched.
inline JointPMF gen_noisy_twin(double B, double Mp, std::pair<double, double> noise_s,
                               std::pair<double, double> noise_i, int cutoff = -1) {
    detail::check_mean_modes(noise_s.first, noise_s.second);
    detail::check_mean_modes(noise_i.first, noise_i.second);
    auto band = [](const std::pair<double, double>& n) {
        return mandel_rice_band(n.first / n.second, n.second, kGeneratorTailTol);
    };
    return convolve(gen_ideal_twin(B, Mp, cutoff), band(noise_s), band(noise_i));
}

}  // namespace qnc
