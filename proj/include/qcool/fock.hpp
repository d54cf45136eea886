// Fock-space population vectors, thermal-state construction, and state metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcool/params.hpp"

namespace qcool {

struct ThermalSpec {
    double n_bar_th = 0.0;  // Bose-Einstein average occupation

    ThermalSpec() = default;
    explicit ThermalSpec(double nbar) : n_bar_th(nbar) {
        if (nbar < 0.0) throw std::invalid_argument("ThermalSpec: n_bar_th must be >= 0");
    }
};

// Diagonal Fock-space occupation vector. `weight` is the accumulated success
// probability of the conditional measurements that produced the state, so
// unnormalized outcomes compose without renormalization surprises.
struct ResonatorPopulations {
    std::vector<double> p;
    double weight = 1.0;
    bool normalized = true;

    int cutoff() const { return static_cast<int>(p.size()) - 1; }

    double sum() const { return std::accumulate(p.begin(), p.end(), 0.0); }

    static ResonatorPopulations fock(int n, int n_c) {
        if (n < 0 || n > n_c) throw std::out_of_range("fock: index outside cutoff");
        ResonatorPopulations out;
        out.p.assign(static_cast<std::size_t>(n_c) + 1, 0.0);
        out.p[static_cast<std::size_t>(n)] = 1.0;
        return out;
    }
};

// n_bar = 1/(e^{hbar omega_b / kB T} - 1); the T = 0 limit is 0, not an error.
inline ThermalSpec thermal_occupation(const PhysicalParams& params) {
    if (params.omega_b <= 0.0)
        throw std::invalid_argument("thermal_occupation: omega_b must be > 0");
    if (params.temperature < 0.0)
        throw std::invalid_argument("thermal_occupation: T must be >= 0");
    if (params.temperature == 0.0) return ThermalSpec(0.0);
    const double x = kHbar * params.omega_b / (kBoltzmann * params.temperature);
    return ThermalSpec(1.0 / std::expm1(x));
}

// Smallest cutoff that keeps the thermal tail below `loss_tol`, combined with
// the 10-sigma rule so the second-reserved-state dynamics stay inside the
// truncated space.
inline int default_fock_cutoff(const ThermalSpec& spec, double loss_tol = 1e-8) {
    const double nbar = spec.n_bar_th;
    const double dn = std::sqrt(nbar + nbar * nbar);
    int n_c = std::max(40, static_cast<int>(std::ceil(nbar + 10.0 * dn)));
    if (nbar > 0.0) {
        const double q = nbar / (1.0 + nbar);
        // tail mass beyond n_c is q^{n_c+1}
        const int n_loss = static_cast<int>(std::ceil(std::log(loss_tol) / std::log(q))) ;
        n_c = std::max(n_c, n_loss);
    }
    return n_c;
}

// p[n] proportional to (nbar/(1+nbar))^n, renormalized over the truncated space.
inline ResonatorPopulations thermal_state(const ThermalSpec& spec, int n_c,
                                          double loss_tol = 1e-8) {
    if (n_c < 1) throw std::invalid_argument("thermal_state: n_c must be >= 1");
    const double nbar = spec.n_bar_th;
    ResonatorPopulations out;
    out.p.assign(static_cast<std::size_t>(n_c) + 1, 0.0);
    if (nbar == 0.0) {
        out.p[0] = 1.0;
        return out;
    }
    const double q = nbar / (1.0 + nbar);
    const double tail = std::pow(q, n_c + 1);
    if (tail >= loss_tol) {
        throw std::invalid_argument(
            "thermal_state: truncation loss " + std::to_string(tail) +
            " exceeds tolerance; enlarge n_c (need at least " +
            std::to_string(default_fock_cutoff(spec, loss_tol)) + ")");
    }
    double norm = 0.0;
    double term = 1.0;
    for (int n = 0; n <= n_c; ++n) {
        out.p[static_cast<std::size_t>(n)] = term;
        norm += term;
        term *= q;
    }
    for (auto& v : out.p) v /= norm;
    return out;
}

// Exact partial geometric sum P(N) = 1 - (nbar/(1+nbar))^{N+1}.
inline double accumulated_population(const ThermalSpec& spec, int N) {
    if (N < 0) throw std::invalid_argument("accumulated_population: N must be >= 0");
    if (spec.n_bar_th == 0.0) return 1.0;
    const double q = spec.n_bar_th / (1.0 + spec.n_bar_th);
    return 1.0 - std::pow(q, N + 1);
}

inline double average_occupation(const ResonatorPopulations& pops) {
    if (!pops.normalized || std::abs(pops.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("average_occupation: populations must be normalized");
    double nbar = 0.0;
    for (std::size_t n = 0; n < pops.p.size(); ++n)
        nbar += static_cast<double>(n) * pops.p[n];
    return nbar;
}

// <n|rho_b|n> for a diagonal state: just the population entry.
inline double fidelity(const ResonatorPopulations& pops, int n) {
    if (n < 0 || n > pops.cutoff())
        throw std::out_of_range("fidelity: Fock index outside cutoff");
    return pops.p[static_cast<std::size_t>(n)];
}

}  // namespace qcool
