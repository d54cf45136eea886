// Unconditional and conditional measurement superoperators on the resonator,
// reserved-state arithmetic, and interval selection.

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qcool/fock.hpp"
#include "qcool/jc.hpp"

namespace qcool {

struct ReservedStateTable {
    struct Entry {
        int k = 0;
        int index = 0;    // nearest integer
        double exact = 0; // pre-rounding value
    };
    int n_r1 = 0;
    double tau_r = 0.0;
    std::vector<Entry> higher;
};

struct MeasurementOutcome {
    ResonatorPopulations post_state;  // normalized; weight = cumulative success
    double success_prob = 1.0;        // this measurement only
    bool conditional = false;
};

// tau_r = pi / Omega_{n_r1 + 1}; makes |alpha_{n_r1+1}(tau_r)|^2 = 1.
inline double reserved_interval(const PhysicalParams& params, int n_r1) {
    if (n_r1 < 0) throw std::invalid_argument("reserved_interval: n_r1 must be >= 0");
    return M_PI / rabi_frequency(params, n_r1 + 1).omega_n;
}

// n_r^(k) = k^2 (n_r1 + 1) + (k^2 - 1) Delta^2 / (4 g^2) - 1
inline ReservedStateTable higher_reserved_states(const PhysicalParams& params,
                                                 int n_r1, int k_max) {
    if (k_max < 2) throw std::invalid_argument("higher_reserved_states: k_max must be >= 2");
    ReservedStateTable table;
    table.n_r1 = n_r1;
    table.tau_r = reserved_interval(params, n_r1);
    const double ratio = params.detuning * params.detuning / (4.0 * params.g * params.g);
    for (int k = 2; k <= k_max; ++k) {
        const double kk = static_cast<double>(k) * k;
        const double exact = kk * (n_r1 + 1) + (kk - 1.0) * ratio - 1.0;
        table.higher.push_back({k, static_cast<int>(std::lround(exact)), exact});
    }
    return table;
}

// Smallest real n_r1 with n_r^(2)(n_r1) >= nbar + 4*dn, dn = sqrt(nbar+nbar^2).
// Inverts the k = 2 reserved-state formula; clamped at 0.
inline double min_first_reserved(const PhysicalParams& params, const ThermalSpec& spec) {
    if (spec.n_bar_th <= 0.0)
        return 0.0;
    const double nbar = spec.n_bar_th;
    const double dn = std::sqrt(nbar + nbar * nbar);
    const double target = nbar + 4.0 * dn;
    const double ratio = params.detuning * params.detuning / (4.0 * params.g * params.g);
    const double bound = (target + 1.0 - 3.0 * ratio) / 4.0 - 1.0;
    return std::max(0.0, bound);
}

// p'_n = p_n |alpha_{n+1}|^2 + p_{n-1} |beta_n|^2. Trace-preserving up to the
// cutoff leak p_{n_c}|beta_{n_c+1}|^2, which must stay below the guard.
inline MeasurementOutcome unconditional_map(const ResonatorPopulations& pops,
                                            const PhysicalParams& params, double tau) {
    const int n_c = pops.cutoff();
    if (std::abs(pops.sum() - 1.0) > 1e-6)
        throw std::invalid_argument("unconditional_map: input must be normalized");
    std::vector<double> a2(static_cast<std::size_t>(n_c) + 2);
    std::vector<double> b2(static_cast<std::size_t>(n_c) + 2);
    for (int n = 0; n <= n_c + 1; ++n) {
        const auto c = cooling_coeffs(params, n, tau);
        a2[static_cast<std::size_t>(n)] = std::norm(c.alpha);
        b2[static_cast<std::size_t>(n)] = std::norm(c.beta);
    }
    const double leak = pops.p[static_cast<std::size_t>(n_c)] * b2[static_cast<std::size_t>(n_c) + 1];
    if (leak > 1e-9)
        throw std::runtime_error("unconditional_map: population leaks past the cutoff; enlarge n_c");
    MeasurementOutcome out;
    out.conditional = false;
    out.success_prob = 1.0;
    out.post_state.p.assign(static_cast<std::size_t>(n_c) + 1, 0.0);
    out.post_state.weight = pops.weight;
    for (int n = 0; n <= n_c; ++n) {
        double v = pops.p[static_cast<std::size_t>(n)] * a2[static_cast<std::size_t>(n) + 1];
        if (n >= 1) v += pops.p[static_cast<std::size_t>(n) - 1] * b2[static_cast<std::size_t>(n)];
        out.post_state.p[static_cast<std::size_t>(n)] = v;
    }
    const double norm = out.post_state.sum();
    for (auto& v : out.post_state.p) v /= norm;
    return out;
}

// eta_n^(m) = p_n^(m) / p_n^(m-1); NaN marks an undefined ratio.
inline double transfer_ratio(const std::vector<ResonatorPopulations>& history,
                             int m, int n) {
    if (m < 1 || m >= static_cast<int>(history.size()))
        throw std::out_of_range("transfer_ratio: m outside history");
    const double prev = fidelity(history[static_cast<std::size_t>(m) - 1], n);
    const double cur = fidelity(history[static_cast<std::size_t>(m)], n);
    if (prev <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cur / prev;
}

// R(tau) = sum_{n>=1} e^{-i Delta tau/2} (-i g sqrt(n) sin(Omega_n tau)/Omega_n)
// |n-1><n|. The overall phase is fixed so R equals <e|U(tau)|g> entrywise; it
// drops out of every population quantity.
inline Eigen::MatrixXcd kraus_lowering(const PhysicalParams& params, double tau) {
    if (tau < 0.0) throw std::invalid_argument("kraus_lowering: tau must be >= 0");
    const int nq = params.n_c + 1;
    const Complex phase = std::exp(Complex(0.0, -0.5 * params.detuning * tau));
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(nq, nq);
    for (int n = 1; n <= params.n_c; ++n)
        r(n - 1, n) = phase * cooling_coeffs(params, n, tau).beta;
    return r;
}

// Unnormalized p'_{n-1} = |beta_n|^2 p_n; success probability is the dropped
// trace. The outcome carries the normalized state plus cumulative weight.
inline MeasurementOutcome conditional_map(const ResonatorPopulations& pops,
                                          const PhysicalParams& params, double tau) {
    const int n_c = pops.cutoff();
    MeasurementOutcome out;
    out.conditional = true;
    out.post_state.p.assign(static_cast<std::size_t>(n_c) + 1, 0.0);
    double success = 0.0;
    for (int n = 1; n <= n_c; ++n) {
        const double b2 = std::norm(cooling_coeffs(params, n, tau).beta);
        const double v = b2 * pops.p[static_cast<std::size_t>(n)];
        out.post_state.p[static_cast<std::size_t>(n) - 1] = v;
        success += v;
    }
    if (success < 1e-12)
        throw std::runtime_error("conditional_map: measurement almost surely fails");
    for (auto& v : out.post_state.p) v /= success;
    out.success_prob = success;
    out.post_state.weight = pops.weight * success;
    out.post_state.normalized = true;
    return out;
}

// tau_opt = pi / (2 Omega_{n_r}); maximizes |beta_{n_r}|^2.
inline double optimal_conditional_interval(const PhysicalParams& params, int n_r) {
    if (n_r < 1)
        throw std::invalid_argument("optimal_conditional_interval: n_r must be >= 1");
    return M_PI / (2.0 * rabi_frequency(params, n_r).omega_n);
}

}  // namespace qcool
