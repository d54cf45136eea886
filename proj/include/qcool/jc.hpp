// Exact Jaynes-Cummings block propagators and the cooling coefficients that
// drive all measurement maps. Rotating frame with respect to
// omega_b(|e><e| + b^dag b); H = Delta|e><e| + g(b^dag s_- + b s_+).

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "qcool/params.hpp"

namespace qcool {

using Complex = std::complex<double>;

struct RabiFrequency {
    double omega_n = 0.0;  // rad/s
    int n = 0;
};

// alpha_n, beta_n of the n-excitation block; |alpha|^2 + |beta|^2 = 1.
struct CoolingCoefficients {
    Complex alpha{1.0, 0.0};
    Complex beta{0.0, 0.0};
    int n = 0;
    double tau = 0.0;
};

// Omega_n = sqrt(g^2 n + Delta^2/4)
inline RabiFrequency rabi_frequency(const PhysicalParams& params, int n) {
    if (n < 0) throw std::invalid_argument("rabi_frequency: n must be >= 0");
    const double d2 = params.detuning * params.detuning / 4.0;
    return {std::sqrt(params.g * params.g * n + d2), n};
}

// alpha_n = cos(Omega_n tau) + i Delta sin(Omega_n tau)/(2 Omega_n)
// beta_n  = -i g sqrt(n) sin(Omega_n tau)/Omega_n
inline CoolingCoefficients cooling_coeffs(const PhysicalParams& params, int n,
                                          double tau) {
    if (n < 0) throw std::invalid_argument("cooling_coeffs: n must be >= 0");
    if (tau < 0.0) throw std::invalid_argument("cooling_coeffs: tau must be >= 0");
    const double omega = rabi_frequency(params, n).omega_n;
    // sin(Omega tau)/Omega, continuous at Omega = 0
    const double sinc = (omega > 0.0) ? std::sin(omega * tau) / omega : tau;
    CoolingCoefficients c;
    c.n = n;
    c.tau = tau;
    c.alpha = Complex(std::cos(omega * tau), 0.5 * params.detuning * sinc);
    c.beta = Complex(0.0, -params.g * std::sqrt(static_cast<double>(n)) * sinc);
    return c;
}

// Propagator on the block spanned by {|e,n-1>, |g,n>}, n >= 1:
// e^{-i Delta tau/2} [[alpha_n^*, beta_n], [beta_n, alpha_n]].
// (In the reversed ordering {|g,n>, |e,n-1>} this is the familiar
// [[alpha, beta], [beta, alpha^*]] form.)
inline Eigen::Matrix2cd propagator_block(const PhysicalParams& params, int n,
                                         double tau) {
    if (n < 1) throw std::invalid_argument("propagator_block: n must be >= 1");
    const auto c = cooling_coeffs(params, n, tau);
    const Complex phase = std::exp(Complex(0.0, -0.5 * params.detuning * tau));
    Eigen::Matrix2cd u;
    u << phase * std::conj(c.alpha), phase * c.beta,
         phase * c.beta, phase * c.alpha;
    return u;
}

enum class QubitState { Ground, Excited };

// Composite index convention: |q,n> -> q*(n_c+1) + n with q = 0 ground, 1 excited.
inline int composite_dim(const PhysicalParams& params) { return 2 * (params.n_c + 1); }

inline int composite_index(const PhysicalParams& params, QubitState q, int n) {
    return (q == QubitState::Excited ? params.n_c + 1 : 0) + n;
}

// Dense unitary of the truncated JC Hamiltonian. Block-diagonal assembly:
// |g,0> is an uncoupled identity block; the top excited state |e,n_c> loses
// its partner to truncation and evolves by the bare phase e^{-i Delta tau}.
inline Eigen::MatrixXcd full_propagator(const PhysicalParams& params, double tau) {
    if (tau < 0.0) throw std::invalid_argument("full_propagator: tau must be >= 0");
    const int nq = params.n_c + 1;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(2 * nq, 2 * nq);
    u(0, 0) = 1.0;  // |g,0>
    for (int n = 1; n <= params.n_c; ++n) {
        const auto blk = propagator_block(params, n, tau);
        const int ie = composite_index(params, QubitState::Excited, n - 1);
        const int ig = composite_index(params, QubitState::Ground, n);
        u(ie, ie) = blk(0, 0);
        u(ie, ig) = blk(0, 1);
        u(ig, ie) = blk(1, 0);
        u(ig, ig) = blk(1, 1);
    }
    const int top = composite_index(params, QubitState::Excited, params.n_c);
    u(top, top) = std::exp(Complex(0.0, -params.detuning * tau));
    return u;
}

// Rotating-frame JC Hamiltonian on the truncated composite space (rad/s).
inline Eigen::MatrixXcd jc_hamiltonian(const PhysicalParams& params) {
    const int nq = params.n_c + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(2 * nq, 2 * nq);
    for (int n = 0; n <= params.n_c; ++n)
        h(nq + n, nq + n) = params.detuning;
    for (int n = 0; n < params.n_c; ++n) {
        const double gn = params.g * std::sqrt(static_cast<double>(n + 1));
        h(nq + n, n + 1) = gn;  // <e,n|H|g,n+1>
        h(n + 1, nq + n) = gn;
    }
    return h;
}

}  // namespace qcool
