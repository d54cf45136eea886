// Embedding diagonal resonator states into the composite qubit (x) resonator
// space and tracing back out.

#pragma once

#include <Eigen/Dense>

#include "qcool/fock.hpp"
#include "qcool/jc.hpp"

namespace qcool {

// |q><q| (x) diag(p)
inline Eigen::MatrixXcd embed_composite(const PhysicalParams& params, QubitState q,
                                        const ResonatorPopulations& pops) {
    const int nq = params.n_c + 1;
    if (pops.cutoff() != params.n_c)
        throw std::invalid_argument("embed_composite: cutoff mismatch");
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2 * nq, 2 * nq);
    const int off = (q == QubitState::Excited) ? nq : 0;
    for (int n = 0; n <= params.n_c; ++n)
        rho(off + n, off + n) = pops.p[static_cast<std::size_t>(n)];
    return rho;
}

// Resonator reduced density matrix: sum of the two qubit-diagonal blocks.
inline Eigen::MatrixXcd partial_trace_qubit(const PhysicalParams& params,
                                            const Eigen::MatrixXcd& rho) {
    const int nq = params.n_c + 1;
    return rho.topLeftCorner(nq, nq) + rho.bottomRightCorner(nq, nq);
}

// |q><q| (x) rho_b
inline Eigen::MatrixXcd prepare_qubit(const PhysicalParams& params, QubitState q,
                                      const Eigen::MatrixXcd& rho_b) {
    const int nq = params.n_c + 1;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2 * nq, 2 * nq);
    const int off = (q == QubitState::Excited) ? nq : 0;
    rho.block(off, off, nq, nq) = rho_b;
    return rho;
}

// Diagonal of the resonator reduced state. The weight records the (possibly
// sub-unit) trace so conditional outcomes stay composable.
inline ResonatorPopulations resonator_populations(const PhysicalParams& params,
                                                  const Eigen::MatrixXcd& rho) {
    const auto rb = partial_trace_qubit(params, rho);
    ResonatorPopulations out;
    out.p.resize(static_cast<std::size_t>(params.n_c) + 1);
    for (int n = 0; n <= params.n_c; ++n)
        out.p[static_cast<std::size_t>(n)] = rb(n, n).real();
    out.weight = out.sum();
    out.normalized = std::abs(out.weight - 1.0) <= 1e-9;
    return out;
}

}  // namespace qcool
