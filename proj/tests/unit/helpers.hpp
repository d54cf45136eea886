#pragma once

#include <Eigen/Dense>

#include "qcool/params.hpp"
#include "qcool/jc.hpp"

namespace qcool::testutil {

// Paper-style parameters at a reduced cutoff for fast tests.
inline PhysicalParams small_params(int n_c = 30) {
    auto p = nanomechanical_params();
    p.temperature = 0.02;  // n_bar ~ 0.32 keeps the thermal tail inside n_c = 30
    p.n_c = n_c;
    return p;
}

// Matrix-exponential oracle for the truncated JC propagator, built from the
// eigendecomposition of the (Hermitian) Hamiltonian.
inline Eigen::MatrixXcd expm_propagator(const PhysicalParams& p, double tau) {
    const Eigen::MatrixXcd h = jc_hamiltonian(p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const Eigen::VectorXcd phases =
        (Complex(0.0, -tau) * es.eigenvalues().cast<Complex>().array()).exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qcool::testutil
