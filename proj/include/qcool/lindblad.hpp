// Lindblad master-equation integration for the free evolution between
// measurements. Dissipators act on the resonator mode only:
//   drho/dt = -i[H,rho] + gamma(nth+1) D[a] rho + gamma nth D[a^dag] rho,
//   D[A]rho = A rho A^dag - {A^dag A, rho}/2.

#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "qcool/composite.hpp"
#include "qcool/jc.hpp"
#include "qcool/measurement.hpp"

namespace qcool {

struct LindbladConfig {
    double gamma = 0.0;     // decoherence rate (rad/s)
    double n_bar_th = 0.0;  // bath occupation
    double dt = 0.0;        // fixed RK4 step (s)
};

enum class MeasurementKind { Unconditional, Conditional };

struct CompositeMeasurementOutcome {
    Eigen::MatrixXcd post;      // composite state with the qubit re-prepared
    double success_prob = 1.0;  // this measurement only
    bool conditional = false;
};

// Classical fixed-step 4th-order integrator over the truncated composite
// space. Caches the sparse Hamiltonian and resonator ladder structure.
class LindbladIntegrator {
  public:
    LindbladIntegrator(const PhysicalParams& params, const LindbladConfig& config)
        : params_(params), config_(config), nq_(params.n_c + 1) {
        if (config.dt <= 0.0)
            throw std::invalid_argument("LindbladIntegrator: dt must be > 0");
        if (config.gamma < 0.0)
            throw std::invalid_argument("LindbladIntegrator: gamma must be >= 0");
        const int d = 2 * nq_;
        std::vector<Eigen::Triplet<Complex>> trips;
        for (int n = 0; n <= params.n_c; ++n)
            if (params.detuning != 0.0)
                trips.emplace_back(nq_ + n, nq_ + n, Complex(params.detuning, 0.0));
        for (int n = 0; n < params.n_c; ++n) {
            const double gn = params.g * std::sqrt(static_cast<double>(n + 1));
            trips.emplace_back(nq_ + n, n + 1, Complex(gn, 0.0));
            trips.emplace_back(n + 1, nq_ + n, Complex(gn, 0.0));
        }
        h_.resize(d, d);
        h_.setFromTriplets(trips.begin(), trips.end());
        sqrtn_ = Eigen::VectorXd(nq_ - 1);
        for (int n = 1; n < nq_; ++n) sqrtn_(n - 1) = std::sqrt(static_cast<double>(n));
        num_ = Eigen::VectorXd::LinSpaced(nq_, 0.0, static_cast<double>(nq_ - 1));
    }

    Eigen::MatrixXcd rhs(const Eigen::MatrixXcd& rho) const {
        const int d = 2 * nq_;
        Eigen::MatrixXcd out(d, d);
        out.noalias() = Complex(0.0, -1.0) * (h_ * rho);
        out.noalias() += Complex(0.0, 1.0) * (rho * h_);
        if (config_.gamma > 0.0) add_dissipators(rho, out);
        return out;
    }

    // Integrates over tau with a uniform substep of at most dt; Hermitizes the
    // result and clips eigenvalue noise. Throws on trace drift beyond 1e-6.
    Eigen::MatrixXcd evolve(Eigen::MatrixXcd rho, double tau) {
        if (tau < 0.0) throw std::invalid_argument("evolve: tau must be >= 0");
        if (tau == 0.0) return rho;
        const double tr0 = rho.trace().real();
        const int steps = std::max(1, static_cast<int>(std::ceil(tau / config_.dt)));
        const double h = tau / steps;
        Eigen::MatrixXcd k1, k2, k3, k4;
        for (int s = 0; s < steps; ++s) {
            k1 = rhs(rho);
            k2 = rhs(rho + (0.5 * h) * k1);
            k3 = rhs(rho + (0.5 * h) * k2);
            k4 = rhs(rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        const double tr1 = rho.trace().real();
        if (std::abs(tr1 - tr0) > 1e-6 * std::max(1.0, std::abs(tr0)))
            throw std::runtime_error("evolve: trace drift exceeds 1e-6; reduce dt");
        rho = 0.5 * (rho + rho.adjoint().eval());
        clip_negative_eigenvalues(rho);
        return rho;
    }

    int clip_warnings() const { return clip_warnings_; }

  private:
    void add_dissipators(const Eigen::MatrixXcd& rho, Eigen::MatrixXcd& out) const {
        const double gdown = config_.gamma * (config_.n_bar_th + 1.0);
        const double gup = config_.gamma * config_.n_bar_th;
        for (int q = 0; q < 2; ++q) {
            for (int qp = 0; qp < 2; ++qp) {
                const auto blk = rho.block(q * nq_, qp * nq_, nq_, nq_);
                auto oblk = out.block(q * nq_, qp * nq_, nq_, nq_);
                // a rho a^dag : shift toward lower indices, scaled by sqrt(n)
                oblk.topLeftCorner(nq_ - 1, nq_ - 1).noalias() +=
                    gdown * (sqrtn_.asDiagonal() * blk.bottomRightCorner(nq_ - 1, nq_ - 1) *
                             sqrtn_.asDiagonal());
                if (gup > 0.0)
                    oblk.bottomRightCorner(nq_ - 1, nq_ - 1).noalias() +=
                        gup * (sqrtn_.asDiagonal() * blk.topLeftCorner(nq_ - 1, nq_ - 1) *
                               sqrtn_.asDiagonal());
                // -{A^dag A, rho}/2 with a^dag a = n and, for the truncated
                // raising operator, a a^dag = n+1 except 0 at the top level
                // (keeps the truncated generator trace-free)
                Eigen::VectorXd aad = (num_.array() + 1.0).matrix();
                aad(nq_ - 1) = 0.0;
                const Eigen::VectorXd anti = 0.5 * (gdown * num_ + gup * aad);
                oblk.noalias() -= anti.asDiagonal() * blk;
                oblk.noalias() -= blk * anti.asDiagonal();
            }
        }
    }

    void clip_negative_eigenvalues(Eigen::MatrixXcd& rho) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        const auto& ev = es.eigenvalues();
        if (ev.minCoeff() >= 0.0) return;
        if (ev.minCoeff() < -1e-6)
            throw std::runtime_error("evolve: state lost positivity; reduce dt");
        Eigen::VectorXd clipped = ev;
        for (int i = 0; i < clipped.size(); ++i) {
            if (clipped(i) < 0.0) {
                clipped(i) = 0.0;
                if (ev(i) < -1e-10) ++clip_warnings_;
            }
        }
        rho = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    }

    PhysicalParams params_;
    LindbladConfig config_;
    int nq_;
    Eigen::SparseMatrix<Complex> h_;
    Eigen::VectorXd sqrtn_;
    Eigen::VectorXd num_;
    int clip_warnings_ = 0;
};

inline Eigen::MatrixXcd lindblad_rhs(const Eigen::MatrixXcd& rho,
                                     const PhysicalParams& params,
                                     const LindbladConfig& config) {
    LindbladConfig c = config;
    if (c.dt <= 0.0) c.dt = 1.0;  // rhs alone does not step
    return LindbladIntegrator(params, c).rhs(rho);
}

inline Eigen::MatrixXcd evolve(const Eigen::MatrixXcd& rho, const PhysicalParams& params,
                               const LindbladConfig& config, double tau) {
    return LindbladIntegrator(params, config).evolve(rho, tau);
}

// Free dissipative evolution for tau followed by a qubit measurement.
// Unconditional: trace out the qubit (outcome discarded), success = 1.
// Conditional: keep the <e|.|e> block, success = its trace.
// Either way the qubit is re-prepared in `prep` for the next round.
inline CompositeMeasurementOutcome measured_evolution(const Eigen::MatrixXcd& rho,
                                                      const PhysicalParams& params,
                                                      const LindbladConfig& config,
                                                      double tau, MeasurementKind kind,
                                                      QubitState prep,
                                                      LindbladIntegrator* integrator = nullptr) {
    Eigen::MatrixXcd evolved;
    if (integrator != nullptr) {
        evolved = integrator->evolve(rho, tau);
    } else {
        LindbladIntegrator own(params, config);
        evolved = own.evolve(rho, tau);
    }
    const int nq = params.n_c + 1;
    CompositeMeasurementOutcome out;
    if (kind == MeasurementKind::Unconditional) {
        out.conditional = false;
        out.success_prob = 1.0;
        out.post = prepare_qubit(params, prep, partial_trace_qubit(params, evolved));
    } else {
        out.conditional = true;
        Eigen::MatrixXcd rb = evolved.bottomRightCorner(nq, nq);
        const double p = rb.trace().real();
        if (p < 1e-12)
            throw std::runtime_error("measured_evolution: measurement almost surely fails");
        out.success_prob = p;
        out.post = prepare_qubit(params, prep, (rb / p).eval());
    }
    return out;
}

}  // namespace qcool
