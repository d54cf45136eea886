// Physical constants and model parameters shared by every module.

#pragma once

#include <stdexcept>

namespace qcool {

inline constexpr double kHbar = 1.054571817e-34;      // J s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K

// All model constants of the qubit-resonator system. Frequencies are angular
// (rad/s); the detuning is omega_e - omega_b.
struct PhysicalParams {
    double omega_b = 0.0;      // resonator frequency (rad/s)
    double detuning = 0.0;     // qubit-resonator detuning (rad/s)
    double g = 0.0;            // JC coupling strength (rad/s)
    double temperature = 0.0;  // bath temperature (K)
    double gamma = 0.0;        // resonator decoherence rate (rad/s)
    int n_c = 1;               // Fock-space cutoff

    void validate() const {
        if (g <= 0.0) throw std::invalid_argument("PhysicalParams: g must be > 0");
        if (n_c < 1) throw std::invalid_argument("PhysicalParams: n_c must be >= 1");
        if (gamma < 0.0) throw std::invalid_argument("PhysicalParams: gamma must be >= 0");
        if (temperature < 0.0) throw std::invalid_argument("PhysicalParams: T must be >= 0");
    }
};

// Gigahertz nanomechanical setup used throughout the CLI defaults.
inline PhysicalParams nanomechanical_params(double g_ratio = 0.04,
                                            double detuning_ratio = 0.02,
                                            double gamma_ratio = 0.0,
                                            double temperature = 0.1,
                                            int n_c = 1) {
    PhysicalParams p;
    p.omega_b = 3.7e9;
    p.g = g_ratio * p.omega_b;
    p.detuning = detuning_ratio * p.omega_b;
    p.gamma = gamma_ratio * p.omega_b;
    p.temperature = temperature;
    p.n_c = n_c;
    return p;
}

}  // namespace qcool
