// End-to-end two-step cooling protocol: M unconditional rounds reshape the
// thermal state onto the reserved Fock state, then n_r conditional rounds walk
// the population down to the ground state. Supports closed-system population
// dynamics and the Lindblad full-matrix variant.

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qcool/composite.hpp"
#include "qcool/fock.hpp"
#include "qcool/lindblad.hpp"
#include "qcool/measurement.hpp"
#include "qcool/ppo.hpp"
#include "qcool/schedule.hpp"

namespace qcool {

enum class ScheduleSource { Equal, Beam, Train, File };

struct ProtocolConfig {
    PhysicalParams params;
    int n_r = 10;
    int rounds = 30;  // M
    ScheduleSource schedule_source = ScheduleSource::Beam;
    std::vector<int> schedule;  // interval multiples; required for File source
    int beam_width = 64;
    TrainConfig train;
    bool open_system = false;
    LindbladConfig lindblad;  // dt <= 0 selects tau_r/2000
    bool strict_reserved_bound = false;
    std::optional<int> initial_fock;  // bypass the thermal state (step-2 studies)
    unsigned seed = 0;
    std::string out_dir;
};

struct ProtocolResult {
    std::vector<ResonatorPopulations> snapshots;  // M + n_r + 1 entries
    double final_fidelity = 0.0;
    double final_nbar = 0.0;
    double success_prob = 1.0;
    std::vector<int> schedule;
    double wall_seconds = 0.0;
};

// Resolves the step-1 schedule according to the configured source.
inline std::vector<int> resolve_schedule(const ProtocolConfig& cfg) {
    switch (cfg.schedule_source) {
        case ScheduleSource::Equal:
            return equal_spacing_schedule(cfg.rounds);
        case ScheduleSource::Beam:
            return cfg.rounds == 0 ? std::vector<int>{}
                                   : beam_search_schedule(cfg.params, cfg.n_r, cfg.rounds,
                                                          cfg.beam_width, cfg.train.actions);
        case ScheduleSource::Train: {
            TrainConfig tc = cfg.train;
            tc.trajectory_len = cfg.rounds;
            tc.seed = cfg.seed;
            return train(cfg.params, cfg.n_r, tc).best_schedule;
        }
        case ScheduleSource::File:
            return cfg.schedule;
    }
    throw std::logic_error("resolve_schedule: unknown source");
}

namespace detail {

inline ProtocolResult run_closed(const ProtocolConfig& cfg,
                                 const std::vector<int>& schedule) {
    ProtocolResult result;
    result.schedule = schedule;
    ResonatorPopulations pops =
        cfg.initial_fock ? ResonatorPopulations::fock(*cfg.initial_fock, cfg.params.n_c)
                         : thermal_state(thermal_occupation(cfg.params), cfg.params.n_c);
    result.snapshots.push_back(pops);
    const double tau_r = cfg.rounds > 0 ? reserved_interval(cfg.params, cfg.n_r) : 0.0;
    for (int a : schedule) {
        pops = unconditional_map(pops, cfg.params, a * tau_r).post_state;
        result.snapshots.push_back(pops);
    }
    for (int level = cfg.n_r; level >= 1; --level) {
        const double tau = optimal_conditional_interval(cfg.params, level);
        const auto outcome = conditional_map(pops, cfg.params, tau);
        result.success_prob *= outcome.success_prob;
        pops = outcome.post_state;
        result.snapshots.push_back(pops);
    }
    result.final_fidelity = fidelity(pops, 0);
    result.final_nbar = average_occupation(pops);
    return result;
}

inline ProtocolResult run_open(const ProtocolConfig& cfg,
                               const std::vector<int>& schedule) {
    ProtocolResult result;
    result.schedule = schedule;
    LindbladConfig lc = cfg.lindblad;
    lc.n_bar_th = thermal_occupation(cfg.params).n_bar_th;
    const double tau_r = reserved_interval(cfg.params, cfg.n_r);
    if (lc.dt <= 0.0) lc.dt = tau_r / 2000.0;
    LindbladIntegrator integrator(cfg.params, lc);

    ResonatorPopulations init =
        cfg.initial_fock ? ResonatorPopulations::fock(*cfg.initial_fock, cfg.params.n_c)
                         : thermal_state(thermal_occupation(cfg.params), cfg.params.n_c);
    Eigen::MatrixXcd rho = embed_composite(cfg.params, QubitState::Excited, init);
    result.snapshots.push_back(init);

    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const bool last = (i + 1 == schedule.size());
        const auto outcome = measured_evolution(
            rho, cfg.params, lc, schedule[i] * tau_r, MeasurementKind::Unconditional,
            last && cfg.n_r >= 1 ? QubitState::Ground : QubitState::Excited, &integrator);
        rho = outcome.post;
        result.snapshots.push_back(resonator_populations(cfg.params, rho));
    }
    if (schedule.empty() && cfg.n_r >= 1)
        rho = prepare_qubit(cfg.params, QubitState::Ground,
                            partial_trace_qubit(cfg.params, rho));
    for (int level = cfg.n_r; level >= 1; --level) {
        const double tau = optimal_conditional_interval(cfg.params, level);
        const auto outcome = measured_evolution(rho, cfg.params, lc, tau,
                                                MeasurementKind::Conditional,
                                                QubitState::Ground, &integrator);
        result.success_prob *= outcome.success_prob;
        rho = outcome.post;
        auto snap = resonator_populations(cfg.params, rho);
        snap.weight = result.success_prob;
        result.snapshots.push_back(snap);
    }
    auto final_pops = resonator_populations(cfg.params, rho);
    const double norm = final_pops.sum();
    for (auto& v : final_pops.p) v /= norm;
    final_pops.normalized = true;
    result.final_fidelity = fidelity(final_pops, 0);
    result.final_nbar = average_occupation(final_pops);
    return result;
}

}  // namespace detail

inline ProtocolResult run_protocol(const ProtocolConfig& cfg) {
    cfg.params.validate();
    if (cfg.rounds < 0) throw std::invalid_argument("run_protocol: M must be >= 0");
    if (cfg.strict_reserved_bound && cfg.n_r >= 1) {
        const double bound =
            min_first_reserved(cfg.params, thermal_occupation(cfg.params));
        if (cfg.n_r < static_cast<int>(std::ceil(bound)))
            throw std::invalid_argument(
                "run_protocol: n_r below the reserved-state lower bound " +
                std::to_string(bound));
    }
    const auto schedule = resolve_schedule(cfg);
    if (static_cast<int>(schedule.size()) != cfg.rounds)
        throw std::invalid_argument("run_protocol: schedule length does not match M");
    const auto t0 = std::chrono::steady_clock::now();
    ProtocolResult result = cfg.open_system ? detail::run_open(cfg, schedule)
                                            : detail::run_closed(cfg, schedule);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

struct SweepRow {
    int n_r = 0;
    double gamma = 0.0;
    double fidelity = 0.0;
    double success_prob = 0.0;
};

// Grid sweep over (n_r, gamma). gamma = 0 points run the exact closed-system
// path; rows assemble in deterministic (n_r, gamma) order regardless of the
// number of worker threads.
inline std::vector<SweepRow> sweep_reserved_state(const ProtocolConfig& base,
                                                  const std::vector<int>& n_r_values,
                                                  const std::vector<double>& gamma_values,
                                                  int threads = 0) {
    std::vector<std::pair<int, double>> grid;
    for (int nr : n_r_values)
        for (double gam : gamma_values) grid.emplace_back(nr, gam);
    std::vector<SweepRow> rows(grid.size());
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) break;
            ProtocolConfig cfg = base;
            cfg.n_r = grid[i].first;
            cfg.params.gamma = grid[i].second;
            cfg.lindblad.gamma = grid[i].second;
            cfg.open_system = grid[i].second > 0.0;
            const auto res = run_protocol(cfg);
            rows[i] = {grid[i].first, grid[i].second, res.final_fidelity,
                       res.success_prob};
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return rows;
}

}  // namespace qcool
