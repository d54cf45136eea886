// File interfaces: figure-data CSVs, run manifests, schedule files, policy
// checkpoints, and the CLI config format. Floats serialize with 12
// significant digits; manifests keep full-precision doubles so closed-system
// runs replay bit-identically.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcool/measurement.hpp"
#include "qcool/ppo.hpp"
#include "qcool/protocol.hpp"

namespace qcool {

inline constexpr const char* kCodeVersion = "qcool 0.1.0";

inline std::string format_sig(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace detail {
inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}
}  // namespace detail

// fig1a: population-transfer ratio eta per measurement and Fock index.
inline void write_fig1a(const std::vector<ResonatorPopulations>& history,
                        const std::string& path) {
    auto out = detail::open_out(path);
    out << "m,n,eta\n";
    for (int m = 1; m < static_cast<int>(history.size()); ++m)
        for (int n = 0; n <= history.front().cutoff(); ++n) {
            const double eta = transfer_ratio(history, m, n);
            if (std::isnan(eta)) continue;  // undefined ratios excluded
            out << m << ',' << n << ',' << format_sig(eta) << '\n';
        }
}

// fig1b: population histograms per measurement.
inline void write_fig1b(const std::vector<ResonatorPopulations>& history,
                        const std::string& path) {
    auto out = detail::open_out(path);
    out << "m,n,p_n\n";
    for (int m = 0; m < static_cast<int>(history.size()); ++m)
        for (int n = 0; n <= history.front().cutoff(); ++n)
            out << m << ',' << n << ','
                << format_sig(history[static_cast<std::size_t>(m)].p[static_cast<std::size_t>(n)])
                << '\n';
}

// fig1c: retention coefficient |alpha_{n+1}|^2 versus n for tau = j tau_r.
inline void write_fig1c(const PhysicalParams& params, int n_r1, int max_multiple,
                        const std::string& path) {
    auto out = detail::open_out(path);
    out << "tau_over_tau_r,n,alpha_sq\n";
    const double tau_r = reserved_interval(params, n_r1);
    for (int j = 1; j <= max_multiple; ++j)
        for (int n = 0; n <= params.n_c; ++n)
            out << j << ',' << n << ','
                << format_sig(std::norm(cooling_coeffs(params, n + 1, j * tau_r).alpha))
                << '\n';
}

// fig2: optimized interval multiples per step.
inline void write_fig2(const std::vector<int>& schedule, const std::string& path) {
    auto out = detail::open_out(path);
    out << "step,action\n";
    for (std::size_t i = 0; i < schedule.size(); ++i)
        out << (i + 1) << ',' << schedule[i] << '\n';
}

// fig3: populations along the full protocol.
inline void write_fig3(const ProtocolResult& result, const std::string& path) {
    auto out = detail::open_out(path);
    out << "measurement,n,p_n\n";
    for (int m = 0; m < static_cast<int>(result.snapshots.size()); ++m)
        for (int n = 0; n <= result.snapshots.front().cutoff(); ++n)
            out << m << ',' << n << ','
                << format_sig(
                       result.snapshots[static_cast<std::size_t>(m)].p[static_cast<std::size_t>(n)])
                << '\n';
}

// fig4: (n_r, gamma) sweep table.
inline void write_fig4(const std::vector<SweepRow>& rows, const std::string& path) {
    auto out = detail::open_out(path);
    out << "n_r,gamma,F,P_s\n";
    for (const auto& row : rows)
        out << row.n_r << ',' << format_sig(row.gamma) << ','
            << format_sig(row.fidelity) << ',' << format_sig(row.success_prob) << '\n';
}

inline std::vector<int> read_schedule_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open schedule file: " + path);
    std::vector<int> schedule;
    int v;
    while (in >> v) schedule.push_back(v);
    if (schedule.empty()) throw std::runtime_error("schedule file is empty: " + path);
    return schedule;
}

inline void write_schedule_file(const std::vector<int>& schedule,
                                const std::string& path) {
    auto out = detail::open_out(path);
    for (int v : schedule) out << v << '\n';
}

inline nlohmann::json params_to_json(const PhysicalParams& p) {
    return {{"omega_b", p.omega_b}, {"detuning", p.detuning}, {"g", p.g},
            {"temperature", p.temperature}, {"gamma", p.gamma}, {"n_c", p.n_c}};
}

inline PhysicalParams params_from_json(const nlohmann::json& j) {
    PhysicalParams p;
    p.omega_b = j.at("omega_b");
    p.detuning = j.at("detuning");
    p.g = j.at("g");
    p.temperature = j.at("temperature");
    p.gamma = j.at("gamma");
    p.n_c = j.at("n_c");
    return p;
}

inline const char* schedule_source_name(ScheduleSource s) {
    switch (s) {
        case ScheduleSource::Equal: return "equal";
        case ScheduleSource::Beam: return "beam";
        case ScheduleSource::Train: return "train";
        case ScheduleSource::File: return "file";
    }
    return "equal";
}

inline ScheduleSource schedule_source_from_name(const std::string& s) {
    if (s == "equal") return ScheduleSource::Equal;
    if (s == "beam") return ScheduleSource::Beam;
    if (s == "train") return ScheduleSource::Train;
    if (s == "file") return ScheduleSource::File;
    throw std::runtime_error("unknown schedule source: " + s);
}

// Full provenance record for one run. Replaying the manifest reproduces a
// closed-system run bit-identically: the resolved schedule is pinned.
inline nlohmann::json make_manifest(const ProtocolConfig& cfg,
                                    const ProtocolResult& result) {
    nlohmann::json j;
    j["code_version"] = kCodeVersion;
    j["physical"] = params_to_json(cfg.params);
    j["protocol"] = {{"n_r", cfg.n_r},
                     {"rounds", cfg.rounds},
                     {"schedule_source", schedule_source_name(cfg.schedule_source)},
                     {"schedule", result.schedule},
                     {"beam_width", cfg.beam_width},
                     {"open_system", cfg.open_system},
                     {"seed", cfg.seed}};
    if (cfg.initial_fock) j["protocol"]["initial_fock"] = *cfg.initial_fock;
    j["lindblad"] = {{"gamma", cfg.lindblad.gamma}, {"dt", cfg.lindblad.dt}};
    j["result"] = {{"final_fidelity", result.final_fidelity},
                   {"final_nbar", result.final_nbar},
                   {"success_prob", result.success_prob},
                   {"wall_seconds", result.wall_seconds}};
    return j;
}

inline void write_manifest(const ProtocolConfig& cfg, const ProtocolResult& result,
                           const std::string& path) {
    auto out = detail::open_out(path);
    out << make_manifest(cfg, result).dump(2) << '\n';
}

// Reconstructs a runnable config from a manifest; the schedule replays from
// file so no stochastic source re-enters.
inline ProtocolConfig config_from_manifest(const nlohmann::json& j) {
    ProtocolConfig cfg;
    cfg.params = params_from_json(j.at("physical"));
    const auto& p = j.at("protocol");
    cfg.n_r = p.at("n_r");
    cfg.rounds = p.at("rounds");
    cfg.schedule = p.at("schedule").get<std::vector<int>>();
    cfg.schedule_source = ScheduleSource::File;
    cfg.beam_width = p.at("beam_width");
    cfg.open_system = p.at("open_system");
    cfg.seed = p.at("seed");
    if (p.contains("initial_fock")) cfg.initial_fock = p.at("initial_fock").get<int>();
    cfg.lindblad.gamma = j.at("lindblad").at("gamma");
    cfg.lindblad.dt = j.at("lindblad").at("dt");
    return cfg;
}

inline std::string train_config_hash(const TrainConfig& c) {
    std::ostringstream ss;
    ss << c.workers << '|' << c.rollouts_per_update << '|' << c.epochs << '|'
       << c.clip_ratio << '|' << c.discount << '|' << c.learning_rate << '|'
       << c.entropy_coef << '|' << c.seed << '|' << c.trajectory_len << '|'
       << c.actions << '|' << c.updates << '|' << c.hidden;
    return std::to_string(std::hash<std::string>{}(ss.str()));
}

inline void save_checkpoint(const PolicyParams& policy, const TrainConfig& config,
                            const std::string& path) {
    nlohmann::json j;
    j["config_hash"] = train_config_hash(config);
    j["version"] = policy.version;
    j["hidden"] = config.hidden;
    j["actions"] = config.actions;
    j["obs_dim"] = policy.actor.input_dim();
    j["actor"] = std::vector<double>(policy.actor.params().data(),
                                     policy.actor.params().data() +
                                         policy.actor.params().size());
    j["critic"] = std::vector<double>(policy.critic.params().data(),
                                      policy.critic.params().data() +
                                          policy.critic.params().size());
    auto out = detail::open_out(path);
    out << j.dump() << '\n';
}

inline PolicyParams load_checkpoint(const std::string& path,
                                    const TrainConfig& config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    nlohmann::json j;
    in >> j;
    if (j.at("config_hash").get<std::string>() != train_config_hash(config))
        throw std::runtime_error("checkpoint config hash mismatch: " + path);
    PolicyParams policy(j.at("obs_dim"), j.at("hidden"), j.at("actions"), 0);
    policy.version = j.at("version");
    const auto actor = j.at("actor").get<std::vector<double>>();
    const auto critic = j.at("critic").get<std::vector<double>>();
    if (static_cast<int>(actor.size()) != policy.actor.param_count() ||
        static_cast<int>(critic.size()) != policy.critic.param_count())
        throw std::runtime_error("checkpoint parameter size mismatch: " + path);
    std::copy(actor.begin(), actor.end(), policy.actor.params().data());
    std::copy(critic.begin(), critic.end(), policy.critic.params().data());
    return policy;
}

}  // namespace qcool
