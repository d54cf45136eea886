// Command-line driver: simulate | train | sweep | figures | check.
// A JSON config file (--config) overrides flags, which override defaults.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qcool/io.hpp"
#include "qcool/protocol.hpp"

#include "../tests/acceptance.hpp"

namespace {

struct CliOptions {
    double omega_b = 3.7e9;
    double temp = 0.1;
    double g_ratio = 0.04;
    double detuning_ratio = 0.02;
    double gamma_ratio = 0.0;
    int n_c = 0;  // 0 selects the automatic cutoff
    int n_r = 10;
    int rounds = 30;
    std::string schedule = "beam";  // path | equal | beam | train
    int beam_width = 64;
    unsigned seed = 0;
    std::string out = "out";
    double dt_divisor = 2000.0;
    bool strict = false;
    // training
    int updates = 600;
    int workers = 4;
    int rollouts = 32;
    int actions = 5;
    double learning_rate = 3e-4;
    // sweep
    std::vector<int> sweep_n_r = {5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> sweep_gamma_ratios = {0.0, 0.5e-5, 1.0e-5, 1.5e-5};
};

void add_common_flags(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--omega-b", o.omega_b, "Resonator frequency (rad/s)");
    cmd->add_option("--temp", o.temp, "Bath temperature (K)");
    cmd->add_option("--g-ratio", o.g_ratio, "Coupling g / omega_b");
    cmd->add_option("--detuning-ratio", o.detuning_ratio, "Detuning / omega_b");
    cmd->add_option("--gamma-ratio", o.gamma_ratio, "Decoherence rate / omega_b");
    cmd->add_option("--n-c", o.n_c, "Fock cutoff (0 = automatic)");
    cmd->add_option("--n-r", o.n_r, "First reserved state");
    cmd->add_option("--rounds", o.rounds, "Unconditional measurement rounds M");
    cmd->add_option("--schedule", o.schedule, "Schedule source: path|equal|beam|train");
    cmd->add_option("--beam-width", o.beam_width, "Beam width for the search baseline");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--dt-divisor", o.dt_divisor, "RK4 substeps per tau_r");
    cmd->add_flag("--strict", o.strict, "Enforce the reserved-state lower bound");
}

// Config-file values take precedence over flags.
void apply_config_file(const std::string& path, CliOptions& o) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("omega_b", o.omega_b);
    get("temp", o.temp);
    get("g_ratio", o.g_ratio);
    get("detuning_ratio", o.detuning_ratio);
    get("gamma_ratio", o.gamma_ratio);
    get("n_c", o.n_c);
    get("n_r", o.n_r);
    get("rounds", o.rounds);
    get("schedule", o.schedule);
    get("beam_width", o.beam_width);
    get("seed", o.seed);
    get("out", o.out);
    get("dt_divisor", o.dt_divisor);
    get("strict", o.strict);
    get("updates", o.updates);
    get("workers", o.workers);
    get("rollouts", o.rollouts);
    get("actions", o.actions);
    get("learning_rate", o.learning_rate);
    get("sweep_n_r", o.sweep_n_r);
    get("sweep_gamma_ratios", o.sweep_gamma_ratios);
}

qcool::ProtocolConfig make_protocol_config(const CliOptions& o) {
    qcool::ProtocolConfig cfg;
    cfg.params = qcool::nanomechanical_params(o.g_ratio, o.detuning_ratio,
                                              o.gamma_ratio, o.temp);
    cfg.params.omega_b = o.omega_b;
    cfg.params.g = o.g_ratio * o.omega_b;
    cfg.params.detuning = o.detuning_ratio * o.omega_b;
    cfg.params.gamma = o.gamma_ratio * o.omega_b;
    cfg.params.n_c = o.n_c > 0 ? o.n_c
                               : qcool::default_fock_cutoff(
                                     qcool::thermal_occupation(cfg.params));
    cfg.n_r = o.n_r;
    cfg.rounds = o.rounds;
    cfg.beam_width = o.beam_width;
    cfg.seed = o.seed;
    cfg.strict_reserved_bound = o.strict;
    cfg.open_system = o.gamma_ratio > 0.0;
    cfg.lindblad.gamma = cfg.params.gamma;
    cfg.lindblad.dt = qcool::reserved_interval(cfg.params, cfg.n_r) / o.dt_divisor;
    cfg.train.updates = o.updates;
    cfg.train.workers = o.workers;
    cfg.train.rollouts_per_update = o.rollouts;
    cfg.train.actions = o.actions;
    cfg.train.learning_rate = o.learning_rate;
    if (o.schedule == "equal") {
        cfg.schedule_source = qcool::ScheduleSource::Equal;
    } else if (o.schedule == "beam") {
        cfg.schedule_source = qcool::ScheduleSource::Beam;
    } else if (o.schedule == "train") {
        cfg.schedule_source = qcool::ScheduleSource::Train;
    } else {
        cfg.schedule_source = qcool::ScheduleSource::File;
        cfg.schedule = qcool::read_schedule_file(o.schedule);
    }
    cfg.out_dir = o.out;
    return cfg;
}

void warn_reserved_bound(const qcool::ProtocolConfig& cfg) {
    if (cfg.strict_reserved_bound) return;
    const double bound = qcool::min_first_reserved(
        cfg.params, qcool::thermal_occupation(cfg.params));
    if (cfg.n_r < bound)
        std::cerr << "warning: n_r = " << cfg.n_r
                  << " is below the reserved-state lower bound " << bound << "\n";
}

int cmd_simulate(const CliOptions& o, bool emit_figures) {
    auto cfg = make_protocol_config(o);
    warn_reserved_bound(cfg);
    std::filesystem::create_directories(o.out);
    const auto result = qcool::run_protocol(cfg);
    qcool::write_manifest(cfg, result, o.out + "/manifest.json");
    qcool::write_schedule_file(result.schedule, o.out + "/schedule.txt");
    qcool::write_fig3(result, o.out + "/fig3.csv");
    if (emit_figures) {
        std::vector<qcool::ResonatorPopulations> step1(
            result.snapshots.begin(), result.snapshots.begin() + cfg.rounds + 1);
        qcool::write_fig1a(step1, o.out + "/fig1a.csv");
        qcool::write_fig1b(step1, o.out + "/fig1b.csv");
        qcool::write_fig1c(cfg.params, cfg.n_r, 4, o.out + "/fig1c.csv");
        qcool::write_fig2(result.schedule, o.out + "/fig2.csv");
    }
    std::cout << "F = " << qcool::format_sig(result.final_fidelity)
              << "\nn_bar = " << qcool::format_sig(result.final_nbar)
              << "\nP_s = " << qcool::format_sig(result.success_prob)
              << "\nwall_seconds = " << qcool::format_sig(result.wall_seconds) << '\n';
    return 0;
}

int cmd_train(const CliOptions& o) {
    auto cfg = make_protocol_config(o);
    std::filesystem::create_directories(o.out);
    qcool::TrainConfig tc = cfg.train;
    tc.trajectory_len = cfg.rounds;
    tc.seed = cfg.seed;
    tc.log_path = o.out + "/training_log.csv";
    const auto result = qcool::train(cfg.params, cfg.n_r, tc);
    qcool::save_checkpoint(result.policy, tc, o.out + "/policy.json");
    qcool::write_schedule_file(result.best_schedule, o.out + "/schedule.txt");
    std::cout << "best F_r = " << qcool::format_sig(result.best_fidelity)
              << "\nbeats equal spacing = " << (result.beats_equal_spacing ? "yes" : "no")
              << "\nschedule -> " << o.out << "/schedule.txt\n";
    return 0;
}

int cmd_sweep(const CliOptions& o) {
    auto cfg = make_protocol_config(o);
    std::filesystem::create_directories(o.out);
    std::vector<double> gammas;
    for (double r : o.sweep_gamma_ratios) gammas.push_back(r * o.omega_b);
    const auto rows = qcool::sweep_reserved_state(cfg, o.sweep_n_r, gammas, 1);
    qcool::write_fig4(rows, o.out + "/fig4.csv");
    std::cout << rows.size() << " rows -> " << o.out << "/fig4.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-step measurement-based resonator cooling toolkit"};
    app.require_subcommand(1);

    CliOptions o;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (overrides flags)");

    auto* simulate = app.add_subcommand("simulate", "Run one cooling protocol");
    auto* train_cmd = app.add_subcommand("train", "Optimize the step-1 schedule with PPO");
    auto* sweep = app.add_subcommand("sweep", "Grid sweep over (n_r, gamma)");
    auto* figures = app.add_subcommand("figures", "Run a protocol and emit all figure CSVs");
    auto* check = app.add_subcommand("check", "Run the acceptance suite");
    for (auto* cmd : {simulate, train_cmd, sweep, figures}) add_common_flags(cmd, o);
    train_cmd->add_option("--updates", o.updates, "PPO updates");
    train_cmd->add_option("--workers", o.workers, "Rollout workers");
    train_cmd->add_option("--rollouts", o.rollouts, "Rollouts per update");
    train_cmd->add_option("--actions", o.actions, "Interval multiples d");
    train_cmd->add_option("--learning-rate", o.learning_rate, "Adam learning rate");
    sweep->add_option("--sweep-n-r", o.sweep_n_r, "Reserved-state values");
    sweep->add_option("--sweep-gamma-ratios", o.sweep_gamma_ratios, "gamma/omega_b values");
    double dt_divisor = 2000.0;
    check->add_option("--dt-divisor", dt_divisor, "RK4 substeps per tau_r");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) apply_config_file(config_path, o);
        if (simulate->parsed()) return cmd_simulate(o, false);
        if (figures->parsed()) return cmd_simulate(o, true);
        if (train_cmd->parsed()) return cmd_train(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (check->parsed())
            return qcool::run_acceptance(std::cout, {dt_divisor}) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
