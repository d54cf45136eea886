// Distributed PPO over the step-1 measurement-interval sequence. Parallel
// rollout workers share a read-only snapshot of the global policy; the global
// update is exclusive and stays one version ahead of the workers.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <random>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "qcool/fock.hpp"
#include "qcool/measurement.hpp"
#include "qcool/mlp.hpp"
#include "qcool/schedule.hpp"

namespace qcool {

struct TrainConfig {
    int workers = 4;
    int rollouts_per_update = 32;
    int epochs = 4;
    double clip_ratio = 0.2;
    double discount = 0.99;
    double learning_rate = 3e-4;
    double entropy_coef = 0.01;
    std::uint64_t seed = 0;
    int trajectory_len = 30;  // M
    int actions = 5;          // d
    int updates = 600;
    int hidden = 64;
    std::string checkpoint_path;
    std::string log_path;

    void validate() const {
        if (workers < 1) throw std::invalid_argument("TrainConfig: workers must be >= 1");
        if (clip_ratio <= 0.0 || clip_ratio >= 1.0)
            throw std::invalid_argument("TrainConfig: clip ratio must be in (0,1)");
        if (actions < 1 || trajectory_len < 1)
            throw std::invalid_argument("TrainConfig: d and M must be >= 1");
    }
};

// r = 10 tan(F_r pi/2), clamped just below F_r = 1 where the tangent diverges.
inline double reward(const ResonatorPopulations& pops, int n_r) {
    const double fr = std::min(fidelity(pops, n_r), 1.0 - 1e-9);
    return 10.0 * std::tan(fr * M_PI / 2.0);
}

// Closed-system training environment: thermal reset, unconditional map per
// action, truncated-population observation plus a normalized step index.
class CoolingEnv {
  public:
    CoolingEnv(const PhysicalParams& params, int n_r, int horizon, int actions,
               int obs_cutoff = -1)
        : params_(params),
          n_r_(n_r),
          horizon_(horizon),
          table_(params, n_r, actions),
          init_(thermal_state(thermal_occupation(params), params.n_c).p) {
        if (obs_cutoff < 0) {
            const auto reserved = higher_reserved_states(params, n_r, 2);
            obs_cutoff = std::min(params.n_c, reserved.higher.front().index + 5);
        }
        obs_cutoff_ = obs_cutoff;
        reset();
    }

    void reset() {
        p_ = init_;
        step_ = 0;
    }

    int actions() const { return table_.actions(); }
    int horizon() const { return horizon_; }
    int observation_dim() const { return obs_cutoff_ + 2; }
    int step_index() const { return step_; }
    bool done() const { return step_ >= horizon_; }
    const std::vector<double>& populations() const { return p_; }

    double reserved_fidelity() const { return p_[static_cast<std::size_t>(n_r_)]; }

    Eigen::VectorXd observe() const {
        Eigen::VectorXd obs(observation_dim());
        for (int n = 0; n <= obs_cutoff_; ++n) obs(n) = p_[static_cast<std::size_t>(n)];
        obs(obs_cutoff_ + 1) = static_cast<double>(step_) / horizon_;
        return obs;
    }

    // Applies action a (0-based) and returns the tangent reward.
    double step(int a) {
        table_.apply(p_, a, scratch_);
        ++step_;
        const double fr = std::min(p_[static_cast<std::size_t>(n_r_)], 1.0 - 1e-9);
        return 10.0 * std::tan(fr * M_PI / 2.0);
    }

  private:
    PhysicalParams params_;
    int n_r_;
    int horizon_;
    int obs_cutoff_;
    UnconditionalMapTable table_;
    std::vector<double> init_;
    std::vector<double> p_;
    std::vector<double> scratch_;
    int step_ = 0;
};

struct PolicyParams {
    Mlp actor;
    Mlp critic;
    int version = 0;

    PolicyParams(int obs_dim, int hidden, int actions, std::uint64_t seed)
        : actor(obs_dim, hidden, actions, seed), critic(obs_dim, hidden, 1, seed ^ 0x9e3779b97f4a7c15ULL) {}
};

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd z = (logits.array() - logits.maxCoeff()).exp();
    return z / z.sum();
}

struct TrajectoryStep {
    Eigen::VectorXd obs;
    int action = 0;
    double reward = 0.0;
    double logp = 0.0;
    double value = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    int policy_version = 0;
};

namespace detail {
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t x = a * 0x9e3779b97f4a7c15ULL + b * 0xbf58476d1ce4e5b9ULL + c + 1;
    x ^= x >> 30; x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27; x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}
}  // namespace detail

// One full-episode rollout; deterministic given (weights, seed).
inline Trajectory rollout(const PolicyParams& policy, CoolingEnv& env,
                          std::uint64_t seed) {
    env.reset();
    std::mt19937_64 rng(seed);
    Trajectory traj;
    traj.policy_version = policy.version;
    traj.steps.reserve(static_cast<std::size_t>(env.horizon()));
    while (!env.done()) {
        TrajectoryStep s;
        s.obs = env.observe();
        const Eigen::VectorXd probs = softmax(policy.actor.forward(s.obs));
        s.value = policy.critic.forward(s.obs)(0);
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        int a = 0;
        for (; a < probs.size() - 1; ++a) {
            u -= probs(a);
            if (u <= 0.0) break;
        }
        s.action = a;
        s.logp = std::log(std::max(probs(a), 1e-300));
        s.reward = env.step(a);
        traj.steps.push_back(std::move(s));
    }
    return traj;
}

struct PpoBatch {
    std::vector<Eigen::VectorXd> obs;
    std::vector<int> actions;
    Eigen::VectorXd advantages;
    Eigen::VectorXd returns;
    Eigen::VectorXd logp_old;
};

// Clipped-surrogate loss (negated objective, entropy-regularized). When `grad`
// is non-null the analytic gradient with respect to the actor parameters is
// accumulated there.
inline double policy_loss_and_grad(const Mlp& actor, const PpoBatch& batch,
                                   double clip_ratio, double entropy_coef,
                                   Eigen::VectorXd* grad) {
    const int n = static_cast<int>(batch.obs.size());
    if (grad) grad->setZero();
    double loss = 0.0;
    Mlp::Workspace ws;
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd logits = actor.forward(batch.obs[static_cast<std::size_t>(i)], ws);
        const Eigen::VectorXd probs = softmax(logits);
        const int a = batch.actions[static_cast<std::size_t>(i)];
        const double adv = batch.advantages(i);
        const double logp = std::log(std::max(probs(a), 1e-300));
        const double ratio = std::exp(logp - batch.logp_old(i));
        const double clipped = std::clamp(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio);
        const double u1 = ratio * adv;
        const double u2 = clipped * adv;
        const double entropy = -(probs.array() * probs.array().max(1e-300).log()).sum();
        loss += -std::min(u1, u2) - entropy_coef * entropy;
        if (grad) {
            Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(probs.size());
            if (u1 <= u2) {
                // d(ratio*adv)/dlogits = adv*ratio*(e_a - probs)
                dlogits = adv * ratio * (-probs);
                dlogits(a) += adv * ratio;
                dlogits = -dlogits;
            }
            if (entropy_coef != 0.0) {
                const Eigen::ArrayXd logp_all = probs.array().max(1e-300).log();
                dlogits.array() +=
                    entropy_coef * probs.array() * (logp_all + entropy);
            }
            actor.backward(ws, dlogits / n, *grad);
        }
    }
    return loss / n;
}

inline double critic_loss_and_grad(const Mlp& critic, const PpoBatch& batch,
                                   Eigen::VectorXd* grad) {
    const int n = static_cast<int>(batch.obs.size());
    if (grad) grad->setZero();
    double loss = 0.0;
    Mlp::Workspace ws;
    for (int i = 0; i < n; ++i) {
        const double v = critic.forward(batch.obs[static_cast<std::size_t>(i)], ws)(0);
        const double err = v - batch.returns(i);
        loss += err * err;
        if (grad) {
            Eigen::VectorXd dout(1);
            dout(0) = 2.0 * err / n;
            critic.backward(ws, dout, *grad);
        }
    }
    return loss / n;
}

inline PpoBatch assemble_batch(const std::vector<Trajectory>& trajectories,
                               double discount) {
    PpoBatch batch;
    std::vector<double> adv_raw;
    for (const auto& traj : trajectories) {
        if (traj.policy_version != trajectories.front().policy_version)
            throw std::logic_error("assemble_batch: mixed policy versions in one batch");
        double ret = 0.0;
        std::vector<double> returns(traj.steps.size());
        for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
            ret = traj.steps[static_cast<std::size_t>(t)].reward + discount * ret;
            returns[static_cast<std::size_t>(t)] = ret;
        }
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            const auto& s = traj.steps[t];
            batch.obs.push_back(s.obs);
            batch.actions.push_back(s.action);
            adv_raw.push_back(returns[t] - s.value);
        }
    }
    const int n = static_cast<int>(batch.obs.size());
    batch.advantages.resize(n);
    batch.returns.resize(n);
    batch.logp_old.resize(n);
    int i = 0;
    for (const auto& traj : trajectories) {
        double ret = 0.0;
        std::vector<double> returns(traj.steps.size());
        for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
            ret = traj.steps[static_cast<std::size_t>(t)].reward + discount * ret;
            returns[static_cast<std::size_t>(t)] = ret;
        }
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            batch.returns(i) = returns[t];
            batch.logp_old(i) = traj.steps[t].logp;
            batch.advantages(i) = adv_raw[static_cast<std::size_t>(i)];
            ++i;
        }
    }
    // advantage normalization
    const double mean = batch.advantages.mean();
    const double sd = std::sqrt((batch.advantages.array() - mean).square().mean()) + 1e-8;
    batch.advantages = (batch.advantages.array() - mean) / sd;
    return batch;
}

// One global PPO update from a batch of same-version worker trajectories.
inline void update_global(PolicyParams& global, const std::vector<Trajectory>& batch,
                          const TrainConfig& config, AdamState& actor_opt,
                          AdamState& critic_opt) {
    for (const auto& t : batch)
        if (t.policy_version != global.version)
            throw std::logic_error("update_global: trajectory version does not match global");
    const PpoBatch data = assemble_batch(batch, config.discount);
    Eigen::VectorXd agrad(global.actor.param_count());
    Eigen::VectorXd cgrad(global.critic.param_count());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        policy_loss_and_grad(global.actor, data, config.clip_ratio,
                             config.entropy_coef, &agrad);
        critic_loss_and_grad(global.critic, data, &cgrad);
        if (!agrad.allFinite() || !cgrad.allFinite())
            throw std::runtime_error("update_global: non-finite gradient; aborting");
        actor_opt.step(global.actor.params(), agrad);
        critic_opt.step(global.critic.params(), cgrad);
    }
    ++global.version;
}

// Deterministic argmax decode of the current policy.
inline std::vector<int> greedy_schedule(const PolicyParams& policy, CoolingEnv& env) {
    env.reset();
    std::vector<int> schedule;
    while (!env.done()) {
        const Eigen::VectorXd logits = policy.actor.forward(env.observe());
        int best = 0;
        logits.maxCoeff(&best);
        schedule.push_back(best + 1);
        env.step(best);
    }
    return schedule;
}

struct TrainResult {
    PolicyParams policy;
    std::vector<int> best_schedule;
    double best_fidelity = 0.0;
    bool beats_equal_spacing = false;
    std::vector<double> mean_rewards;  // per update, for determinism checks
};

// DPPO training loop. W workers collect rollouts concurrently from a
// read-only snapshot; results merge in rollout-index order, so the outcome is
// bit-reproducible for a fixed worker count and seed.
inline TrainResult train(const PhysicalParams& params, int n_r, const TrainConfig& config) {
    config.validate();
    CoolingEnv proto_env(params, n_r, config.trajectory_len, config.actions);
    PolicyParams global(proto_env.observation_dim(), config.hidden, config.actions,
                        config.seed);
    AdamState actor_opt(global.actor.param_count(), config.learning_rate);
    AdamState critic_opt(global.critic.param_count(), config.learning_rate);

    std::ofstream log;
    if (!config.log_path.empty()) {
        log.open(config.log_path);
        log << "update,mean_reward,best_fidelity,greedy_fidelity,wall_time_s\n";
    }

    TrainResult result{global, {}, 0.0, false, {}};
    const auto t0 = std::chrono::steady_clock::now();
    for (int update = 0; update < config.updates; ++update) {
        std::vector<Trajectory> batch(static_cast<std::size_t>(config.rollouts_per_update));
        {
            const PolicyParams snapshot = global;  // read-only for workers
            std::atomic<int> next{0};
            auto work = [&]() {
                CoolingEnv env = proto_env;
                for (;;) {
                    const int idx = next.fetch_add(1);
                    if (idx >= config.rollouts_per_update) break;
                    batch[static_cast<std::size_t>(idx)] = rollout(
                        snapshot, env,
                        detail::mix_seed(config.seed, static_cast<std::uint64_t>(update),
                                         static_cast<std::uint64_t>(idx)));
                }
            };
            std::vector<std::thread> threads;
            for (int w = 1; w < config.workers; ++w) threads.emplace_back(work);
            work();
            for (auto& t : threads) t.join();
        }
        update_global(global, batch, config, actor_opt, critic_opt);

        double mean_reward = 0.0;
        for (const auto& t : batch)
            for (const auto& s : t.steps) mean_reward += s.reward;
        mean_reward /= config.rollouts_per_update * config.trajectory_len;
        result.mean_rewards.push_back(mean_reward);

        CoolingEnv env = proto_env;
        const auto schedule = greedy_schedule(global, env);
        const double fr = env.reserved_fidelity();
        if (fr > result.best_fidelity) {
            result.best_fidelity = fr;
            result.best_schedule = schedule;
        }
        if (log.is_open()) {
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << update << ',' << mean_reward << ',' << result.best_fidelity << ','
                << fr << ',' << wall << '\n';
        }
    }
    result.policy = global;
    const double equal_fr =
        schedule_fidelity(params, n_r, equal_spacing_schedule(config.trajectory_len));
    result.beats_equal_spacing = result.best_fidelity >= equal_fr;
    return result;
}

}  // namespace qcool
