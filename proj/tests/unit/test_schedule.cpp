#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qcool/ppo.hpp"
#include "qcool/schedule.hpp"
#include "helpers.hpp"

using namespace qcool;

TEST_CASE("coefficient table reproduces the unconditional map") {
    const auto p = testutil::small_params();
    const UnconditionalMapTable table(p, 5, 3);
    const double tau_r = reserved_interval(p, 5);
    auto pops = thermal_state(thermal_occupation(p), p.n_c);
    std::vector<double> fast = pops.p;
    std::vector<double> scratch;
    for (int a : {0, 2, 1}) {
        table.apply(fast, a, scratch);
        pops = unconditional_map(pops, p, (a + 1) * tau_r).post_state;
    }
    for (int n = 0; n <= p.n_c; ++n)
        CHECK(fast[n] == Catch::Approx(pops.p[n]).margin(1e-13));
}

TEST_CASE("beam search with full width equals brute-force enumeration") {
    const auto p = testutil::small_params();
    const int n_r = 5, rounds = 6, actions = 2;
    const auto beam = beam_search_schedule(p, n_r, rounds, 64, actions);

    double best_score = -1.0;
    std::vector<int> best_seq;
    for (int mask = 0; mask < (1 << rounds); ++mask) {
        std::vector<int> seq(rounds);
        for (int i = 0; i < rounds; ++i) seq[i] = ((mask >> i) & 1) + 1;
        const double score = schedule_fidelity(p, n_r, seq);
        if (score > best_score || (score == best_score && seq < best_seq)) {
            best_score = score;
            best_seq = seq;
        }
    }
    CHECK(beam == best_seq);
    CHECK(schedule_fidelity(p, n_r, beam) == Catch::Approx(best_score).epsilon(1e-14));
}

TEST_CASE("beam search beats or matches equal spacing") {
    const auto p = testutil::small_params();
    const auto beam = beam_search_schedule(p, 5, 10, 16);
    CHECK(schedule_fidelity(p, 5, beam) >=
          schedule_fidelity(p, 5, equal_spacing_schedule(10)));
}

TEST_CASE("MLP backward agrees with finite differences") {
    Mlp net(3, 4, 2, 5);
    Eigen::VectorXd x(3);
    x << 0.3, -0.7, 1.1;
    Eigen::VectorXd w(2);
    w << 0.8, -1.3;
    auto loss = [&](const Mlp& m) { return w.dot(m.forward(x)); };

    Mlp::Workspace ws;
    net.forward(x, ws);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.param_count());
    net.backward(ws, w, grad);

    const double h = 1e-6;
    for (int i = 0; i < net.param_count(); i += 7) {
        Mlp plus = net, minus = net;
        plus.params()(i) += h;
        minus.params()(i) -= h;
        const double fd = (loss(plus) - loss(minus)) / (2.0 * h);
        CHECK(grad(i) == Catch::Approx(fd).margin(1e-6));
    }
}

namespace {
PpoBatch random_batch(const Mlp& actor, const Mlp& critic, int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    PpoBatch batch;
    batch.advantages.resize(n);
    batch.returns.resize(n);
    batch.logp_old.resize(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd obs(actor.input_dim());
        for (int k = 0; k < obs.size(); ++k) obs(k) = gauss(rng);
        const Eigen::VectorXd probs = softmax(actor.forward(obs));
        const int a = i % actor.output_dim();
        batch.obs.push_back(obs);
        batch.actions.push_back(a);
        // keep the ratio strictly inside the clip region so the loss is smooth
        batch.logp_old(i) = std::log(probs(a)) + jitter(rng);
        batch.advantages(i) = gauss(rng);
        batch.returns(i) = critic.forward(obs)(0) + gauss(rng);
    }
    return batch;
}
}  // namespace

TEST_CASE("policy gradient agrees with finite differences") {
    Mlp actor(4, 5, 3, 11);
    Mlp critic(4, 5, 1, 12);
    const auto batch = random_batch(actor, critic, 6, 21);
    Eigen::VectorXd grad(actor.param_count());
    policy_loss_and_grad(actor, batch, 0.2, 0.01, &grad);

    const double h = 1e-6;
    for (int i = 0; i < actor.param_count(); i += 11) {
        Mlp plus = actor, minus = actor;
        plus.params()(i) += h;
        minus.params()(i) -= h;
        const double fd = (policy_loss_and_grad(plus, batch, 0.2, 0.01, nullptr) -
                           policy_loss_and_grad(minus, batch, 0.2, 0.01, nullptr)) /
                          (2.0 * h);
        CHECK(grad(i) == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("critic gradient agrees with finite differences") {
    Mlp actor(4, 5, 3, 31);
    Mlp critic(4, 5, 1, 32);
    const auto batch = random_batch(actor, critic, 6, 41);
    Eigen::VectorXd grad(critic.param_count());
    critic_loss_and_grad(critic, batch, &grad);

    const double h = 1e-6;
    for (int i = 0; i < critic.param_count(); i += 9) {
        Mlp plus = critic, minus = critic;
        plus.params()(i) += h;
        minus.params()(i) -= h;
        const double fd = (critic_loss_and_grad(plus, batch, nullptr) -
                           critic_loss_and_grad(minus, batch, nullptr)) /
                          (2.0 * h);
        CHECK(grad(i) == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("softmax is normalized and shift invariant") {
    Eigen::VectorXd z(3);
    z << 1.0, -2.0, 0.5;
    const auto s = softmax(z);
    CHECK(s.sum() == Catch::Approx(1.0).margin(1e-14));
    CHECK((softmax(z.array() + 100.0) - s).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rollouts are deterministic per seed") {
    const auto p = testutil::small_params();
    CoolingEnv env(p, 5, 6, 3, 10);
    PolicyParams policy(env.observation_dim(), 8, 3, 17);
    const auto t1 = rollout(policy, env, 123);
    const auto t2 = rollout(policy, env, 123);
    REQUIRE(t1.steps.size() == t2.steps.size());
    for (std::size_t i = 0; i < t1.steps.size(); ++i) {
        CHECK(t1.steps[i].action == t2.steps[i].action);
        CHECK(t1.steps[i].reward == t2.steps[i].reward);
    }
}

TEST_CASE("returns discount correctly and mixed versions are rejected") {
    Trajectory traj;
    traj.policy_version = 0;
    for (double r : {1.0, 1.0, 1.0}) {
        TrajectoryStep s;
        s.obs = Eigen::VectorXd::Zero(2);
        s.reward = r;
        traj.steps.push_back(s);
    }
    const auto batch = assemble_batch({traj}, 0.5);
    CHECK(batch.returns(0) == Catch::Approx(1.75));
    CHECK(batch.returns(1) == Catch::Approx(1.5));
    CHECK(batch.returns(2) == Catch::Approx(1.0));

    auto other = traj;
    other.policy_version = 1;
    CHECK_THROWS_AS(assemble_batch({traj, other}, 0.5), std::logic_error);
}

TEST_CASE("Adam converges on a quadratic") {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 10.0);
    AdamState opt(1, 0.1);
    for (int i = 0; i < 2000; ++i) {
        Eigen::VectorXd grad = 2.0 * (theta.array() - 3.0).matrix();
        opt.step(theta, grad);
    }
    CHECK(theta(0) == Catch::Approx(3.0).margin(1e-3));
}

TEST_CASE("short training run is reproducible and improves on random play") {
    const auto p = testutil::small_params();
    TrainConfig tc;
    tc.workers = 2;
    tc.rollouts_per_update = 8;
    tc.updates = 5;
    tc.trajectory_len = 6;
    tc.actions = 3;
    tc.hidden = 16;
    tc.seed = 9;
    const auto r1 = train(p, 5, tc);
    const auto r2 = train(p, 5, tc);
    CHECK(r1.mean_rewards == r2.mean_rewards);
    CHECK(r1.best_schedule == r2.best_schedule);
    CHECK(r1.best_fidelity > 0.0);
    CHECK(static_cast<int>(r1.best_schedule.size()) == tc.trajectory_len);
}
