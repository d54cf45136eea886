// Minimal two-hidden-layer feed-forward network with manual backprop, stored
// as one flat parameter vector so optimizers and finite-difference checks can
// treat it opaquely.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace qcool {

class Mlp {
  public:
    Mlp(int in, int hidden, int out, std::uint64_t seed)
        : in_(in), h_(hidden), out_(out) {
        theta_.resize(param_count());
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> dist(0.0, 1.0);
        auto init = [&](Eigen::Map<Eigen::MatrixXd> w, int fan_in) {
            const double scale = std::sqrt(1.0 / fan_in);
            for (int i = 0; i < w.size(); ++i) w.data()[i] = scale * dist(rng);
        };
        init(w1(), in_);
        b1().setZero();
        init(w2(), h_);
        b2().setZero();
        init(w3(), h_);
        b3().setZero();
    }

    int input_dim() const { return in_; }
    int output_dim() const { return out_; }
    int param_count() const { return h_ * in_ + h_ + h_ * h_ + h_ + out_ * h_ + out_; }

    Eigen::VectorXd& params() { return theta_; }
    const Eigen::VectorXd& params() const { return theta_; }

    struct Workspace {
        Eigen::VectorXd x, a1, z1, a2, z2, y;
    };

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
        Workspace ws;
        return forward(x, ws);
    }

    Eigen::VectorXd forward(const Eigen::VectorXd& x, Workspace& ws) const {
        ws.x = x;
        ws.a1 = cw1() * x + cb1();
        ws.z1 = ws.a1.array().tanh();
        ws.a2 = cw2() * ws.z1 + cb2();
        ws.z2 = ws.a2.array().tanh();
        ws.y = cw3() * ws.z2 + cb3();
        return ws.y;
    }

    // Accumulates dL/dtheta into `grad` given dL/dy from a cached forward pass.
    void backward(const Workspace& ws, const Eigen::VectorXd& grad_out,
                  Eigen::VectorXd& grad) const {
        GradView g(grad, in_, h_, out_);
        g.w3.noalias() += grad_out * ws.z2.transpose();
        g.b3 += grad_out;
        Eigen::VectorXd d2 = cw3().transpose() * grad_out;
        d2.array() *= 1.0 - ws.z2.array().square();
        g.w2.noalias() += d2 * ws.z1.transpose();
        g.b2 += d2;
        Eigen::VectorXd d1 = cw2().transpose() * d2;
        d1.array() *= 1.0 - ws.z1.array().square();
        g.w1.noalias() += d1 * ws.x.transpose();
        g.b1 += d1;
    }

  private:
    struct GradView {
        Eigen::Map<Eigen::MatrixXd> w1, w2, w3;
        Eigen::Map<Eigen::VectorXd> b1, b2, b3;
        GradView(Eigen::VectorXd& v, int in, int h, int out)
            : w1(v.data(), h, in),
              w2(v.data() + h * in + h, h, h),
              w3(v.data() + h * in + h + h * h + h, out, h),
              b1(v.data() + h * in, h),
              b2(v.data() + h * in + h + h * h, h),
              b3(v.data() + h * in + h + h * h + h + out * h, out) {}
    };

    Eigen::Map<Eigen::MatrixXd> w1() { return {theta_.data(), h_, in_}; }
    Eigen::Map<Eigen::VectorXd> b1() { return {theta_.data() + h_ * in_, h_}; }
    Eigen::Map<Eigen::MatrixXd> w2() { return {theta_.data() + h_ * in_ + h_, h_, h_}; }
    Eigen::Map<Eigen::VectorXd> b2() {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_, h_};
    }
    Eigen::Map<Eigen::MatrixXd> w3() {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_ + h_, out_, h_};
    }
    Eigen::Map<Eigen::VectorXd> b3() {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_ + h_ + out_ * h_, out_};
    }

    Eigen::Map<const Eigen::MatrixXd> cw1() const { return {theta_.data(), h_, in_}; }
    Eigen::Map<const Eigen::VectorXd> cb1() const {
        return {theta_.data() + h_ * in_, h_};
    }
    Eigen::Map<const Eigen::MatrixXd> cw2() const {
        return {theta_.data() + h_ * in_ + h_, h_, h_};
    }
    Eigen::Map<const Eigen::VectorXd> cb2() const {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_, h_};
    }
    Eigen::Map<const Eigen::MatrixXd> cw3() const {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_ + h_, out_, h_};
    }
    Eigen::Map<const Eigen::VectorXd> cb3() const {
        return {theta_.data() + h_ * in_ + h_ + h_ * h_ + h_ + out_ * h_, out_};
    }

    int in_, h_, out_;
    Eigen::VectorXd theta_;
};

struct AdamState {
    Eigen::VectorXd m, v;
    int t = 0;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(int n, double learning_rate = 3e-4)
        : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)), lr(learning_rate) {}

    void step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad) {
        ++t;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        theta.array() -=
            lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
    }
};

}  // namespace qcool
