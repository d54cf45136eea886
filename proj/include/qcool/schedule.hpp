// Step-1 schedule utilities: closed-system evaluation of an interval sequence
// and the deterministic beam-search baseline.

#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "qcool/fock.hpp"
#include "qcool/measurement.hpp"

namespace qcool {

// Per-action cooling coefficient tables for tau = a*tau_r, a = 1..d.
// Unconditional maps during search and training reduce to O(n_c) updates.
class UnconditionalMapTable {
  public:
    UnconditionalMapTable(const PhysicalParams& params, int n_r, int actions)
        : n_c_(params.n_c), actions_(actions) {
        const double tau_r = reserved_interval(params, n_r);
        a2_.resize(static_cast<std::size_t>(actions));
        b2_.resize(static_cast<std::size_t>(actions));
        for (int a = 0; a < actions; ++a) {
            const double tau = (a + 1) * tau_r;
            auto& a2 = a2_[static_cast<std::size_t>(a)];
            auto& b2 = b2_[static_cast<std::size_t>(a)];
            a2.resize(static_cast<std::size_t>(n_c_) + 2);
            b2.resize(static_cast<std::size_t>(n_c_) + 2);
            for (int n = 0; n <= n_c_ + 1; ++n) {
                const auto c = cooling_coeffs(params, n, tau);
                a2[static_cast<std::size_t>(n)] = std::norm(c.alpha);
                b2[static_cast<std::size_t>(n)] = std::norm(c.beta);
            }
        }
    }

    int actions() const { return actions_; }

    // In-place map for action a (0-based); returns the cutoff leak.
    double apply(std::vector<double>& p, int a, std::vector<double>& scratch) const {
        const auto& a2 = a2_[static_cast<std::size_t>(a)];
        const auto& b2 = b2_[static_cast<std::size_t>(a)];
        scratch.resize(p.size());
        const double leak = p.back() * b2[p.size()];
        double norm = 0.0;
        for (std::size_t n = 0; n < p.size(); ++n) {
            double v = p[n] * a2[n + 1];
            if (n >= 1) v += p[n - 1] * b2[n];
            scratch[n] = v;
            norm += v;
        }
        for (std::size_t n = 0; n < p.size(); ++n) p[n] = scratch[n] / norm;
        return leak;
    }

  private:
    int n_c_;
    int actions_;
    std::vector<std::vector<double>> a2_, b2_;
};

// Reserved-state fidelity after running `multiples` (entries in 1..d) of
// unconditional maps on the thermal state.
inline double schedule_fidelity(const PhysicalParams& params, int n_r,
                                const std::vector<int>& multiples) {
    const auto spec = thermal_occupation(params);
    auto pops = thermal_state(spec, params.n_c);
    const double tau_r = reserved_interval(params, n_r);
    for (int a : multiples)
        pops = unconditional_map(pops, params, a * tau_r).post_state;
    return fidelity(pops, n_r);
}

inline std::vector<int> equal_spacing_schedule(int rounds) {
    return std::vector<int>(static_cast<std::size_t>(rounds), 1);
}

// Deterministic beam search over the d^M interval tree maximizing the
// reserved-state fidelity. Ties break toward the lexicographically smaller
// sequence; with beam_width >= d^M this is exhaustive enumeration.
inline std::vector<int> beam_search_schedule(const PhysicalParams& params, int n_r,
                                             int rounds, int beam_width,
                                             int actions = 5) {
    if (beam_width < 1) throw std::invalid_argument("beam_search_schedule: B must be >= 1");
    if (actions < 1) throw std::invalid_argument("beam_search_schedule: d must be >= 1");
    const UnconditionalMapTable table(params, n_r, actions);
    const auto spec = thermal_occupation(params);
    struct Node {
        std::vector<double> p;
        std::vector<int> seq;
        double score;
    };
    std::vector<Node> beam;
    beam.push_back({thermal_state(spec, params.n_c).p, {}, 0.0});
    std::vector<double> scratch;
    for (int step = 0; step < rounds; ++step) {
        std::vector<Node> cand;
        cand.reserve(beam.size() * static_cast<std::size_t>(actions));
        for (const auto& node : beam) {
            for (int a = 0; a < actions; ++a) {
                Node next;
                next.p = node.p;
                table.apply(next.p, a, scratch);
                next.seq = node.seq;
                next.seq.push_back(a + 1);
                next.score = next.p[static_cast<std::size_t>(n_r)];
                cand.push_back(std::move(next));
            }
        }
        std::sort(cand.begin(), cand.end(), [](const Node& x, const Node& y) {
            if (x.score != y.score) return x.score > y.score;
            return x.seq < y.seq;
        });
        if (static_cast<int>(cand.size()) > beam_width) cand.resize(static_cast<std::size_t>(beam_width));
        beam = std::move(cand);
    }
    return beam.front().seq;
}

}  // namespace qcool
