#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dtrl/policy.hpp"

namespace dtrl {

// Exact policy evaluation, occupancy and policy gradient on the full state
// space (sample, bounds). Predictions all lead back to the uniform initial
// distribution and splits strictly refine a bound, so the transition graph is
// a DAG plus one scalar feedback through the initial value W = mean_i V(i, root).
// Writing V(s) = c(s) + b(s) * W and back-substituting in reverse
// breadth-first order solves the Bellman system directly; b <= gamma < 1
// keeps the final scalar equation well posed. The same structure solves the
// occupancy flow equations with two forward passes. Exact direct solves,
// deterministic at every model size.

// Precomputed routed successor of every (full state, split action) pair.
struct FullStateTable {
    const ObservationSpace* space = nullptr;
    std::vector<std::size_t> successor; // total_states x split_count, row-major
    std::vector<std::uint32_t> obs_of;  // observation index per state

    std::size_t next(std::size_t state, int split) const {
        return successor[state * space->actions.split_count() + split];
    }
};

inline FullStateTable build_full_state_table(const ObservationSpace& sp) {
    FullStateTable t;
    t.space = &sp;
    const int splits = sp.actions.split_count();
    const int p = sp.p;
    t.successor.assign(sp.total_states * splits, 0);
    t.obs_of.resize(sp.total_states);
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) t.obs_of[sp.state_of(o, j)] = oo;
        if (sp.masked(o)) continue;
        for (int sa = 0; sa < splits; ++sa) {
            int feature = sa / p;
            Rational v = split_threshold(sp.bounds[oo], feature, sa % p + 1, p);
            for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
                std::uint32_t i = sp.samples[oo][j];
                bool low = double_leq_rational(sp.dataset->at(i, feature), v);
                std::int32_t child = low ? sp.low_child(o, sa) : sp.high_child(o, sa);
                if (child < 0) throw InternalError("routed sample fell into a pruned child");
                t.successor[sp.state_of(o, j) * splits + sa] = sp.state_of(child, sp.position_of(child, i));
            }
        }
    }
    return t;
}

struct ExactEvaluation {
    double J = 0.0;
    std::vector<double> V; // per full state
    std::vector<double> Q; // per full state x action, row-major
    std::size_t action_count = 0;

    double q(std::size_t state, int a) const { return Q[state * action_count + a]; }
    double advantage(std::size_t state, int a) const { return q(state, a) - V[state]; }
};

// Full-state policy evaluation: J, V, and the one-step lookahead Q for every
// reachable (sample, bounds) pair.
inline ExactEvaluation evaluate_policy_exact(const FullStateTable& t, const TabularPolicy& pi,
                                             double zeta, double gamma) {
    const ObservationSpace& sp = *t.space;
    const Dataset& ds = *sp.dataset;
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    const int splits = sp.actions.split_count();

    std::vector<double> c(sp.total_states, 0.0), b(sp.total_states, 0.0);

    for (std::size_t oo = sp.size(); oo-- > 0;) {
        int o = static_cast<int>(oo);
        bool capped = sp.masked(o);
        const double* row = pi.row(oo);
        for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
            std::size_t s = sp.state_of(o, j);
            std::uint32_t i = sp.samples[oo][j];
            double cs = 0.0, bs = 0.0;
            for (int h = 0; h < K; ++h) {
                double pa = row[h];
                if (pa == 0.0) continue;
                cs += pa * (ds.labels[i] == h ? 1.0 : -1.0);
                bs += pa * gamma;
            }
            if (!capped) {
                for (int sa = 0; sa < splits; ++sa) {
                    double pa = row[K + sa];
                    if (pa == 0.0) continue;
                    std::size_t nxt = t.next(s, sa);
                    cs += pa * (zeta + gamma * c[nxt]);
                    bs += pa * gamma * b[nxt];
                }
            }
            c[s] = cs;
            b[s] = bs;
        }
    }

    const std::size_t n0 = sp.samples[0].size();
    double mc = 0.0, mb = 0.0;
    for (std::uint32_t j = 0; j < n0; ++j) {
        mc += c[sp.state_of(0, j)];
        mb += b[sp.state_of(0, j)];
    }
    mc /= static_cast<double>(n0);
    mb /= static_cast<double>(n0);
    double W = mc / (1.0 - mb);

    ExactEvaluation ev;
    ev.action_count = static_cast<std::size_t>(A);
    ev.J = W;
    ev.V.resize(sp.total_states);
    for (std::size_t s = 0; s < sp.total_states; ++s) ev.V[s] = c[s] + b[s] * W;

    ev.Q.assign(sp.total_states * A, 0.0);
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        bool capped = sp.masked(o);
        for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
            std::size_t s = sp.state_of(o, j);
            std::uint32_t i = sp.samples[oo][j];
            double* qrow = ev.Q.data() + s * A;
            for (int h = 0; h < K; ++h)
                qrow[h] = (ds.labels[i] == h ? 1.0 : -1.0) + gamma * W;
            if (!capped)
                for (int sa = 0; sa < splits; ++sa)
                    qrow[K + sa] = zeta + gamma * ev.V[t.next(s, sa)];
        }
    }
    return ev;
}

inline ExactEvaluation evaluate_policy_exact(const IbmdpInstance& inst, const TabularPolicy& pi) {
    ObservationSpace sp = enumerate_observations(inst);
    return evaluate_policy_exact(build_full_state_table(sp), pi, inst.zeta, inst.gamma);
}

// Largest Bellman residual |V(s) - sum_a pi(a) Q(s,a)| over all states.
inline double bellman_residual(const FullStateTable& t, const TabularPolicy& pi, const ExactEvaluation& ev) {
    double worst = 0.0;
    for (std::size_t s = 0; s < t.space->total_states; ++s) {
        const double* row = pi.row(t.obs_of[s]);
        double v = 0.0;
        for (int a = 0; a < static_cast<int>(ev.action_count); ++a)
            if (row[a] != 0.0) v += row[a] * ev.q(s, a);
        worst = std::max(worst, std::abs(v - ev.V[s]));
    }
    return worst;
}

// Normalized discounted occupancy over full states:
// p(s) = (1-gamma) * sum_t gamma^t Pr(s_t = s); entries sum to 1.
inline std::vector<double> occupancy(const FullStateTable& t, const TabularPolicy& pi, double gamma) {
    const ObservationSpace& sp = *t.space;
    const int K = sp.actions.num_classes;
    const int splits = sp.actions.split_count();
    const std::size_t n0 = sp.samples[0].size();

    std::vector<double> alpha(sp.total_states, 0.0), beta(sp.total_states, 0.0);
    for (std::uint32_t j = 0; j < n0; ++j) {
        alpha[sp.state_of(0, j)] = (1.0 - gamma) / static_cast<double>(n0);
        beta[sp.state_of(0, j)] = gamma / static_cast<double>(n0);
    }

    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        if (sp.masked(o)) continue;
        const double* row = pi.row(oo);
        for (int sa = 0; sa < splits; ++sa) {
            double pa = row[K + sa];
            if (pa == 0.0) continue;
            for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
                std::size_t s = sp.state_of(o, j);
                if (alpha[s] == 0.0 && beta[s] == 0.0) continue;
                std::size_t nxt = t.next(s, sa);
                alpha[nxt] += gamma * pa * alpha[s];
                beta[nxt] += gamma * pa * beta[s];
            }
        }
    }

    // F = total discounted prediction flow; rho = alpha + F * beta.
    double fa = 0.0, fb = 0.0;
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        const double* row = pi.row(oo);
        double pk = 0.0;
        for (int h = 0; h < K; ++h) pk += row[h];
        if (pk == 0.0) continue;
        for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
            std::size_t s = sp.state_of(static_cast<int>(oo), j);
            fa += pk * alpha[s];
            fb += pk * beta[s];
        }
    }
    double F = fa / (1.0 - fb);

    std::vector<double> rho(sp.total_states);
    for (std::size_t s = 0; s < sp.total_states; ++s) rho[s] = alpha[s] + F * beta[s];
    return rho;
}

inline std::vector<double> occupancy(const IbmdpInstance& inst, const TabularPolicy& pi) {
    ObservationSpace sp = enumerate_observations(inst);
    return occupancy(build_full_state_table(sp), pi, inst.gamma);
}

// Exact policy gradient of J with respect to softmax logits of a reactive
// policy: dJ/dtheta(o,a) = sum_{s: O(s)=o} p(s)/(1-gamma) * pi(a|o) * A(s,a).
// Masked pairs get zero.
inline LogitTable policy_gradient_exact(const FullStateTable& t, const LogitTable& theta,
                                        double zeta, double gamma) {
    const ObservationSpace& sp = *t.space;
    TabularPolicy pi = policy_from_logits(sp, theta);
    ExactEvaluation ev = evaluate_policy_exact(t, pi, zeta, gamma);
    std::vector<double> rho = occupancy(t, pi, gamma);

    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    LogitTable grad(sp.size(), A);
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int limit = sp.masked(static_cast<int>(oo)) ? K : A;
        const double* row = pi.row(oo);
        double* g = grad.row(oo);
        for (std::uint32_t j = 0; j < sp.samples[oo].size(); ++j) {
            std::size_t s = sp.state_of(static_cast<int>(oo), j);
            if (rho[s] == 0.0) continue;
            double w = rho[s] / (1.0 - gamma);
            for (int a = 0; a < limit; ++a) g[a] += w * row[a] * ev.advantage(s, a);
        }
    }
    return grad;
}

inline LogitTable policy_gradient_exact(const IbmdpInstance& inst, const LogitTable& theta) {
    ObservationSpace sp = enumerate_observations(inst);
    return policy_gradient_exact(build_full_state_table(sp), theta, inst.zeta, inst.gamma);
}

} // namespace dtrl
