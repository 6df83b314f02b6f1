#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dtrl/ibmdp_exact.hpp"
#include "dtrl/oibmdp.hpp"

namespace dtrl {

struct SolverConfig {
    double tolerance = 1e-10;
    std::size_t max_iterations = 100000;
    // policy gradient
    double learning_rate = 0.05;
    double gradient_tolerance = 1e-8;
    std::size_t pg_max_iterations = 5000;
    // tabular q-learning
    double q_step_size = 0.1;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_fraction = 0.8; // linear decay over this fraction of the steps
    std::size_t q_steps = 2000000;
    std::size_t trace_points = 200;
    const std::vector<double>* initial_q = nullptr; // optional warm start, |obs| x |actions|
    std::uint64_t seed = 0;
};

struct TrainingTrace {
    std::vector<std::pair<std::size_t, double>> points; // (iteration or step, J)
    double wall_clock_s = 0.0;
};

// Deterministic reactive policy with its exact evaluation.
struct SolvedPolicy {
    std::vector<int> actions; // per observation
    std::vector<double> V;    // per observation
    double J = 0.0;

    TabularPolicy as_tabular(const ObservationSpace& sp) const { return one_hot_policy(sp, actions); }
};

namespace detail {

// Greedy action per observation under V; ties resolved by canonical action
// order (predicts first, then splits by feature/numerator), and the incumbent
// is kept unless strictly beaten so that stable policies are Bellman optimal.
inline bool greedy_improve(const OibmdpModel& m, const std::vector<double>& V, double v_root,
                           std::vector<int>& actions) {
    const ObservationSpace& sp = m.space;
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    bool changed = false;
    for (std::size_t o = 0; o < sp.size(); ++o) {
        int limit = sp.masked(static_cast<int>(o)) ? K : A;
        int cand = 0;
        double cand_q = m.action_value(static_cast<int>(o), 0, V, v_root);
        for (int a = 1; a < limit; ++a) {
            double q = m.action_value(static_cast<int>(o), a, V, v_root);
            if (q > cand_q) {
                cand = a;
                cand_q = q;
            }
        }
        // switch only on strict improvement; equal maximizers keep the incumbent
        if (cand != actions[o] && cand_q > m.action_value(static_cast<int>(o), actions[o], V, v_root)) {
            actions[o] = cand;
            changed = true;
        }
    }
    return changed;
}

inline double bellman_optimality_residual(const OibmdpModel& m, const SolvedPolicy& sol) {
    const ObservationSpace& sp = m.space;
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    double worst = 0.0;
    for (std::size_t o = 0; o < sp.size(); ++o) {
        int limit = sp.masked(static_cast<int>(o)) ? K : A;
        for (int a = 0; a < limit; ++a)
            worst = std::max(worst, m.action_value(static_cast<int>(o), a, sol.V, sol.V[0]) - sol.V[o]);
    }
    return worst;
}

} // namespace detail

// Policy iteration with exact per-step evaluation. Starts from
// predict-majority everywhere; terminates when greedy improvement changes
// nothing, which for the exact evaluation means Bellman optimality.
inline std::pair<SolvedPolicy, TrainingTrace> policy_iteration(const OibmdpModel& m,
                                                               const SolverConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    const ObservationSpace& sp = m.space;
    SolvedPolicy sol;
    sol.actions.resize(sp.size());
    for (std::size_t o = 0; o < sp.size(); ++o)
        sol.actions[o] = sp.actions.predict_action(majority_class(sp.class_counts[o]));

    TrainingTrace trace;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        auto ev = policy_return(m, one_hot_policy(sp, sol.actions));
        sol.V = std::move(ev.V);
        sol.J = ev.J;
        trace.points.emplace_back(it, sol.J);
        if (!detail::greedy_improve(m, sol.V, sol.V[0], sol.actions)) {
            double res = detail::bellman_optimality_residual(m, sol);
            if (res > cfg.tolerance)
                throw InternalError("policy iteration stabilized with optimality residual " +
                                    std::to_string(res));
            trace.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return {sol, trace};
        }
    }
    throw InternalError("policy iteration hit the iteration cap before stabilizing");
}

// Gauss-Seidel value iteration, deepest observations first so each sweep
// propagates values all the way up the split DAG; the greedy policy is then
// evaluated exactly so J is comparable across solvers.
inline std::pair<SolvedPolicy, TrainingTrace> value_iteration(const OibmdpModel& m,
                                                              const SolverConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    const ObservationSpace& sp = m.space;
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    std::vector<double> V(sp.size(), 0.0);
    TrainingTrace trace;

    const double stop = cfg.tolerance * (1.0 - m.gamma) / m.gamma;
    std::size_t it = 0;
    for (; it < cfg.max_iterations; ++it) {
        double residual = 0.0;
        for (std::size_t oo = sp.size(); oo-- > 0;) {
            int o = static_cast<int>(oo);
            int limit = sp.masked(o) ? K : A;
            double best = m.action_value(o, 0, V, V[0]);
            for (int a = 1; a < limit; ++a) best = std::max(best, m.action_value(o, a, V, V[0]));
            residual = std::max(residual, std::abs(best - V[oo]));
            V[oo] = best;
        }
        trace.points.emplace_back(it, V[0]);
        if (residual <= stop) break;
    }
    if (it == cfg.max_iterations)
        throw InternalError("value iteration hit the iteration cap before reaching its residual target");

    SolvedPolicy sol;
    sol.actions.resize(sp.size());
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        int limit = sp.masked(o) ? K : A;
        int best = 0;
        double best_q = m.action_value(o, 0, V, V[0]);
        for (int a = 1; a < limit; ++a) {
            double q = m.action_value(o, a, V, V[0]);
            if (q > best_q) {
                best = a;
                best_q = q;
            }
        }
        sol.actions[oo] = best;
    }
    auto ev = policy_return(m, one_hot_policy(sp, sol.actions));
    sol.V = std::move(ev.V);
    sol.J = ev.J;
    trace.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {sol, trace};
}

// Tabular epsilon-greedy Q-learning on the observation MDP, simulating split
// outcomes from their counting probabilities. At depth-capped observations
// both acting and bootstrapping are restricted to predictions, matching the
// forced-leaf rule. No optimality guarantee; the trace reports the exact
// return of the greedy policy at checkpoints.
inline std::pair<SolvedPolicy, TrainingTrace> q_learning_dt(const OibmdpModel& m,
                                                            const SolverConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    const ObservationSpace& sp = m.space;
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL);
    auto uniform01 = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };

    std::vector<double> Q(sp.size() * A, 0.0);
    if (cfg.initial_q) {
        if (cfg.initial_q->size() != Q.size()) throw DomainError("initial Q table has the wrong shape");
        Q = *cfg.initial_q;
    }
    auto greedy_at = [&](std::size_t o) {
        int limit = sp.masked(static_cast<int>(o)) ? K : A;
        int best = 0;
        for (int a = 1; a < limit; ++a)
            if (Q[o * A + a] > Q[o * A + best]) best = a;
        return best;
    };
    auto extract = [&] {
        SolvedPolicy sol;
        sol.actions.resize(sp.size());
        for (std::size_t o = 0; o < sp.size(); ++o) sol.actions[o] = greedy_at(o);
        auto ev = policy_return(m, one_hot_policy(sp, sol.actions));
        sol.V = std::move(ev.V);
        sol.J = ev.J;
        return sol;
    };

    TrainingTrace trace;
    const std::size_t checkpoint = std::max<std::size_t>(1, cfg.q_steps / std::max<std::size_t>(1, cfg.trace_points));
    std::size_t o = 0; // root
    for (std::size_t step = 0; step < cfg.q_steps; ++step) {
        double frac = cfg.epsilon_fraction <= 0.0
                          ? 1.0
                          : std::min(1.0, static_cast<double>(step) /
                                              (cfg.epsilon_fraction * static_cast<double>(cfg.q_steps)));
        double eps = cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
        int limit = sp.masked(static_cast<int>(o)) ? K : A;
        int a = uniform01() < eps ? static_cast<int>(rng() % static_cast<std::uint64_t>(limit))
                                  : greedy_at(o);

        double r;
        std::size_t next;
        if (sp.actions.is_predict(a)) {
            r = m.predict_reward(static_cast<int>(o), a);
            next = 0;
        } else {
            r = m.zeta;
            int split = a - K;
            double pl = m.split_low_probability(static_cast<int>(o), split);
            std::int32_t lo = sp.low_child(static_cast<int>(o), split);
            std::int32_t hi = sp.high_child(static_cast<int>(o), split);
            next = static_cast<std::size_t>(uniform01() < pl ? lo : (hi >= 0 ? hi : lo));
        }
        double boot = Q[next * A + greedy_at(next)];
        Q[o * A + a] += cfg.q_step_size * (r + m.gamma * boot - Q[o * A + a]);
        o = next;

        if ((step + 1) % checkpoint == 0 || step + 1 == cfg.q_steps)
            trace.points.emplace_back(step + 1, extract().J);
    }

    SolvedPolicy sol = extract();
    if (trace.points.empty()) trace.points.emplace_back(0, sol.J);
    trace.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {sol, trace};
}

// Exact policy-gradient ascent on the partially observable formulation:
// softmax logits over legal actions, initialized uniform, stepped along the
// exact gradient until the gradient norm is below tolerance or the iteration
// cap. The ascent itself is deterministic. Returns the greedy
// (mode-per-observation) policy of the final softmax together with its exact
// evaluation on the observation MDP.
struct PolicyGradientResult {
    LogitTable logits;
    TabularPolicy policy;
    double J = 0.0;          // return of the final stochastic policy
    SolvedPolicy greedy;     // mode policy, exactly evaluated
    TrainingTrace trace;
};

inline PolicyGradientResult exact_policy_gradient(const IbmdpInstance& inst, const SolverConfig& cfg = {}) {
    auto t0 = std::chrono::steady_clock::now();
    ObservationSpace sp = enumerate_observations(inst);
    FullStateTable table = build_full_state_table(sp);
    const int A = sp.actions.count();

    PolicyGradientResult res;
    res.logits = LogitTable(sp.size(), A);
    for (std::size_t it = 0; it < cfg.pg_max_iterations; ++it) {
        TabularPolicy pi = policy_from_logits(sp, res.logits);
        ExactEvaluation ev = evaluate_policy_exact(table, pi, inst.zeta, inst.gamma);
        res.trace.points.emplace_back(it, ev.J);

        LogitTable grad = policy_gradient_exact(table, res.logits, inst.zeta, inst.gamma);
        double norm = 0.0;
        for (double g : grad.values) norm += g * g;
        norm = std::sqrt(norm);
        if (norm < cfg.gradient_tolerance) break;
        for (std::size_t i = 0; i < res.logits.values.size(); ++i)
            res.logits.values[i] += cfg.learning_rate * grad.values[i];
    }

    res.policy = policy_from_logits(sp, res.logits);
    res.J = evaluate_policy_exact(table, res.policy, inst.zeta, inst.gamma).J;

    // mode policy, for tree extraction
    OibmdpModel model = build_model(inst);
    res.greedy.actions.resize(sp.size());
    for (std::size_t o = 0; o < sp.size(); ++o) {
        const double* row = res.policy.row(o);
        int best = 0;
        for (int a = 1; a < A; ++a)
            if (row[a] > row[best]) best = a;
        res.greedy.actions[o] = best;
    }
    auto gev = policy_return(model, one_hot_policy(model.space, res.greedy.actions));
    res.greedy.V = std::move(gev.V);
    res.greedy.J = gev.J;
    res.trace.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace dtrl
