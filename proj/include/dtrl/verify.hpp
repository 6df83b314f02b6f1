#pragma once

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "dtrl/solvers.hpp"
#include "dtrl/toy.hpp"

namespace dtrl {

struct CheckReport {
    bool pass = false;
    double max_discrepancy = 0.0;
    double tolerance = 0.0;
    std::string detail;        // human summary
    std::string replay;        // serialized offending case, empty if none
};

// Return equivalence of the two formulations: any reactive policy earns the
// same return on the full-state process and on the observation process. Runs
// seeded random stochastic policies on every toy task and compares the two
// exact evaluations.
inline CheckReport check_return_equivalence(std::uint64_t seed, int policies_per_task = 100) {
    CheckReport rep;
    rep.tolerance = 1e-8;
    std::uint64_t worst_policy = 0;
    std::uint64_t worst_task = 0;
    for (std::uint64_t task_seed = 0; task_seed < 5; ++task_seed) {
        ToyTask task = gen_toy(task_seed);
        IbmdpInstance inst(task.dataset, 1, 0.5, 0.99, 3);
        OibmdpModel model = build_model(inst);
        FullStateTable table = build_full_state_table(model.space);
        for (int t = 0; t < policies_per_task; ++t) {
            std::mt19937_64 rng(seed * 1000003ULL + task_seed * 1009ULL + static_cast<std::uint64_t>(t));
            TabularPolicy pi = random_policy(model.space, rng);
            double j_full = evaluate_policy_exact(table, pi, inst.zeta, inst.gamma).J;
            double j_obs = policy_return(model, pi).J;
            double diff = std::abs(j_full - j_obs);
            if (diff > rep.max_discrepancy) {
                rep.max_discrepancy = diff;
                worst_task = task_seed;
                worst_policy = static_cast<std::uint64_t>(t);
            }
        }
    }
    rep.pass = rep.max_discrepancy <= rep.tolerance;
    std::ostringstream os;
    os << "return equivalence over 5 toy tasks x " << policies_per_task
       << " random reactive policies: max |J_full - J_obs| = " << rep.max_discrepancy;
    rep.detail = os.str();
    if (!rep.pass) {
        std::ostringstream rs;
        rs << "task_seed " << worst_task << " policy_index " << worst_policy << " rng_seed " << seed;
        rep.replay = rs.str();
    }
    return rep;
}

// Depth recovery from bounds: along simulated trajectories, the depth decoded
// from the bound denominators must equal the true number of splits since the
// last prediction, at every step.
inline CheckReport check_depth_recovery(std::uint64_t seed, int steps_per_config = 10000) {
    CheckReport rep;
    rep.tolerance = 0.0;

    struct Config {
        int p;
        int d;
    };
    const Config configs[] = {{1, 2}, {2, 3}};
    long mismatches = 0;
    std::string first_bad;

    for (const Config& c : configs) {
        // any dataset of the right dimension serves; random points, two classes
        Dataset ds;
        ds.n = 30;
        ds.d = c.d;
        ds.name = "depth-check";
        ds.class_names = {"a", "b"};
        for (int k = 0; k < c.d; ++k) {
            ds.feature_names.push_back("f" + std::to_string(k));
            ds.scaler.emplace_back(0.0, 1.0);
        }
        std::mt19937_64 rng(seed * 7919ULL + static_cast<std::uint64_t>(c.p * 131 + c.d));
        auto uniform01 = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
        ds.samples.resize(ds.n * ds.d);
        ds.labels.resize(ds.n);
        for (std::size_t i = 0; i < ds.n; ++i) {
            for (int k = 0; k < c.d; ++k) ds.samples[i * ds.d + k] = uniform01();
            ds.labels[i] = static_cast<int>(rng() % 2);
        }

        const int cap = 12; // keeps denominators tiny; recovery is exact at any depth
        IbmdpInstance inst(ds, c.p, 0.3, 0.99, cap);
        IbmdpSimulator sim(inst);
        sim.reset(rng);
        ActionSpace as = inst.actions();
        for (int step = 0; step < steps_per_config; ++step) {
            int action;
            if (sim.splits_since_predict >= cap || uniform01() < 0.3)
                action = static_cast<int>(rng() % static_cast<std::uint64_t>(as.num_classes));
            else
                action = as.num_classes +
                         static_cast<int>(rng() % static_cast<std::uint64_t>(as.split_count()));
            sim.step(action, rng);
            int recovered = igas_since_base(sim.state.bounds, c.p);
            if (recovered != sim.splits_since_predict) {
                ++mismatches;
                if (first_bad.empty()) {
                    std::ostringstream rs;
                    rs << "p " << c.p << " d " << c.d << " step " << step << " true "
                       << sim.splits_since_predict << " recovered " << recovered << " bounds "
                       << sim.state.bounds.str();
                    first_bad = rs.str();
                }
            }
        }
    }
    rep.max_discrepancy = static_cast<double>(mismatches);
    rep.pass = mismatches == 0;
    std::ostringstream os;
    os << "depth recovery over " << steps_per_config << " steps at (p=1,d=2) and (p=2,d=3): "
       << mismatches << " mismatches";
    rep.detail = os.str();
    rep.replay = first_bad;
    return rep;
}

// The exact gradient against central finite differences of the exact return,
// every legal coordinate of random logit tables on a toy instance.
inline CheckReport check_gradient(std::uint64_t seed, int tables = 20, double fd_step = 1e-5) {
    CheckReport rep;
    rep.tolerance = 1e-5;
    ToyTask task = gen_toy(seed % 5);
    IbmdpInstance inst(task.dataset, 1, 0.5, 0.99, 3);
    ObservationSpace sp = enumerate_observations(inst);
    FullStateTable table = build_full_state_table(sp);
    const int A = sp.actions.count();
    const int K = sp.actions.num_classes;

    std::mt19937_64 rng(seed * 65537ULL + 17);
    auto uniform01 = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
    auto gauss = [&] {
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    };

    std::string worst_case;
    for (int t = 0; t < tables; ++t) {
        LogitTable theta(sp.size(), A);
        for (std::size_t o = 0; o < sp.size(); ++o) {
            int limit = sp.masked(static_cast<int>(o)) ? K : A;
            for (int a = 0; a < limit; ++a) theta.row(o)[a] = gauss();
        }
        LogitTable grad = policy_gradient_exact(table, theta, inst.zeta, inst.gamma);
        for (std::size_t o = 0; o < sp.size(); ++o) {
            int limit = sp.masked(static_cast<int>(o)) ? K : A;
            for (int a = 0; a < limit; ++a) {
                double saved = theta.row(o)[a];
                theta.row(o)[a] = saved + fd_step;
                double jp = evaluate_policy_exact(table, policy_from_logits(sp, theta), inst.zeta,
                                                  inst.gamma)
                                .J;
                theta.row(o)[a] = saved - fd_step;
                double jm = evaluate_policy_exact(table, policy_from_logits(sp, theta), inst.zeta,
                                                  inst.gamma)
                                .J;
                theta.row(o)[a] = saved;
                double fd = (jp - jm) / (2.0 * fd_step);
                double diff = std::abs(fd - grad.row(o)[a]);
                if (diff > rep.max_discrepancy) {
                    rep.max_discrepancy = diff;
                    std::ostringstream rs;
                    rs << "table " << t << " obs " << o << " action " << a << " analytic "
                       << grad.row(o)[a] << " fd " << fd;
                    worst_case = rs.str();
                }
            }
        }
    }
    rep.pass = rep.max_discrepancy <= rep.tolerance;
    std::ostringstream os;
    os << "gradient vs central differences over " << tables
       << " random logit tables: max abs error = " << rep.max_discrepancy;
    rep.detail = os.str();
    if (!rep.pass) rep.replay = worst_case;
    return rep;
}

// Policy iteration against exhaustive search: at max depth 2 the toy models
// are small enough to enumerate every deterministic reactive policy.
inline CheckReport check_exhaustive_optimum(std::uint64_t seed) {
    (void)seed; // tasks are the five fixed toy seeds
    CheckReport rep;
    rep.tolerance = 1e-10;
    for (std::uint64_t task_seed = 0; task_seed < 5; ++task_seed) {
        ToyTask task = gen_toy(task_seed);
        OibmdpModel model = build_model(task.dataset, 1, 0.5, 0.99, 2);
        const ObservationSpace& sp = model.space;
        const int A = sp.actions.count();
        const int K = sp.actions.num_classes;

        auto [pi_sol, pi_trace] = policy_iteration(model);
        (void)pi_trace;

        std::vector<int> choice_limit(sp.size());
        for (std::size_t o = 0; o < sp.size(); ++o)
            choice_limit[o] = sp.masked(static_cast<int>(o)) ? K : A;

        // allocation-free deterministic evaluation, same recurrence as
        // policy_return restricted to one-hot rows
        std::vector<double> c(sp.size()), b(sp.size());
        auto eval_det = [&](const std::vector<int>& acts) {
            for (std::size_t oo = sp.size(); oo-- > 0;) {
                int o = static_cast<int>(oo);
                int a = acts[oo];
                if (sp.actions.is_predict(a)) {
                    c[oo] = model.predict_reward(o, a);
                    b[oo] = model.gamma;
                } else {
                    int split = a - K;
                    std::int32_t lo = sp.low_child(o, split);
                    std::int32_t hi = sp.high_child(o, split);
                    double n = static_cast<double>(sp.samples[oo].size());
                    double cc = 0.0, cb = 0.0;
                    if (lo >= 0) {
                        double w = static_cast<double>(sp.samples[lo].size()) / n;
                        cc += w * c[lo];
                        cb += w * b[lo];
                    }
                    if (hi >= 0) {
                        double w = static_cast<double>(sp.samples[hi].size()) / n;
                        cc += w * c[hi];
                        cb += w * b[hi];
                    }
                    c[oo] = model.zeta + model.gamma * cc;
                    b[oo] = model.gamma * cb;
                }
            }
            return c[0] / (1.0 - b[0]);
        };

        std::vector<int> actions(sp.size(), 0);
        double best = -1e300;
        // odometer over all deterministic reactive policies
        for (;;) {
            best = std::max(best, eval_det(actions));
            std::size_t pos = 0;
            while (pos < sp.size()) {
                if (++actions[pos] < choice_limit[pos]) break;
                actions[pos] = 0;
                ++pos;
            }
            if (pos == sp.size()) break;
        }
        double diff = std::abs(best - pi_sol.J);
        rep.max_discrepancy = std::max(rep.max_discrepancy, diff);
        if (diff > rep.tolerance && rep.replay.empty()) {
            std::ostringstream rs;
            rs << "task_seed " << task_seed << " exhaustive " << best << " policy_iteration "
               << pi_sol.J;
            rep.replay = rs.str();
        }
    }
    rep.pass = rep.max_discrepancy <= rep.tolerance;
    std::ostringstream os;
    os << "policy iteration vs exhaustive policy enumeration on 5 toy tasks (max depth 2): max |dJ| = "
       << rep.max_discrepancy;
    rep.detail = os.str();
    return rep;
}

} // namespace dtrl
