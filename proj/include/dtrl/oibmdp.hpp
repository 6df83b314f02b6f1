#pragma once

#include <cmath>
#include <ostream>
#include <vector>

#include "dtrl/policy.hpp"

namespace dtrl {

// The fully observable MDP over feature bounds. States are the reachable
// non-empty boxes; prediction rewards are class-count averages over the box,
// split transitions move to the two refined boxes with probability
// proportional to their routed sample counts. Structure (boxes, counts,
// edges) is shared with the partially observable formulation through
// ObservationSpace; zeta and gamma live here.
struct OibmdpModel {
    ObservationSpace space;
    double zeta = 0.5;
    double gamma = 0.99;

    std::size_t observation_count() const { return space.size(); }
    const ActionSpace& actions() const { return space.actions; }
    int root() const { return 0; }

    // R''(o, predict h) = (|X_h| - |X_not_h|) / |X|, exact counts.
    Rational predict_reward_rational(int o, int cls) const {
        auto n = static_cast<std::int64_t>(space.samples[o].size());
        auto good = static_cast<std::int64_t>(space.class_counts[o][cls]);
        return Rational(2 * good - n, n);
    }
    double predict_reward(int o, int cls) const {
        auto n = static_cast<double>(space.samples[o].size());
        auto good = static_cast<double>(space.class_counts[o][cls]);
        return (2.0 * good - n) / n;
    }

    double reward(int o, int a) const {
        return actions().is_predict(a) ? predict_reward(o, a) : zeta;
    }

    // Probability that a split lands in its low box: |X_low| / |X_o|.
    double split_low_probability(int o, int split) const {
        std::int32_t lo = space.low_child(o, split);
        double nl = lo < 0 ? 0.0 : static_cast<double>(space.samples[lo].size());
        return nl / static_cast<double>(space.samples[o].size());
    }

    // One-step lookahead value of an action given V over observations and the
    // value at the root (predictions always reset to the root box).
    double action_value(int o, int a, const std::vector<double>& V, double v_root) const {
        if (actions().is_predict(a)) return predict_reward(o, a) + gamma * v_root;
        int split = a - actions().num_classes;
        std::int32_t lo = space.low_child(o, split);
        std::int32_t hi = space.high_child(o, split);
        double nl = lo < 0 ? 0.0 : static_cast<double>(space.samples[lo].size());
        double nh = hi < 0 ? 0.0 : static_cast<double>(space.samples[hi].size());
        double n = nl + nh;
        double cont = 0.0;
        if (lo >= 0) cont += (nl / n) * V[lo];
        if (hi >= 0) cont += (nh / n) * V[hi];
        return zeta + gamma * cont;
    }
};

// Majority class of a class-count histogram, ties to the lowest index.
inline int majority_class(const std::vector<std::uint32_t>& counts) {
    int best = 0;
    for (int h = 1; h < static_cast<int>(counts.size()); ++h)
        if (counts[h] > counts[best]) best = h;
    return best;
}

inline OibmdpModel build_model(const Dataset& ds, int p, double zeta, double gamma, int max_igas) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw DomainError("gamma must be in [0,1)");
    if (max_igas < 1) throw DomainError("max depth must be >= 1");
    if (zeta > 1.0) throw DomainError("zeta above the maximum base reward 1 is degenerate");
    OibmdpModel m;
    m.space = enumerate_observations(ds, p, max_igas);
    m.zeta = zeta;
    m.gamma = gamma;
    return m;
}

inline OibmdpModel build_model(const IbmdpInstance& inst) {
    return build_model(*inst.dataset, inst.p, inst.zeta, inst.gamma, inst.max_igas);
}

// Exact policy evaluation on the observation chain. Split successors are
// strictly deeper boxes and predictions lead to the root, so V(o) is solved
// directly by back-substitution with one scalar equation at the root.
struct ObservationEvaluation {
    double J = 0.0;
    std::vector<double> V;
};

inline ObservationEvaluation policy_return(const OibmdpModel& m, const TabularPolicy& pi) {
    const ObservationSpace& sp = m.space;
    const int K = sp.actions.num_classes;
    const int splits = sp.actions.split_count();
    const double gamma = m.gamma;

    std::vector<double> c(sp.size(), 0.0), b(sp.size(), 0.0);
    for (std::size_t oo = sp.size(); oo-- > 0;) {
        int o = static_cast<int>(oo);
        const double* row = pi.row(oo);
        double cs = 0.0, bs = 0.0;
        for (int h = 0; h < K; ++h) {
            double pa = row[h];
            if (pa == 0.0) continue;
            cs += pa * m.predict_reward(o, h);
            bs += pa * gamma;
        }
        if (!sp.masked(o)) {
            double n = static_cast<double>(sp.samples[o].size());
            for (int sa = 0; sa < splits; ++sa) {
                double pa = row[K + sa];
                if (pa == 0.0) continue;
                std::int32_t lo = sp.low_child(o, sa);
                std::int32_t hi = sp.high_child(o, sa);
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
                cs += pa * (m.zeta + gamma * cc);
                bs += pa * gamma * cb;
            }
        }
        c[o] = cs;
        b[o] = bs;
    }

    ObservationEvaluation ev;
    double v_root = c[0] / (1.0 - b[0]);
    ev.J = v_root;
    ev.V.resize(sp.size());
    for (std::size_t o = 0; o < sp.size(); ++o) ev.V[o] = c[o] + b[o] * v_root;
    return ev;
}

// Verifies that the model's counting rewards and transitions equal the
// marginalization of the full-state dynamics under p(s|o) = 1/|X_o|,
// recounting everything directly from the dataset. Returns the largest
// absolute discrepancy found.
struct ConsistencyReport {
    double max_reward_discrepancy = 0.0;
    double max_transition_discrepancy = 0.0;

    double worst() const { return std::max(max_reward_discrepancy, max_transition_discrepancy); }
};

inline ConsistencyReport marginal_consistency(const OibmdpModel& m) {
    const ObservationSpace& sp = m.space;
    const Dataset& ds = *sp.dataset;
    const int K = sp.actions.num_classes;
    const int splits = sp.actions.split_count();
    ConsistencyReport rep;

    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        const auto& xs = sp.samples[oo];
        for (int h = 0; h < K; ++h) {
            double mean = 0.0;
            for (auto i : xs) mean += ds.labels[i] == h ? 1.0 : -1.0;
            mean /= static_cast<double>(xs.size());
            rep.max_reward_discrepancy =
                std::max(rep.max_reward_discrepancy, std::abs(mean - m.predict_reward(o, h)));
        }
        if (sp.masked(o)) continue;
        for (int sa = 0; sa < splits; ++sa) {
            int feature = sa / sp.p;
            Rational v = split_threshold(sp.bounds[oo], feature, sa % sp.p + 1, sp.p);
            std::size_t low = 0;
            for (auto i : xs)
                if (double_leq_rational(ds.at(i, feature), v)) ++low;
            double frac = static_cast<double>(low) / static_cast<double>(xs.size());
            rep.max_transition_discrepancy =
                std::max(rep.max_transition_discrepancy, std::abs(frac - m.split_low_probability(o, sa)));
        }
    }
    return rep;
}

// Debug dump: every observation with its rational bounds, depth, class
// counts, prediction rewards and split transitions. Stable text format for
// diffing against other implementations.
inline void dump_model(const OibmdpModel& m, std::ostream& out) {
    const ObservationSpace& sp = m.space;
    out << "oibmdp-dump v1\n";
    out << "observations " << sp.size() << " actions " << sp.actions.count() << " p " << sp.p
        << " max_depth " << sp.max_igas << " zeta " << m.zeta << " gamma " << m.gamma << "\n";
    for (std::size_t oo = 0; oo < sp.size(); ++oo) {
        int o = static_cast<int>(oo);
        out << "obs " << o << " depth " << sp.depth[o] << " n " << sp.samples[oo].size() << " bounds "
            << sp.bounds[oo].str() << "\n";
        for (int h = 0; h < sp.actions.num_classes; ++h)
            out << "  predict " << h << " reward " << m.predict_reward_rational(o, h).str()
                << " -> obs 0\n";
        if (sp.masked(o)) continue;
        for (int sa = 0; sa < sp.actions.split_count(); ++sa) {
            std::int32_t lo = sp.low_child(o, sa);
            std::int32_t hi = sp.high_child(o, sa);
            auto nl = static_cast<std::int64_t>(lo < 0 ? 0 : sp.samples[lo].size());
            auto n = static_cast<std::int64_t>(sp.samples[oo].size());
            out << "  split f" << sa / sp.p << " " << sa % sp.p + 1 << "/" << sp.p + 1 << " reward "
                << m.zeta << " -> low " << lo << " p " << Rational(nl, n).str() << " high " << hi
                << " p " << Rational(n - nl, n).str() << "\n";
        }
    }
}

} // namespace dtrl
