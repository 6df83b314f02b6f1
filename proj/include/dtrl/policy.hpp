#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dtrl/ibmdp.hpp"

namespace dtrl {

// Row-major |observations| x |actions| table of action probabilities. Rows at
// depth-capped observations put all mass on prediction actions.
struct TabularPolicy {
    std::size_t observation_count = 0;
    int action_count = 0;
    std::vector<double> probs;

    TabularPolicy() = default;
    TabularPolicy(std::size_t obs, int acts)
        : observation_count(obs), action_count(acts), probs(obs * acts, 0.0) {}

    double* row(std::size_t o) { return probs.data() + o * action_count; }
    const double* row(std::size_t o) const { return probs.data() + o * action_count; }
    double at(std::size_t o, int a) const { return probs[o * action_count + a]; }
};

// Logits of a softmax policy, same shape and masking as TabularPolicy.
struct LogitTable {
    std::size_t observation_count = 0;
    int action_count = 0;
    std::vector<double> values;

    LogitTable() = default;
    LogitTable(std::size_t obs, int acts)
        : observation_count(obs), action_count(acts), values(obs * acts, 0.0) {}

    double* row(std::size_t o) { return values.data() + o * action_count; }
    const double* row(std::size_t o) const { return values.data() + o * action_count; }
};

inline TabularPolicy policy_from_logits(const ObservationSpace& sp, const LogitTable& th) {
    TabularPolicy pi(sp.size(), sp.actions.count());
    const int K = sp.actions.num_classes;
    for (std::size_t o = 0; o < sp.size(); ++o) {
        int limit = sp.masked(static_cast<int>(o)) ? K : sp.actions.count();
        const double* t = th.row(o);
        double m = t[0];
        for (int a = 1; a < limit; ++a) m = std::max(m, t[a]);
        double z = 0.0;
        for (int a = 0; a < limit; ++a) z += std::exp(t[a] - m);
        double* r = pi.row(o);
        for (int a = 0; a < limit; ++a) r[a] = std::exp(t[a] - m) / z;
    }
    return pi;
}

// Uniform over the legal actions of each observation.
inline TabularPolicy uniform_policy(const ObservationSpace& sp) {
    return policy_from_logits(sp, LogitTable(sp.size(), sp.actions.count()));
}

// One-hot rows from a deterministic action choice per observation.
inline TabularPolicy one_hot_policy(const ObservationSpace& sp, const std::vector<int>& action) {
    TabularPolicy pi(sp.size(), sp.actions.count());
    for (std::size_t o = 0; o < sp.size(); ++o) {
        if (sp.masked(static_cast<int>(o)) && !sp.actions.is_predict(action[o]))
            throw DomainError("deterministic policy selects a split at the depth cap");
        pi.row(o)[action[o]] = 1.0;
    }
    return pi;
}

// Random stochastic reactive policy: exponential weights normalized per row,
// restricted to legal actions. Deterministic in the generator state.
template <typename Rng>
inline TabularPolicy random_policy(const ObservationSpace& sp, Rng& rng) {
    auto uniform01 = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };
    TabularPolicy pi(sp.size(), sp.actions.count());
    const int K = sp.actions.num_classes;
    for (std::size_t o = 0; o < sp.size(); ++o) {
        int limit = sp.masked(static_cast<int>(o)) ? K : sp.actions.count();
        double* r = pi.row(o);
        double z = 0.0;
        for (int a = 0; a < limit; ++a) {
            r[a] = -std::log(1.0 - uniform01());
            z += r[a];
        }
        for (int a = 0; a < limit; ++a) r[a] /= z;
    }
    return pi;
}

// Sample an action from a policy row.
template <typename Rng>
inline int sample_action(const TabularPolicy& pi, std::size_t o, Rng& rng) {
    double u = (rng() >> 11) * (1.0 / 9007199254740992.0);
    const double* r = pi.row(o);
    double acc = 0.0;
    for (int a = 0; a < pi.action_count; ++a) {
        acc += r[a];
        if (u < acc) return a;
    }
    for (int a = pi.action_count - 1; a >= 0; --a)
        if (r[a] > 0.0) return a;
    throw InternalError("policy row sums to zero");
}

// Checks the probability-table invariants: rows sum to 1, no negatives, masked
// actions exactly zero. Returns the largest row-sum deviation.
inline double validate_policy(const ObservationSpace& sp, const TabularPolicy& pi) {
    double worst = 0.0;
    const int K = sp.actions.num_classes;
    for (std::size_t o = 0; o < sp.size(); ++o) {
        const double* r = pi.row(o);
        double sum = 0.0;
        for (int a = 0; a < pi.action_count; ++a) {
            if (r[a] < 0.0) throw DomainError("negative action probability");
            if (sp.masked(static_cast<int>(o)) && a >= K && r[a] != 0.0)
                throw DomainError("masked action has nonzero probability");
            sum += r[a];
        }
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

} // namespace dtrl
