#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>
#include <vector>

#include "dtrl/actions.hpp"
#include "dtrl/bounds.hpp"
#include "dtrl/dataset.hpp"

namespace dtrl {

// Parameters of a bounding MDP over a classification dataset. The dataset is
// borrowed and must outlive the instance.
struct IbmdpInstance {
    const Dataset* dataset = nullptr;
    int p = 1;          // thresholds at 1/(p+1) .. p/(p+1) of the current range
    double zeta = 0.5;  // reward per splitting action
    double gamma = 0.99;
    int max_igas = 3;   // consecutive splits allowed before a prediction is forced

    IbmdpInstance() = default;
    IbmdpInstance(const Dataset& ds, int p_, double zeta_, double gamma_, int max_igas_)
        : dataset(&ds), p(p_), zeta(zeta_), gamma(gamma_), max_igas(max_igas_) {
        if (p < 1) throw DomainError("p must be >= 1");
        if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must be in (0,1)");
        if (max_igas < 1) throw DomainError("max depth must be >= 1");
        if (zeta > 1.0) throw DomainError("zeta above the maximum base reward 1 is degenerate");
    }

    ActionSpace actions() const { return ActionSpace{dataset->class_count(), dataset->d, p}; }
};

// Full state: the hidden training sample plus the visible feature bounds.
struct FullState {
    std::uint32_t sample = 0;
    FeatureBounds bounds;
};

inline FullState initial_state(const IbmdpInstance& inst, std::uint32_t sample) {
    return FullState{sample, root_bounds(inst.dataset->d)};
}

// One splitting action: compare x_k to the in-range threshold, shrink the
// matching bound. Ties x_k == v' take the lower branch (the upper bound moves).
inline std::pair<FullState, double> apply_iga(const FullState& s, int feature, int numerator,
                                              const IbmdpInstance& inst) {
    if (igas_since_base(s.bounds, inst.p) >= inst.max_igas)
        throw DomainError("splitting action taken at the depth cap (masked)");
    Rational v = split_threshold(s.bounds, feature, numerator, inst.p);
    double x = inst.dataset->at(s.sample, feature);
    FullState next = s;
    if (compare_double_rational(x, v) > 0)
        next.bounds = refine_high(s.bounds, feature, v);
    else
        next.bounds = refine_low(s.bounds, feature, v);
    return {next, inst.zeta};
}

// One prediction: +-1 reward, then a fresh uniformly drawn sample at root bounds.
template <typename Rng>
inline std::pair<FullState, double> apply_predict(const FullState& s, int predicted_class,
                                                  const IbmdpInstance& inst, Rng& rng) {
    double reward = inst.dataset->labels[s.sample] == predicted_class ? 1.0 : -1.0;
    auto next_sample = static_cast<std::uint32_t>(rng() % inst.dataset->n);
    return {FullState{next_sample, root_bounds(inst.dataset->d)}, reward};
}

// All feature bounds reachable within the depth cap that contain at least one
// training sample, in breadth-first order (depth, then parent index, then
// action order, low child before high). Index 0 is the root. Also records the
// routed sample lists, per-class counts and the split successor table, which
// together are the structural half of the observation MDP.
struct ObservationSpace {
    const Dataset* dataset = nullptr;
    ActionSpace actions;
    int p = 1;
    int max_igas = 1;

    std::vector<FeatureBounds> bounds;
    std::vector<int> depth;
    std::vector<std::vector<std::uint32_t>> samples;      // ascending sample indices
    std::vector<std::vector<std::uint32_t>> class_counts; // per observation, K entries
    std::vector<std::int32_t> child_low;  // per (obs, split): successor or -1 if empty
    std::vector<std::int32_t> child_high;
    std::unordered_map<FeatureBounds, int> index;

    std::size_t size() const { return bounds.size(); }
    bool masked(int o) const { return depth[o] >= max_igas; }

    std::int32_t low_child(int o, int split) const { return child_low[o * actions.split_count() + split]; }
    std::int32_t high_child(int o, int split) const { return child_high[o * actions.split_count() + split]; }

    int find(const FeatureBounds& b) const {
        auto it = index.find(b);
        return it == index.end() ? -1 : it->second;
    }

    // Flattened full-state indexing: state = offset[o] + position of the sample
    // in samples[o]. Only states whose sample routes into the box exist.
    std::vector<std::size_t> state_offset;
    std::size_t total_states = 0;

    std::size_t state_of(int o, std::uint32_t position) const { return state_offset[o] + position; }

    // Position of sample i in samples[o] (lists are ascending).
    std::uint32_t position_of(int o, std::uint32_t i) const {
        const auto& v = samples[o];
        auto it = std::lower_bound(v.begin(), v.end(), i);
        if (it == v.end() || *it != i) throw InternalError("sample not routed into observation");
        return static_cast<std::uint32_t>(it - v.begin());
    }
};

inline ObservationSpace enumerate_observations(const Dataset& ds, int p, int max_igas) {
    ObservationSpace sp;
    sp.dataset = &ds;
    sp.p = p;
    sp.max_igas = max_igas;
    sp.actions = ActionSpace{ds.class_count(), ds.d, p};
    // Depth-from-bounds must be single valued for the masking to be a function
    // of the observation; that needs p+1 prime.
    (void)igas_since_base(root_bounds(ds.d), p);

    const int splits = sp.actions.split_count();
    std::vector<std::uint32_t> all(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) all[i] = static_cast<std::uint32_t>(i);

    sp.bounds.push_back(root_bounds(ds.d));
    sp.depth.push_back(0);
    sp.samples.push_back(std::move(all));
    sp.class_counts.push_back(ds.class_histogram(sp.samples[0]));
    sp.index.emplace(sp.bounds[0], 0);

    for (std::size_t o = 0; o < sp.bounds.size(); ++o) {
        if (sp.depth[o] >= max_igas) continue; // leaf layer: no split edges
        sp.child_low.resize((o + 1) * splits, -1);
        sp.child_high.resize((o + 1) * splits, -1);
        for (int s = 0; s < splits; ++s) {
            int feature = s / p;
            int numerator = s % p + 1;
            Rational v = split_threshold(sp.bounds[o], feature, numerator, p);
            std::vector<std::uint32_t> low, high;
            for (auto i : sp.samples[o]) {
                if (double_leq_rational(ds.at(i, feature), v))
                    low.push_back(i);
                else
                    high.push_back(i);
            }
            auto intern = [&](std::vector<std::uint32_t>&& part, const FeatureBounds& bb) -> std::int32_t {
                if (part.empty()) return -1;
                auto it = sp.index.find(bb);
                if (it != sp.index.end()) return it->second;
                int id = static_cast<int>(sp.bounds.size());
                sp.index.emplace(bb, id);
                sp.bounds.push_back(bb);
                sp.depth.push_back(sp.depth[o] + 1);
                sp.class_counts.push_back(ds.class_histogram(part));
                sp.samples.push_back(std::move(part));
                return id;
            };
            sp.child_low[o * splits + s] = intern(std::move(low), refine_low(sp.bounds[o], feature, v));
            sp.child_high[o * splits + s] = intern(std::move(high), refine_high(sp.bounds[o], feature, v));
        }
    }
    sp.child_low.resize(sp.bounds.size() * splits, -1);
    sp.child_high.resize(sp.bounds.size() * splits, -1);

    sp.state_offset.resize(sp.bounds.size());
    std::size_t off = 0;
    for (std::size_t o = 0; o < sp.bounds.size(); ++o) {
        sp.state_offset[o] = off;
        off += sp.samples[o].size();
    }
    sp.total_states = off;
    return sp;
}

inline ObservationSpace enumerate_observations(const IbmdpInstance& inst) {
    return enumerate_observations(*inst.dataset, inst.p, inst.max_igas);
}

// Step-by-step simulator used by the Monte-Carlo oracles and the rollout
// checks. Tracks the true number of splits since the last prediction so the
// depth recovered from bounds can be checked against it.
struct IbmdpSimulator {
    const IbmdpInstance* inst;
    FullState state;
    int splits_since_predict = 0;

    explicit IbmdpSimulator(const IbmdpInstance& instance) : inst(&instance) {}

    template <typename Rng>
    void reset(Rng& rng) {
        state = initial_state(*inst, static_cast<std::uint32_t>(rng() % inst->dataset->n));
        splits_since_predict = 0;
    }

    template <typename Rng>
    double step(int action, Rng& rng) {
        ActionSpace as = inst->actions();
        if (as.is_predict(action)) {
            auto [next, r] = apply_predict(state, as.predicted_class(action), *inst, rng);
            state = next;
            splits_since_predict = 0;
            return r;
        }
        auto [next, r] = apply_iga(state, as.split_feature(action), as.split_numerator(action), *inst);
        state = next;
        ++splits_since_predict;
        return r;
    }
};

} // namespace dtrl
