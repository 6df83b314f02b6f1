#pragma once

#include <random>

#include "dtrl/tree.hpp"

namespace dtrl {

// The 16-point benchmark: two features, two classes, a 2x2 checkerboard of
// cells split at 0.5 with XOR labels, 4 samples per cell. The XOR pattern
// makes every depth-1 tree worthless (accuracy 1/2) while a balanced depth-2
// tree classifies perfectly, so the optimum is strict.
struct ToyTask {
    Dataset dataset;
    DecisionTree truth_tree;
    std::uint64_t seed = 0;
};

// Deterministic in the seed. The seed picks the root feature, the label
// polarity and the jitter. Jitter keeps each coordinate strictly inside its
// cell with margin 0.05, and is mirror-symmetric per feature (high-side
// coordinates are 1 minus low-side ones) so that per-feature min+max == 1 and
// min-max renormalization of an exported CSV maps the 0.5 cell boundary back
// onto 0.5 exactly.
inline ToyTask gen_toy(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    auto uniform01 = [&rng] { return (rng() >> 11) * (1.0 / 9007199254740992.0); };

    const int root_feature = static_cast<int>(rng() & 1);
    const int other_feature = 1 - root_feature;
    const int polarity = static_cast<int>(rng() & 1);
    auto cell_label = [&](int a, int b) { return (a ^ b ^ polarity) & 1; };

    // Low-side jitter: root-axis coordinate per (b, m), other-axis per (a, m).
    double root_low[2][4], other_low[2][4];
    for (int b = 0; b < 2; ++b)
        for (int m = 0; m < 4; ++m) root_low[b][m] = 0.05 + 0.4 * uniform01();
    for (int a = 0; a < 2; ++a)
        for (int m = 0; m < 4; ++m) other_low[a][m] = 0.05 + 0.4 * uniform01();

    ToyTask task;
    task.seed = seed;
    Dataset& ds = task.dataset;
    ds.n = 16;
    ds.d = 2;
    ds.feature_names = {"f0", "f1"};
    ds.class_names = {"c0", "c1"};
    ds.scaler = {{0.0, 1.0}, {0.0, 1.0}};
    ds.name = "toy_seed" + std::to_string(seed);
    ds.samples.resize(16 * 2);
    ds.labels.resize(16);

    std::size_t row = 0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int m = 0; m < 4; ++m, ++row) {
                double rc = a == 0 ? root_low[b][m] : 1.0 - root_low[b][m];
                double oc = b == 0 ? other_low[a][m] : 1.0 - other_low[a][m];
                ds.samples[row * 2 + root_feature] = rc;
                ds.samples[row * 2 + other_feature] = oc;
                ds.labels[row] = cell_label(a, b);
            }
        }
    }

    DecisionTree& t = task.truth_tree;
    t.class_names = ds.class_names;
    t.feature_names = ds.feature_names;
    t.dataset_name = ds.name;
    t.solver = "truth";
    t.p = 1;
    t.max_depth = 2;
    t.seed = seed;
    Rational half(1, 2);
    int ll = t.add_leaf(cell_label(0, 0));
    int lh = t.add_leaf(cell_label(0, 1));
    int low = t.add_split(other_feature, half, 0.5, ll, lh);
    int hl = t.add_leaf(cell_label(1, 0));
    int hh = t.add_leaf(cell_label(1, 1));
    int high = t.add_split(other_feature, half, 0.5, hl, hh);
    t.root = t.add_split(root_feature, half, 0.5, low, high);
    return task;
}

// Closed-form optimal return of the toy instances: the balanced depth-2 tree
// repeats (split, split, correct prediction) forever,
// J* = (zeta + gamma*zeta + gamma^2) / (1 - gamma^3).
inline double toy_optimal_return(double zeta, double gamma) {
    return (zeta + gamma * zeta + gamma * gamma) / (1.0 - gamma * gamma * gamma);
}

} // namespace dtrl
