#pragma once

#include <string>

#include "dtrl/errors.hpp"

namespace dtrl {

// The K + d*p actions of a bounding MDP, in canonical order: predictions for
// classes 0..K-1 first, then splits ordered by (feature, numerator). Solvers
// break ties by this order, which prefers predicting (smaller trees) and makes
// runs reproducible.
struct ActionSpace {
    int num_classes = 0;
    int dims = 0;
    int p = 1;

    int count() const { return num_classes + dims * p; }
    int split_count() const { return dims * p; }

    bool is_predict(int a) const { return a < num_classes; }
    int predicted_class(int a) const { return a; }

    int split_index(int a) const { return a - num_classes; }      // 0..d*p-1
    int split_feature(int a) const { return split_index(a) / p; } // 0..d-1
    int split_numerator(int a) const { return split_index(a) % p + 1; }

    int predict_action(int cls) const { return cls; }
    int split_action(int feature, int numerator) const {
        if (numerator < 1 || numerator > p) throw DomainError("split numerator out of 1..p");
        return num_classes + feature * p + (numerator - 1);
    }

    std::string name(int a) const {
        if (is_predict(a)) return "predict:" + std::to_string(a);
        return "split:f" + std::to_string(split_feature(a)) + ":" +
               std::to_string(split_numerator(a)) + "/" + std::to_string(p + 1);
    }
};

} // namespace dtrl
