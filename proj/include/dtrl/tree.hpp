#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "dtrl/oibmdp.hpp"

namespace dtrl {

// A binary classification tree. Thresholds are kept twice: the exact rational
// in normalized units (for replaying the tree inside a model) and the
// denormalized real (for reading the tree against the original data).
struct DecisionTree {
    struct Node {
        bool leaf = true;
        int cls = 0;            // leaf: predicted class
        int feature = 0;        // split: feature index
        Rational threshold;     // split: normalized, exact
        double threshold_raw = 0.0; // split: in original feature units
        int low = -1;           // x_k <= threshold
        int high = -1;          // x_k >  threshold
    };

    std::vector<Node> nodes;
    int root = -1;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    // run metadata, written into tree files
    std::string dataset_name;
    std::string solver;
    double zeta = 0.0;
    double gamma = 0.0;
    int p = 1;
    int max_depth = 0;
    std::uint64_t seed = 0;

    int add_leaf(int cls) {
        Node n;
        n.leaf = true;
        n.cls = cls;
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    int add_split(int feature, Rational threshold, double threshold_raw, int low, int high) {
        Node n;
        n.leaf = false;
        n.feature = feature;
        n.threshold = threshold;
        n.threshold_raw = threshold_raw;
        n.low = low;
        n.high = high;
        nodes.push_back(n);
        return static_cast<int>(nodes.size()) - 1;
    }

    int decision_node_count() const {
        int c = 0;
        for (const auto& n : nodes) c += n.leaf ? 0 : 1;
        return c;
    }
    int leaf_count() const { return static_cast<int>(nodes.size()) - decision_node_count(); }

    int depth() const { return depth_below(root); }
    int depth_below(int id) const {
        const Node& n = nodes[id];
        if (n.leaf) return 0;
        return 1 + std::max(depth_below(n.low), depth_below(n.high));
    }

    // Routes one sample (normalized units); ties go low, matching the split
    // dynamics.
    int classify(const double* x) const {
        int id = root;
        while (!nodes[id].leaf) {
            const Node& n = nodes[id];
            id = double_leq_rational(x[n.feature], n.threshold) ? n.low : n.high;
        }
        return nodes[id].cls;
    }
};

struct TreeMetrics {
    double accuracy = 0.0;
    int decision_nodes = 0;
    int leaves = 0;
    int depth = 0;
    double J = 0.0; // return inside the model it was evaluated against
};

// Class indices are dataset-local (first occurrence order), so a tree can
// only be compared against a dataset through its class names. Identity when
// the tree carries no names.
inline std::vector<int> class_index_map(const DecisionTree& tree, const Dataset& ds) {
    std::vector<int> map;
    if (tree.class_names.empty()) {
        for (int h = 0; h < ds.class_count(); ++h) map.push_back(h);
        return map;
    }
    for (const auto& name : tree.class_names) {
        auto it = std::find(ds.class_names.begin(), ds.class_names.end(), name);
        if (it == ds.class_names.end())
            throw DomainError("tree predicts class '" + name + "' which dataset '" + ds.name +
                              "' does not have");
        map.push_back(static_cast<int>(it - ds.class_names.begin()));
    }
    return map;
}

// Accuracy by routing every sample; structural counts from the arena.
inline TreeMetrics evaluate_tree(const DecisionTree& tree, const Dataset& ds) {
    for (const auto& n : tree.nodes)
        if (!n.leaf && (n.feature < 0 || n.feature >= ds.d))
            throw DomainError("tree splits on feature " + std::to_string(n.feature) +
                              " but dataset has d=" + std::to_string(ds.d));
    std::vector<int> classes = class_index_map(tree, ds);
    TreeMetrics m;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.n; ++i)
        if (classes[tree.classify(&ds.samples[i * ds.d])] == ds.labels[i]) ++correct;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(ds.n);
    m.decision_nodes = tree.decision_node_count();
    m.leaves = tree.leaf_count();
    m.depth = tree.depth();
    return m;
}

// Reads a deterministic tree off a solved policy by walking the observation
// graph from the root. A split whose one side is empty (never observed in
// training) still needs both branches in the tree; the unseen side becomes a
// majority leaf of the parent box. A revisit of an observation along the
// current path would mean the policy loops on splitting actions; the walk
// fails loudly rather than unrolling forever.
inline DecisionTree extract_tree(const OibmdpModel& m, const std::vector<int>& policy_actions) {
    const ObservationSpace& sp = m.space;
    const Dataset& ds = *sp.dataset;
    DecisionTree tree;
    tree.class_names = ds.class_names;
    tree.feature_names = ds.feature_names;
    tree.dataset_name = ds.name;
    tree.zeta = m.zeta;
    tree.gamma = m.gamma;
    tree.p = sp.p;
    tree.max_depth = sp.max_igas;

    std::vector<char> on_path(sp.size(), 0);
    std::function<int(int)> walk = [&](int o) -> int {
        if (on_path[o])
            throw DomainError("policy repeats splitting actions: observation " + std::to_string(o) +
                              " revisited along its own path; tree extraction aborted");
        int a = policy_actions[o];
        if (sp.actions.is_predict(a)) return tree.add_leaf(sp.actions.predicted_class(a));
        if (sp.masked(o)) throw DomainError("policy selects a split at the depth cap");

        on_path[o] = 1;
        int split = a - sp.actions.num_classes;
        int feature = sp.actions.split_feature(a);
        Rational v = split_threshold(sp.bounds[o], feature, sp.actions.split_numerator(a), sp.p);
        std::int32_t lo = sp.low_child(o, split);
        std::int32_t hi = sp.high_child(o, split);
        int low_id = lo >= 0 ? walk(lo) : tree.add_leaf(majority_class(sp.class_counts[o]));
        int high_id = hi >= 0 ? walk(hi) : tree.add_leaf(majority_class(sp.class_counts[o]));
        on_path[o] = 0;
        return tree.add_split(feature, v, ds.denormalize(feature, v.to_double()), low_id, high_id);
    };
    tree.root = walk(0);
    return tree;
}

// Inverse of extraction: route the tree's tests through the observation graph
// and emit a deterministic action per observation. Boxes the tree never
// reaches predict their majority class (they have zero occupancy under the
// resulting policy, so the return is unaffected). Thresholds must lie on the
// reachable grid.
inline std::vector<int> tree_to_policy(const OibmdpModel& m, const DecisionTree& tree) {
    const ObservationSpace& sp = m.space;
    std::vector<int> classes = class_index_map(tree, *sp.dataset);
    std::vector<int> actions(sp.size());
    for (std::size_t o = 0; o < sp.size(); ++o)
        actions[o] = sp.actions.predict_action(majority_class(sp.class_counts[o]));

    std::function<void(int, int)> walk = [&](int o, int node_id) {
        const DecisionTree::Node& n = tree.nodes[node_id];
        if (n.leaf) {
            actions[o] = sp.actions.predict_action(classes[n.cls]);
            return;
        }
        if (sp.masked(o))
            throw DomainError("tree deeper than the model depth cap at observation " + std::to_string(o));
        int numerator = -1;
        for (int u = 1; u <= sp.p; ++u)
            if (split_threshold(sp.bounds[o], n.feature, u, sp.p) == n.threshold) numerator = u;
        if (numerator < 0)
            throw DomainError("tree threshold " + n.threshold.str() + " on feature " +
                              std::to_string(n.feature) + " is not on the reachable grid of " +
                              sp.bounds[o].str());
        int a = sp.actions.split_action(n.feature, numerator);
        actions[o] = a;
        int split = a - sp.actions.num_classes;
        if (sp.low_child(o, split) >= 0) walk(sp.low_child(o, split), n.low);
        if (sp.high_child(o, split) >= 0) walk(sp.high_child(o, split), n.high);
    };
    walk(0, tree.root);
    return actions;
}

// Return of a tree when replayed as a reactive policy inside a model.
inline double tree_return(const OibmdpModel& m, const DecisionTree& tree) {
    return policy_return(m, one_hot_policy(m.space, tree_to_policy(m, tree))).J;
}

// Greedy top-down induction with Gini impurity; candidate thresholds are
// midpoints between consecutive distinct sorted values. When no candidate has
// positive gain but the node is impure and depth remains, the best tie-broken
// candidate is taken anyway (plain greedy stopping cannot split XOR-style
// data at all). Leaves predict the majority class, ties to the lowest index.
inline DecisionTree greedy_cart(const Dataset& ds, int max_depth) {
    if (max_depth < 1) throw DomainError("max_depth must be >= 1");
    DecisionTree tree;
    tree.class_names = ds.class_names;
    tree.feature_names = ds.feature_names;
    tree.dataset_name = ds.name;
    tree.solver = "cart";
    tree.max_depth = max_depth;
    const int K = ds.class_count();

    auto gini = [&](const std::vector<std::size_t>& counts, std::size_t total) {
        if (total == 0) return 0.0;
        double g = 1.0;
        for (int h = 0; h < K; ++h) {
            double f = static_cast<double>(counts[h]) / static_cast<double>(total);
            g -= f * f;
        }
        return g;
    };

    std::function<int(std::vector<std::uint32_t>&, int)> grow = [&](std::vector<std::uint32_t>& idx,
                                                                    int depth) -> int {
        std::vector<std::size_t> counts(K, 0);
        for (auto i : idx) ++counts[ds.labels[i]];
        int majority = 0;
        for (int h = 1; h < K; ++h)
            if (counts[h] > counts[majority]) majority = h;
        bool pure = counts[majority] == idx.size();
        if (pure || depth >= max_depth) return tree.add_leaf(majority);

        const double total = static_cast<double>(idx.size());
        double parent_impurity = gini(counts, idx.size());
        double best_score = -1.0;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, int>> vals(idx.size());
        for (int k = 0; k < ds.d; ++k) {
            for (std::size_t j = 0; j < idx.size(); ++j)
                vals[j] = {ds.at(idx[j], k), ds.labels[idx[j]]};
            std::sort(vals.begin(), vals.end());
            std::vector<std::size_t> left(K, 0);
            std::size_t nl = 0;
            for (std::size_t j = 0; j + 1 < vals.size(); ++j) {
                ++left[vals[j].second];
                ++nl;
                if (vals[j].first == vals[j + 1].first) continue;
                double threshold = vals[j].first + 0.5 * (vals[j + 1].first - vals[j].first);
                std::vector<std::size_t> right(K, 0);
                for (int h = 0; h < K; ++h) right[h] = counts[h] - left[h];
                double w = (static_cast<double>(nl) * gini(left, nl) +
                            (total - static_cast<double>(nl)) * gini(right, idx.size() - nl)) /
                           total;
                double gain = parent_impurity - w;
                if (gain > best_score + 1e-15) {
                    best_score = gain;
                    best_feature = k;
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) return tree.add_leaf(majority); // no candidate thresholds at all

        std::vector<std::uint32_t> low, high;
        for (auto i : idx)
            if (ds.at(i, best_feature) <= best_threshold)
                low.push_back(i);
            else
                high.push_back(i);
        if (low.empty() || high.empty()) return tree.add_leaf(majority);
        idx.clear();
        idx.shrink_to_fit();
        int low_id = grow(low, depth + 1);
        int high_id = grow(high, depth + 1);
        // CART thresholds are data midpoints, not grid rationals; keep the exact
        // value as a rational of the double for consistent routing.
        Rational r = [&] {
            // decompose the double exactly: threshold = m * 2^e
            int exp = 0;
            double frac = std::frexp(best_threshold, &exp);
            auto mant = static_cast<std::int64_t>(std::ldexp(frac, 53));
            int e = exp - 53;
            Rational q(mant, 1);
            while (e < 0 && (q.num % 2 == 0)) { q.num /= 2; ++e; }
            while (e < 0) {
                if (q.den > (INT64_MAX >> 1))
                    throw DomainError("split threshold too fine for exact representation");
                q.den <<= 1;
                ++e;
            }
            while (e > 0) { q = q * Rational(2, 1); --e; }
            return q;
        }();
        return tree.add_split(best_feature, r, ds.denormalize(best_feature, best_threshold), low_id,
                              high_id);
    };

    std::vector<std::uint32_t> all(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i) all[i] = static_cast<std::uint32_t>(i);
    tree.root = grow(all, 0);
    return tree;
}

// ---------------------------------------------------------------------------
// Tree file format (version header + node list):
//
//   dtrl-tree v1
//   dataset <name>
//   solver <name>
//   params zeta <z> gamma <g> p <p> max_depth <m> seed <s>
//   features <d> <name...>
//   classes <K> <name...>
//   nodes <count> root <id>
//   node <id> leaf <class-index>
//   node <id> split <feature> <num>/<den> <raw-threshold> <low-id> <high-id>
//
// Rational thresholds round-trip exactly.
// ---------------------------------------------------------------------------

inline void serialize_tree(const DecisionTree& tree, std::ostream& out) {
    out << "dtrl-tree v1\n";
    out << "dataset " << (tree.dataset_name.empty() ? "-" : tree.dataset_name) << "\n";
    out << "solver " << (tree.solver.empty() ? "-" : tree.solver) << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", tree.zeta);
    out << "params zeta " << buf;
    std::snprintf(buf, sizeof buf, "%.17g", tree.gamma);
    out << " gamma " << buf << " p " << tree.p << " max_depth " << tree.max_depth << " seed "
        << tree.seed << "\n";
    out << "features " << tree.feature_names.size();
    for (const auto& f : tree.feature_names) out << " " << f;
    out << "\n";
    out << "classes " << tree.class_names.size();
    for (const auto& c : tree.class_names) out << " " << c;
    out << "\n";
    out << "nodes " << tree.nodes.size() << " root " << tree.root << "\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        if (n.leaf) {
            out << "node " << i << " leaf " << n.cls << "\n";
        } else {
            std::snprintf(buf, sizeof buf, "%.17g", n.threshold_raw);
            out << "node " << i << " split " << n.feature << " " << n.threshold.str() << " " << buf
                << " " << n.low << " " << n.high << "\n";
        }
    }
}

inline void save_tree(const DecisionTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tree file: " + path);
    serialize_tree(tree, out);
    if (!out) throw IoError("write failed: " + path);
}

namespace detail {
inline FormatError tree_parse_error(const std::string& where, std::size_t lineno, const std::string& msg) {
    return FormatError(where + ":" + std::to_string(lineno) + ": " + msg);
}
} // namespace detail

inline DecisionTree deserialize_tree(std::istream& in, const std::string& where = "<tree>") {
    DecisionTree tree;
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw detail::tree_parse_error(where, lineno, std::string("missing ") + what);
        ++lineno;
    };

    next_line("version header");
    if (line != "dtrl-tree v1") throw detail::tree_parse_error(where, lineno, "expected 'dtrl-tree v1'");

    std::string word;
    next_line("dataset line");
    { std::istringstream ls(line); ls >> word >> tree.dataset_name;
      if (word != "dataset") throw detail::tree_parse_error(where, lineno, "expected 'dataset'"); }
    next_line("solver line");
    { std::istringstream ls(line); ls >> word >> tree.solver;
      if (word != "solver") throw detail::tree_parse_error(where, lineno, "expected 'solver'"); }
    next_line("params line");
    { std::istringstream ls(line); std::string k1, k2, k3, k4, k5;
      ls >> word >> k1 >> tree.zeta >> k2 >> tree.gamma >> k3 >> tree.p >> k4 >> tree.max_depth >> k5 >> tree.seed;
      if (!ls || word != "params" || k1 != "zeta" || k2 != "gamma" || k3 != "p" || k4 != "max_depth" || k5 != "seed")
          throw detail::tree_parse_error(where, lineno, "malformed params line"); }
    next_line("features line");
    { std::istringstream ls(line); std::size_t d = 0; ls >> word >> d;
      if (!ls || word != "features") throw detail::tree_parse_error(where, lineno, "malformed features line");
      for (std::size_t k = 0; k < d; ++k) { std::string f; if (!(ls >> f)) throw detail::tree_parse_error(where, lineno, "feature name count mismatch"); tree.feature_names.push_back(f); } }
    next_line("classes line");
    { std::istringstream ls(line); std::size_t kk = 0; ls >> word >> kk;
      if (!ls || word != "classes") throw detail::tree_parse_error(where, lineno, "malformed classes line");
      for (std::size_t k = 0; k < kk; ++k) { std::string c; if (!(ls >> c)) throw detail::tree_parse_error(where, lineno, "class name count mismatch"); tree.class_names.push_back(c); } }

    next_line("nodes line");
    std::size_t count = 0;
    { std::istringstream ls(line); std::string rootw;
      ls >> word >> count >> rootw >> tree.root;
      if (!ls || word != "nodes" || rootw != "root") throw detail::tree_parse_error(where, lineno, "malformed nodes line");
      if (count == 0 || count > 10000000) throw detail::tree_parse_error(where, lineno, "implausible node count " + std::to_string(count)); }
    tree.nodes.resize(count);

    std::vector<char> seen(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
        next_line("node line");
        std::istringstream ls(line);
        std::size_t id = 0;
        std::string kind;
        ls >> word >> id >> kind;
        if (!ls || word != "node" || id >= count)
            throw detail::tree_parse_error(where, lineno, "malformed node line");
        if (seen[id]) throw detail::tree_parse_error(where, lineno, "duplicate node id " + std::to_string(id));
        seen[id] = 1;
        DecisionTree::Node n;
        if (kind == "leaf") {
            n.leaf = true;
            ls >> n.cls;
            if (!ls || n.cls < 0 || n.cls >= static_cast<int>(tree.class_names.size()))
                throw detail::tree_parse_error(where, lineno, "leaf class out of range");
        } else if (kind == "split") {
            n.leaf = false;
            std::string rat;
            ls >> n.feature >> rat >> n.threshold_raw >> n.low >> n.high;
            if (!ls) throw detail::tree_parse_error(where, lineno, "malformed split node");
            auto slash = rat.find('/');
            if (slash == std::string::npos) throw detail::tree_parse_error(where, lineno, "threshold must be num/den");
            try {
                n.threshold = Rational(std::stoll(rat.substr(0, slash)), std::stoll(rat.substr(slash + 1)));
            } catch (const std::exception&) {
                throw detail::tree_parse_error(where, lineno, "unparsable rational '" + rat + "'");
            }
            if (n.feature < 0 || (!tree.feature_names.empty() &&
                                  n.feature >= static_cast<int>(tree.feature_names.size())))
                throw detail::tree_parse_error(where, lineno, "split feature out of range");
        } else {
            throw detail::tree_parse_error(where, lineno, "unknown node kind '" + kind + "'");
        }
        tree.nodes[id] = n;
    }

    if (tree.root < 0 || tree.root >= static_cast<int>(count))
        throw FormatError(where + ": root id out of range");

    // structural validation: child ids in range, every node reachable at most
    // once, no cycles
    std::vector<int> visits(count, 0);
    std::function<void(int, int)> check = [&](int id, int guard) {
        if (guard > static_cast<int>(count))
            throw FormatError(where + ": cycle in node references");
        if (id < 0 || id >= static_cast<int>(count))
            throw FormatError(where + ": child id out of range");
        if (++visits[id] > 1) throw FormatError(where + ": node " + std::to_string(id) + " has two parents");
        const auto& n = tree.nodes[id];
        if (!n.leaf) {
            check(n.low, guard + 1);
            check(n.high, guard + 1);
        }
    };
    check(tree.root, 0);
    return tree;
}

inline DecisionTree load_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open tree file: " + path);
    return deserialize_tree(in, path);
}

// Human-readable if/else rendering with denormalized thresholds.
inline void pretty_print(const DecisionTree& tree, std::ostream& out) {
    std::function<void(int, int)> rec = [&](int id, int indent) {
        std::string pad(indent * 2, ' ');
        const auto& n = tree.nodes[id];
        if (n.leaf) {
            std::string name = n.cls < static_cast<int>(tree.class_names.size())
                                   ? tree.class_names[n.cls]
                                   : std::to_string(n.cls);
            out << pad << "predict " << name << "\n";
            return;
        }
        std::string fname = n.feature < static_cast<int>(tree.feature_names.size())
                                ? tree.feature_names[n.feature]
                                : "f" + std::to_string(n.feature);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%g", n.threshold_raw);
        out << pad << "if " << fname << " <= " << buf << ":\n";
        rec(n.low, indent + 1);
        out << pad << "else:\n";
        rec(n.high, indent + 1);
    };
    rec(tree.root, 0);
}

} // namespace dtrl
