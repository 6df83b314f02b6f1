#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include "dtrl/solvers.hpp"
#include "dtrl/svg.hpp"
#include "dtrl/tree.hpp"

namespace dtrl {

struct SweepRow {
    double zeta = 0.0;
    std::string solver;
    std::uint64_t seed = 0;
    double J = 0.0;
    double accuracy = 0.0;
    int decision_nodes = 0;
    int depth = 0;
    double wall_clock_s = 0.0;
    std::string tree_path;
    bool pareto = false;
    DecisionTree tree;
};

struct SweepConfig {
    std::string algo = "policy-iteration"; // policy-iteration | value-iteration | q-learning
    std::vector<double> zetas;
    std::vector<std::uint64_t> seeds = {0};
    int p = 1;
    double gamma = 0.99;
    int max_depth = 0;
    SolverConfig solver;
    std::string out_dir;  // tree files land here if non-empty
    int threads = 0;      // 0: DTRL_THREADS env var, else hardware concurrency
};

inline bool solver_is_exact(const std::string& algo) {
    return algo == "policy-iteration" || algo == "value-iteration";
}

inline int sweep_worker_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DTRL_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Flags the rows not weakly dominated in (accuracy up, decision nodes down).
inline void mark_pareto_front(std::vector<SweepRow>& rows) {
    for (auto& r : rows) {
        r.pareto = true;
        for (const auto& s : rows) {
            bool better_or_equal = s.accuracy >= r.accuracy && s.decision_nodes <= r.decision_nodes;
            bool strictly = s.accuracy > r.accuracy || s.decision_nodes < r.decision_nodes;
            if (better_or_equal && strictly) {
                r.pareto = false;
                break;
            }
        }
    }
}

// Runs the zeta sweep. The model structure is built once; zeta values run
// sequentially over it and the per-seed runs of stochastic solvers fan out to
// a worker pool. Exact solvers ignore seeds beyond labeling and emit one row
// per zeta.
inline std::vector<SweepRow> run_sweep(const Dataset& ds, const SweepConfig& cfg) {
    if (cfg.zetas.empty()) throw DomainError("sweep needs at least one zeta value");
    if (cfg.seeds.empty()) throw DomainError("sweep needs at least one seed");
    if (cfg.max_depth < 1) throw DomainError("sweep needs --max-depth >= 1");

    OibmdpModel model = build_model(ds, cfg.p, cfg.zetas[0], cfg.gamma, cfg.max_depth);
    const bool exact = solver_is_exact(cfg.algo);
    const std::vector<std::uint64_t> seeds = exact ? std::vector<std::uint64_t>{cfg.seeds[0]} : cfg.seeds;

    std::vector<SweepRow> rows(cfg.zetas.size() * seeds.size());
    for (std::size_t zi = 0; zi < cfg.zetas.size(); ++zi) {
        model.zeta = cfg.zetas[zi];
        std::atomic<std::size_t> cursor{0};
        std::mutex fail_mutex;
        std::string failure;
        auto work = [&] {
            for (;;) {
                std::size_t si = cursor.fetch_add(1);
                if (si >= seeds.size()) return;
                try {
                    SolverConfig sc = cfg.solver;
                    sc.seed = seeds[si];
                    SolvedPolicy sol;
                    TrainingTrace trace;
                    if (cfg.algo == "policy-iteration")
                        std::tie(sol, trace) = policy_iteration(model, sc);
                    else if (cfg.algo == "value-iteration")
                        std::tie(sol, trace) = value_iteration(model, sc);
                    else if (cfg.algo == "q-learning")
                        std::tie(sol, trace) = q_learning_dt(model, sc);
                    else
                        throw DomainError("unknown sweep algorithm '" + cfg.algo + "'");

                    SweepRow& row = rows[zi * seeds.size() + si];
                    row.zeta = model.zeta;
                    row.solver = cfg.algo;
                    row.seed = seeds[si];
                    row.J = sol.J;
                    row.tree = extract_tree(model, sol.actions);
                    row.tree.solver = cfg.algo;
                    row.tree.seed = seeds[si];
                    TreeMetrics tm = evaluate_tree(row.tree, ds);
                    row.accuracy = tm.accuracy;
                    row.decision_nodes = tm.decision_nodes;
                    row.depth = tm.depth;
                    row.wall_clock_s = trace.wall_clock_s;
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(fail_mutex);
                    if (failure.empty()) failure = e.what();
                    return;
                }
            }
        };
        int workers = std::min<int>(sweep_worker_count(cfg.threads), static_cast<int>(seeds.size()));
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(work);
            for (auto& t : pool) t.join();
        }
        if (!failure.empty()) throw InternalError("sweep run failed: " + failure);
    }

    if (!cfg.out_dir.empty()) {
        for (auto& row : rows) {
            char name[128];
            std::snprintf(name, sizeof name, "tree_%s_zeta%g_seed%llu.txt", cfg.algo.c_str(), row.zeta,
                          static_cast<unsigned long long>(row.seed));
            row.tree_path = cfg.out_dir + "/" + name;
            save_tree(row.tree, row.tree_path);
        }
    }
    mark_pareto_front(rows);
    return rows;
}

// Sweep CSV: a version comment line, then the fixed column header, then one
// row per (zeta, seed) run.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write sweep csv: " + path);
    out << "# dtrl-sweep v1\n";
    out << "zeta,solver,seed,J,accuracy,decision_nodes,depth,wall_clock_s,tree_path\n";
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.zeta);
        out << buf << "," << r.solver << "," << r.seed << ",";
        std::snprintf(buf, sizeof buf, "%.17g", r.J);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", r.accuracy);
        out << buf << "," << r.decision_nodes << "," << r.depth << ",";
        std::snprintf(buf, sizeof buf, "%.3f", r.wall_clock_s);
        out << buf << "," << r.tree_path << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

// The Pareto-front rows alone, same columns, written next to the main CSV.
inline void write_pareto_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::vector<SweepRow> front;
    for (const auto& r : rows)
        if (r.pareto) front.push_back(r);
    write_sweep_csv(front, path);
}

inline void write_sweep_svg(const std::vector<SweepRow>& rows, const std::string& title,
                            const std::string& path) {
    std::vector<ScatterPoint> pts;
    pts.reserve(rows.size());
    for (const auto& r : rows)
        pts.push_back({static_cast<double>(r.decision_nodes), r.accuracy, r.zeta, r.pareto});
    write_scatter_svg(pts, title, path);
}

} // namespace dtrl
