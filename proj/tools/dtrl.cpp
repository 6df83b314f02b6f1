// dtrl: learn depth-capped decision trees for classification by exactly
// solving the bounding MDP over feature ranges, plus baselines, zeta sweeps
// and the numerical verification suite.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dtrl/sweep.hpp"
#include "dtrl/verify.hpp"

namespace fs = std::filesystem;
using namespace dtrl;

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_metrics(const std::string& path, const Dataset& ds, const std::string& algo, double zeta,
                   double gamma, int p, int max_depth, std::uint64_t seed, double J,
                   const TreeMetrics& tm, double wall_clock_s) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write metrics file: " + path);
    out << "dtrl-metrics v1\n";
    out << "dataset " << ds.name << "\n";
    out << "algo " << algo << "\n";
    out << "zeta " << format_double(zeta) << "\n";
    out << "gamma " << format_double(gamma) << "\n";
    out << "p " << p << "\n";
    out << "max_depth " << max_depth << "\n";
    out << "seed " << seed << "\n";
    out << "J " << format_double(J) << "\n";
    out << "accuracy " << format_double(tm.accuracy) << "\n";
    out << "decision_nodes " << tm.decision_nodes << "\n";
    out << "leaves " << tm.leaves << "\n";
    out << "depth " << tm.depth << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", wall_clock_s);
    out << "wall_clock_s " << buf << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void write_trace(const std::string& path, const TrainingTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trace file: " + path);
    out << "# dtrl-trace v1\n";
    out << "iteration,J\n";
    for (const auto& [it, j] : trace.points) out << it << "," << format_double(j) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw DomainError("cannot parse number '" + item + "' in list '" + csv + "'");
        }
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoull(item));
        } catch (const std::exception&) {
            throw DomainError("cannot parse seed '" + item + "' in list '" + csv + "'");
        }
    }
    return out;
}

void warn_if_degenerate_zeta(double zeta) {
    if (zeta >= 1.0)
        std::cerr << "warning: zeta >= R_max: degenerate without depth cap; the depth cap keeps the "
                     "model finite, proceeding\n";
}

int cmd_gen_toy(std::uint64_t seed, const std::string& out_dir) {
    fs::create_directories(out_dir);
    ToyTask task = gen_toy(seed);
    std::string csv = out_dir + "/toy_seed" + std::to_string(seed) + ".csv";
    std::string tree = out_dir + "/toy_seed" + std::to_string(seed) + "_truth.txt";
    save_csv(task.dataset, csv);
    save_tree(task.truth_tree, tree);
    TreeMetrics tm = evaluate_tree(task.truth_tree, task.dataset);
    std::cout << "toy task seed " << seed << ": 16 samples, 2 features, 2 classes\n";
    std::cout << "truth tree: " << tm.decision_nodes << " decision nodes, depth " << tm.depth
              << ", accuracy " << tm.accuracy << "\n";
    std::cout << "wrote " << csv << " and " << tree << "\n";
    return 0;
}

struct SolveArgs {
    std::string data, label_col, algo, out_dir;
    double zeta = 0.5, gamma = 0.99;
    int p = 1, max_depth = 0;
    std::uint64_t seed = 0;
    SolverConfig solver;
    std::size_t exact_pg_state_limit = 1000000;
};

int cmd_solve(const SolveArgs& a) {
    auto t0 = std::chrono::steady_clock::now();
    warn_if_degenerate_zeta(a.zeta);
    Dataset ds = normalize(load_csv(a.data, a.label_col));

    SolverConfig sc = a.solver;
    sc.seed = a.seed;

    SolvedPolicy sol;
    TrainingTrace trace;
    DecisionTree tree;
    if (a.algo == "exact-pg") {
        IbmdpInstance inst(ds, a.p, a.zeta, a.gamma, a.max_depth);
        ObservationSpace probe = enumerate_observations(inst);
        double cost = static_cast<double>(ds.n) * static_cast<double>(probe.size());
        if (cost > static_cast<double>(a.exact_pg_state_limit))
            throw DomainError("exact-pg requires the full state space: N*|observations| = " +
                              std::to_string(static_cast<std::size_t>(cost)) + " exceeds the limit " +
                              std::to_string(a.exact_pg_state_limit) +
                              " (raise --exact-pg-limit to override)");
        PolicyGradientResult res = exact_policy_gradient(inst, sc);
        sol = res.greedy;
        trace = res.trace;
        OibmdpModel model = build_model(inst);
        tree = extract_tree(model, sol.actions);
    } else {
        OibmdpModel model = build_model(ds, a.p, a.zeta, a.gamma, a.max_depth);
        if (a.algo == "policy-iteration")
            std::tie(sol, trace) = policy_iteration(model, sc);
        else if (a.algo == "value-iteration")
            std::tie(sol, trace) = value_iteration(model, sc);
        else if (a.algo == "q-learning")
            std::tie(sol, trace) = q_learning_dt(model, sc);
        else
            throw DomainError("unknown algorithm '" + a.algo + "'");
        tree = extract_tree(model, sol.actions);
    }
    tree.solver = a.algo;
    tree.seed = a.seed;

    fs::create_directories(a.out_dir);
    TreeMetrics tm = evaluate_tree(tree, ds);
    tm.J = sol.J;
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_tree(tree, a.out_dir + "/tree.txt");
    write_metrics(a.out_dir + "/metrics.txt", ds, a.algo, a.zeta, a.gamma, a.p, a.max_depth, a.seed,
                  sol.J, tm, wall);
    write_trace(a.out_dir + "/trace.csv", trace);

    std::cout << "dataset " << ds.name << ": n=" << ds.n << " d=" << ds.d << " classes=" << ds.class_count()
              << "\n";
    std::cout << "algo " << a.algo << " zeta " << a.zeta << " max_depth " << a.max_depth << "\n";
    std::cout << "J " << format_double(sol.J) << "\n";
    std::cout << "accuracy " << format_double(tm.accuracy) << " decision_nodes " << tm.decision_nodes
              << " depth " << tm.depth << "\n";
    pretty_print(tree, std::cout);
    std::cout << "wrote " << a.out_dir << "/tree.txt, metrics.txt, trace.csv\n";
    return 0;
}

struct SweepArgs {
    std::string data, label_col, algo = "policy-iteration";
    std::string zetas = "-1,-0.6,-0.2,0.2,0.6,1";
    std::string seeds = "0";
    double gamma = 0.99;
    int p = 1, max_depth = 0, threads = 0;
    std::string out_csv, out_svg, out_dir;
    SolverConfig solver;
};

int cmd_sweep(const SweepArgs& a) {
    Dataset ds = normalize(load_csv(a.data, a.label_col));
    SweepConfig cfg;
    cfg.algo = a.algo;
    cfg.zetas = parse_double_list(a.zetas);
    if (cfg.zetas.empty()) throw Error(ExitCode::usage, "empty zeta list: pass --zetas with at least one value");
    for (double z : cfg.zetas) warn_if_degenerate_zeta(z);
    cfg.seeds = parse_seed_list(a.seeds);
    cfg.p = a.p;
    cfg.gamma = a.gamma;
    cfg.max_depth = a.max_depth;
    cfg.solver = a.solver;
    cfg.threads = a.threads;
    cfg.out_dir = a.out_dir;
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

    std::vector<SweepRow> rows = run_sweep(ds, cfg);
    write_sweep_csv(rows, a.out_csv);
    write_pareto_csv(rows, a.out_csv + ".pareto.csv");
    if (!a.out_svg.empty())
        write_sweep_svg(rows, ds.name + " accuracy vs decision nodes (" + a.algo + ")", a.out_svg);

    std::cout << "sweep " << ds.name << " " << a.algo << ": " << rows.size() << " rows\n";
    for (const auto& r : rows) {
        std::printf("zeta %6g seed %llu  J %12.6f  accuracy %.4f  nodes %3d  depth %d%s\n", r.zeta,
                    static_cast<unsigned long long>(r.seed), r.J, r.accuracy, r.decision_nodes, r.depth,
                    r.pareto ? "  [pareto]" : "");
    }
    std::cout << "wrote " << a.out_csv << " and " << a.out_csv << ".pareto.csv\n";
    return 0;
}

int cmd_eval(const std::string& tree_path, const std::string& data, const std::string& label_col,
             bool with_return) {
    DecisionTree tree = load_tree(tree_path);
    Dataset ds = normalize(load_csv(data, label_col));
    TreeMetrics tm = evaluate_tree(tree, ds);
    std::cout << "dtrl-metrics v1\n";
    std::cout << "dataset " << ds.name << "\n";
    std::cout << "tree " << tree_path << "\n";
    std::cout << "accuracy " << format_double(tm.accuracy) << "\n";
    std::cout << "decision_nodes " << tm.decision_nodes << "\n";
    std::cout << "leaves " << tm.leaves << "\n";
    std::cout << "depth " << tm.depth << "\n";
    if (with_return) {
        if (tree.max_depth < 1) throw DomainError("tree file lacks max_depth metadata; cannot replay");
        OibmdpModel model = build_model(ds, tree.p, tree.zeta, tree.gamma, tree.max_depth);
        std::cout << "J " << format_double(tree_return(model, tree)) << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& check, std::uint64_t seed) {
    CheckReport rep;
    if (check == "theorem1")
        rep = check_return_equivalence(seed);
    else if (check == "prop1")
        rep = check_depth_recovery(seed);
    else if (check == "prop2")
        rep = check_gradient(seed);
    else if (check == "oracle")
        rep = check_exhaustive_optimum(seed);
    else
        throw DomainError("unknown check '" + check + "' (theorem1|prop1|prop2|oracle)");

    std::cout << rep.detail << "\n";
    std::cout << "tolerance " << rep.tolerance << ", max discrepancy " << rep.max_discrepancy << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << check << "\n";
    if (!rep.pass) {
        std::string replay_path = "verify_" + check + "_failure.txt";
        std::ofstream out(replay_path);
        out << "check " << check << "\nseed " << seed << "\n" << rep.replay << "\n";
        std::cerr << "offending case written to " << replay_path << "\n";
        return static_cast<int>(ExitCode::verification);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decision trees for classification via exact MDP solving over feature bounds"};
    app.require_subcommand(1);

    // gen-toy
    auto* gen = app.add_subcommand("gen-toy", "generate a 16-point XOR benchmark task");
    std::uint64_t gen_seed = 0;
    std::string gen_out = ".";
    gen->add_option("--seed", gen_seed, "task seed (required for reproducibility)")->required();
    gen->add_option("--out", gen_out, "output directory");

    // solve
    auto* solve = app.add_subcommand("solve", "solve one instance and extract the tree");
    SolveArgs sa;
    solve->add_option("--data", sa.data, "CSV file")->required();
    solve->add_option("--label-col", sa.label_col, "label column name")->required();
    solve->add_option("--algo", sa.algo, "policy-iteration|value-iteration|q-learning|exact-pg")
        ->required();
    solve->add_option("--zeta", sa.zeta, "reward per split")->required();
    solve->add_option("--gamma", sa.gamma, "discount factor");
    solve->add_option("--p", sa.p, "splitting parameter");
    solve->add_option("--max-depth", sa.max_depth, "depth cap (tree depth)")->required();
    solve->add_option("--seed", sa.seed, "rng seed (stochastic solvers)");
    solve->add_option("--out", sa.out_dir, "output directory")->required();
    solve->add_option("--q-steps", sa.solver.q_steps, "q-learning total steps");
    solve->add_option("--alpha", sa.solver.q_step_size, "q-learning step size");
    solve->add_option("--eps-start", sa.solver.epsilon_start, "q-learning initial exploration");
    solve->add_option("--eps-end", sa.solver.epsilon_end, "q-learning final exploration");
    solve->add_option("--lr", sa.solver.learning_rate, "policy-gradient learning rate");
    solve->add_option("--pg-iters", sa.solver.pg_max_iterations, "policy-gradient iteration cap");
    solve->add_option("--exact-pg-limit", sa.exact_pg_state_limit,
                      "max N*|observations| accepted by exact-pg");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a zeta sweep and report the trade-off");
    SweepArgs wa;
    sweep->add_option("--data", wa.data, "CSV file")->required();
    sweep->add_option("--label-col", wa.label_col, "label column name")->required();
    sweep->add_option("--algo", wa.algo, "policy-iteration|value-iteration|q-learning");
    sweep->add_option("--zetas", wa.zetas, "comma-separated zeta values");
    sweep->add_option("--seeds", wa.seeds, "comma-separated seeds (stochastic solvers)");
    sweep->add_option("--gamma", wa.gamma, "discount factor");
    sweep->add_option("--p", wa.p, "splitting parameter");
    sweep->add_option("--max-depth", wa.max_depth, "depth cap")->required();
    sweep->add_option("--threads", wa.threads, "worker pool size (default: DTRL_THREADS or cores)");
    sweep->add_option("--out-csv", wa.out_csv, "sweep CSV path")->required();
    sweep->add_option("--out-svg", wa.out_svg, "trade-off scatter SVG path");
    sweep->add_option("--out-dir", wa.out_dir, "directory for tree files");
    sweep->add_option("--q-steps", wa.solver.q_steps, "q-learning total steps");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a tree file against a dataset");
    std::string ev_tree, ev_data, ev_label;
    bool ev_return = false;
    eval->add_option("--tree", ev_tree, "tree file")->required();
    eval->add_option("--data", ev_data, "CSV file")->required();
    eval->add_option("--label-col", ev_label, "label column name")->required();
    eval->add_flag("--with-return", ev_return, "also replay the tree in its model and print J");

    // verify
    auto* verify = app.add_subcommand("verify", "run a numerical verification suite");
    std::string vf_check;
    std::uint64_t vf_seed = 0;
    verify->add_option("--check", vf_check, "theorem1|prop1|prop2|oracle")->required();
    verify->add_option("--seed", vf_seed, "rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return static_cast<int>(ExitCode::usage);
    }

    try {
        if (gen->parsed()) return cmd_gen_toy(gen_seed, gen_out);
        if (solve->parsed()) return cmd_solve(sa);
        if (sweep->parsed()) return cmd_sweep(wa);
        if (eval->parsed()) return cmd_eval(ev_tree, ev_data, ev_label, ev_return);
        if (verify->parsed()) return cmd_verify(vf_check, vf_seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::internal);
    }
    return 0;
}
