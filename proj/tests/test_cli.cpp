#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace {

const std::string cli = DTRL_CLI_PATH;
const std::string data_dir = DTRL_TEST_DATA_DIR;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    std::string out_path = "/tmp/dtrl_cli_out_" + std::to_string(counter);
    std::string err_path = "/tmp/dtrl_cli_err_" + std::to_string(counter);
    ++counter;
    std::string cmd = cli + " " + args + " > " + out_path + " 2> " + err_path;
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto slurp = [](const std::string& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

std::string slurp_file(const std::string& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> parse_metrics(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::map<std::string, std::string> kv;
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "dtrl-metrics v1");
    while (std::getline(in, line)) {
        auto sp = line.find(' ');
        if (sp != std::string::npos) kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
    return kv;
}

} // namespace

TEST_CASE("gen-toy requires a seed and is byte-deterministic") {
    RunResult missing = run("gen-toy --out /tmp/dtrl_cli_toy");
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("--seed") != std::string::npos);

    fs::remove_all("/tmp/dtrl_cli_toy_a");
    fs::remove_all("/tmp/dtrl_cli_toy_b");
    RunResult a = run("gen-toy --seed 4 --out /tmp/dtrl_cli_toy_a");
    RunResult b = run("gen-toy --seed 4 --out /tmp/dtrl_cli_toy_b");
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp_file("/tmp/dtrl_cli_toy_a/toy_seed4.csv") ==
          slurp_file("/tmp/dtrl_cli_toy_b/toy_seed4.csv"));
    CHECK(slurp_file("/tmp/dtrl_cli_toy_a/toy_seed4_truth.txt") ==
          slurp_file("/tmp/dtrl_cli_toy_b/toy_seed4_truth.txt"));
}

TEST_CASE("solve runs the toy pipeline end to end") {
    fs::remove_all("/tmp/dtrl_cli_toy0");
    REQUIRE(run("gen-toy --seed 0 --out /tmp/dtrl_cli_toy0").exit_code == 0);
    RunResult r = run("solve --data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label "
                      "--algo policy-iteration --zeta 0.5 --gamma 0.99 --p 1 --max-depth 3 "
                      "--out /tmp/dtrl_cli_toy0/run");
    REQUIRE(r.exit_code == 0);
    auto kv = parse_metrics("/tmp/dtrl_cli_toy0/run/metrics.txt");
    CHECK(kv["accuracy"] == "1");
    CHECK(kv["decision_nodes"] == "3");
    double j = std::stod(kv["J"]);
    double expect = (0.5 + 0.99 * 0.5 + 0.99 * 0.99) / (1.0 - 0.99 * 0.99 * 0.99);
    CHECK(std::abs(j - expect) <= 1e-6);

    // tree and trace files exist and carry their version headers
    CHECK(slurp_file("/tmp/dtrl_cli_toy0/run/tree.txt").rfind("dtrl-tree v1", 0) == 0);
    CHECK(slurp_file("/tmp/dtrl_cli_toy0/run/trace.csv").rfind("# dtrl-trace v1", 0) == 0);

    // rerunning reproduces the tree file byte for byte
    RunResult r2 = run("solve --data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label "
                       "--algo policy-iteration --zeta 0.5 --gamma 0.99 --p 1 --max-depth 3 "
                       "--out /tmp/dtrl_cli_toy0/run2");
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp_file("/tmp/dtrl_cli_toy0/run/tree.txt") ==
          slurp_file("/tmp/dtrl_cli_toy0/run2/tree.txt"));
}

TEST_CASE("degenerate zeta warns and proceeds") {
    RunResult r = run("solve --data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label "
                      "--algo policy-iteration --zeta 1 --max-depth 2 --out /tmp/dtrl_cli_z1");
    REQUIRE(r.exit_code == 0);
    CHECK(r.err.find("degenerate") != std::string::npos);
}

TEST_CASE("exact-pg refuses oversized state spaces") {
    RunResult r = run("solve --data " + data_dir + "/banknote.csv --label-col class "
                      "--algo exact-pg --zeta 0.5 --max-depth 5 --out /tmp/dtrl_cli_pg");
    CHECK(r.exit_code == 5);
    CHECK(r.err.find("exceeds the limit") != std::string::npos);
}

TEST_CASE("missing data file maps to the io exit code") {
    RunResult r = run("solve --data /nope/missing.csv --label-col y --algo policy-iteration "
                      "--zeta 0.5 --max-depth 2 --out /tmp/dtrl_cli_io");
    CHECK(r.exit_code == 3);
}

TEST_CASE("sweep rejects an empty zeta list as usage error") {
    RunResult r = run("sweep --data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label "
                      "--zetas , --max-depth 3 --out-csv /tmp/dtrl_cli_sweep.csv");
    CHECK(r.exit_code == 2);
}

TEST_CASE("sweep writes csv, pareto csv and svg") {
    RunResult r = run("sweep --data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label "
                      "--zetas -1,0.2,0.5 --max-depth 3 --out-csv /tmp/dtrl_cli_sweep.csv "
                      "--out-svg /tmp/dtrl_cli_sweep.svg --out-dir /tmp/dtrl_cli_sweep_trees");
    REQUIRE(r.exit_code == 0);
    std::string csv = slurp_file("/tmp/dtrl_cli_sweep.csv");
    CHECK(csv.rfind("# dtrl-sweep v1", 0) == 0);
    CHECK(csv.find("zeta,solver,seed,J,accuracy,decision_nodes,depth,wall_clock_s,tree_path") !=
          std::string::npos);
    CHECK(slurp_file("/tmp/dtrl_cli_sweep.csv.pareto.csv").rfind("# dtrl-sweep v1", 0) == 0);
    CHECK(slurp_file("/tmp/dtrl_cli_sweep.svg").find("<svg") != std::string::npos);
    // tree files referenced by the csv exist
    CHECK(fs::exists("/tmp/dtrl_cli_sweep_trees/tree_policy-iteration_zeta0.5_seed0.txt"));
}

TEST_CASE("eval reports metrics for a stored tree") {
    RunResult r = run("eval --tree /tmp/dtrl_cli_toy0/run/tree.txt "
                      "--data /tmp/dtrl_cli_toy0/toy_seed0.csv --label-col label --with-return");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("accuracy 1") != std::string::npos);
    CHECK(r.out.find("decision_nodes 3") != std::string::npos);
    CHECK(r.out.find("J 66.4994") != std::string::npos);
}

TEST_CASE("verify subcommand exits zero on a passing check") {
    RunResult r = run("verify --check prop1 --seed 0");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("PASS prop1") != std::string::npos);
    CHECK(r.out.find("0 mismatches") != std::string::npos);
}

TEST_CASE("verify rejects unknown checks") {
    RunResult r = run("verify --check nonsense");
    CHECK(r.exit_code == 5);
}
