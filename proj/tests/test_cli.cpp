#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "rankflow/equilibria.hpp"
#include "rankflow/io.hpp"
#include "rankflow/svd.hpp"
#include "test_support.hpp"

using namespace rankflow;
using namespace rankflow::testsupport;
using nlohmann::json;

namespace {

std::string cli_bin() {
    const char* env = std::getenv("RANKFLOW_CLI_BIN");
    REQUIRE_MESSAGE(env != nullptr, "RANKFLOW_CLI_BIN must point at the rankflow binary");
    return env;
}

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "rankflow_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const auto out_path = work_dir() / "stdout.txt";
    const std::string command = cli_bin() + " " + args + " > " + out_path.string() + " 2> " +
                                (work_dir() / "stderr.txt").string();
    const int raw = std::system(command.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    result.out = ss.str();
    return result;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generate writes the requested spectrum deterministically") {
    const auto out1 = work_dir() / "gen1.csv";
    const auto out2 = work_dir() / "gen2.csv";
    CHECK(run_cli("generate --m 4 --n 3 --sigma 3,2,1 --seed 9 --output " + out1.string())
              .exit_code == 0);
    CHECK(run_cli("generate --m 4 --n 3 --sigma 3,2,1 --seed 9 --output " + out2.string())
              .exit_code == 0);
    CHECK(slurp(out1) == slurp(out2));

    const SingularSpectrum s = svd(read_matrix_csv(out1));
    CHECK(close_rel(s.sigma[0], 3.0, 1e-10));
    CHECK(close_rel(s.sigma[1], 2.0, 1e-10));
    CHECK(close_rel(s.sigma[2], 1.0, 1e-10));

    CHECK(run_cli("generate --m 4 --n 3 --sigma 1,2,3 --seed 9 --output " +
                  (work_dir() / "bad.csv").string())
              .exit_code == 1);
}

TEST_CASE("approximate converges on the diagonal example and is deterministic") {
    const auto input = work_dir() / "a.csv";
    write_matrix_csv(input, diag_a_4x3());

    const auto output = work_dir() / "x.csv";
    const auto report1 = work_dir() / "report1.json";
    const auto report2 = work_dir() / "report2.json";
    const auto trajectory = work_dir() / "traj.csv";
    const std::string base = "approximate --input " + input.string() +
                             " --rank 2 --seed 5 --no-timestamp --output " + output.string() +
                             " --trajectory " + trajectory.string();

    CHECK(run_cli(base + " --report " + report1.string()).exit_code == 0);
    CHECK(run_cli(base + " --report " + report2.string()).exit_code == 0);
    CHECK(slurp(report1) == slurp(report2));

    const DenseMatrix x = read_matrix_csv(output);
    const double expected[] = {3.0, 2.0, 0.0};
    CHECK(frob_norm(x - DenseMatrix::diagonal(expected, 4, 3)) <= 1e-6);

    const json report = json::parse(slurp(report1));
    CHECK(report["schema_version"] == 1);
    CHECK(report["trajectory"]["status"] == "converged");
    CHECK(report["oracle"]["objective_gap"].get<double>() >= -1e-9);
    CHECK(report["equilibrium"]["verdict"] == "stable");
    CHECK_FALSE(report.contains("timestamp"));
    CHECK_FALSE(report.contains("wall_time_seconds"));

    std::ifstream traj_in(trajectory);
    std::string header;
    std::getline(traj_in, header);
    CHECK(header == "t,f,grad_norm,numerical_rank,dist_to_oracle");
}

TEST_CASE("approximate started at an unstable equilibrium exits 2 with a witness") {
    const auto input = work_dir() / "a_unstable.csv";
    write_matrix_csv(input, diag_a_4x3());

    // enumerated support {1,3} equilibrium, exactly representable
    const double e_values[] = {3.0, 0.0, 1.0};
    const auto init = work_dir() / "init_unstable.csv";
    write_matrix_csv(init, DenseMatrix::diagonal(e_values, 4, 3));

    const auto report_path = work_dir() / "report_unstable.json";
    const RunResult run = run_cli("approximate --input " + input.string() + " --rank 2 --init " +
                                  init.string() + " --no-timestamp --report " +
                                  report_path.string());
    CHECK(run.exit_code == 2);
    const json report = json::parse(slurp(report_path));
    CHECK(report["trajectory"]["status"] == "converged");
    CHECK(report["equilibrium"]["verdict"] == "unstable");
    CHECK(report["equilibrium"]["witness"]["p"] == 2);
    CHECK(report["equilibrium"]["witness"]["q"] == 3);
    CHECK(report["equilibrium"]["witness"]["eigenvalue"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("classify reports all equilibria with exactly one stable") {
    const auto input = work_dir() / "a_classify.csv";
    write_matrix_csv(input, diag_a_4x3());
    const RunResult run =
        run_cli("classify --input " + input.string() + " --rank 2");
    CHECK(run.exit_code == 0);
    const json report = json::parse(run.out);
    CHECK(report["count"] == 3);
    CHECK(report["stable_count"] == 1);
    REQUIRE(report["equilibria"].size() == 3);
    CHECK(report["equilibria"][0]["verdict"] == "stable");
    CHECK(report["equilibria"][0]["support"] == json::array({1, 2}));

    // repeated singular values are refused
    const double repeated[] = {2.0, 2.0, 1.0};
    const auto degenerate = work_dir() / "degenerate.csv";
    write_matrix_csv(degenerate, DenseMatrix::diagonal(repeated, 4, 3));
    CHECK(run_cli("classify --input " + degenerate.string() + " --rank 2").exit_code == 1);
}

TEST_CASE("verify runs a small deterministic batch") {
    const RunResult run1 = run_cli("verify --m 5 --n 4 --rank 2 --trials 2 --seed 3");
    CHECK(run1.exit_code == 0);
    const json report = json::parse(run1.out);
    CHECK(report["totals"]["lyapunov_violations"] == 0);
    CHECK(report["totals"]["stable_fraction"].get<double>() == 1.0);
    CHECK(report["totals"]["max_certificate_residual_rel"].get<double>() <= 1e-6);
    CHECK(report["totals"]["min_objective_gap"].get<double>() >= -1e-9);

    const RunResult run2 = run_cli("verify --m 5 --n 4 --rank 2 --trials 2 --seed 3");
    CHECK(run2.out == run1.out);

    const RunResult unstable =
        run_cli("verify --m 5 --n 4 --rank 2 --trials 2 --seed 3 --start-at-unstable");
    const json ureport = json::parse(unstable.out);
    CHECK(ureport["totals"]["stable_fraction"].get<double>() < 1.0);
    CHECK(ureport["totals"]["reached_stable"] < ureport["totals"]["runs"]);
    bool engineered_seen = false;
    for (const auto& r : ureport["runs"]) {
        if (r["engineered"].get<bool>()) {
            engineered_seen = true;
            CHECK_FALSE(r["reached_stable"].get<bool>());
        }
    }
    CHECK(engineered_seen);
}

TEST_CASE("approximate with k = min(m,n) on a full-rank target returns it in 0 steps") {
    const auto input = work_dir() / "fullrank.csv";
    write_matrix_csv(input, diag_a_4x3());
    const RunResult run = run_cli("approximate --input " + input.string() +
                                  " --rank 3 --no-timestamp --output " +
                                  (work_dir() / "fullrank_out.csv").string());
    CHECK(run.exit_code == 0);
    const json report = json::parse(run.out);
    CHECK(report["problem"]["target_rank_deficient"] == true);
    CHECK(report["trajectory"]["accepted_steps"] == 0);
    CHECK(frob_norm(read_matrix_csv(work_dir() / "fullrank_out.csv") - diag_a_4x3()) <= 1e-10);
}

TEST_CASE("approximate honors a config file") {
    const auto input = work_dir() / "cfg_a.csv";
    write_matrix_csv(input, diag_a_4x3());
    const auto config = work_dir() / "config.json";
    std::ofstream(config) << R"({"grad_tol": 1e-8, "record_every": 5, "max_steps": 50000})";
    const RunResult run = run_cli("approximate --input " + input.string() +
                                  " --rank 2 --seed 5 --no-timestamp --config " + config.string());
    CHECK(run.exit_code == 0);
    const json report = json::parse(run.out);
    CHECK(report["config"]["grad_tol"].get<double>() == 1e-8);
    CHECK(report["config"]["record_every"] == 5);
    CHECK(report["config"]["max_steps"] == 50000);
}

TEST_CASE("approximate flags a degenerate spectrum and still runs") {
    const double repeated[] = {2.0, 2.0, 1.0};
    const auto input = work_dir() / "repeated.csv";
    write_matrix_csv(input, DenseMatrix::diagonal(repeated, 4, 3));
    const RunResult run =
        run_cli("approximate --input " + input.string() + " --rank 2 --seed 5 --no-timestamp");
    // the optimum value is unique but the minimizer is not; the run must
    // finish and the objective gap must still be ~0
    CHECK((run.exit_code == 0 || run.exit_code == 2));
    const json report = json::parse(run.out);
    CHECK(report["problem"]["spectrum_distinct_positive"] == false);
    CHECK(report["trajectory"]["status"] == "converged");
    CHECK(report["oracle"]["objective_gap"].get<double>() <= 1e-6);
}

TEST_CASE("approximate can dump sampled states") {
    const auto input = work_dir() / "dump_a.csv";
    write_matrix_csv(input, diag_a_4x3());
    const std::string prefix = (work_dir() / "state_").string();
    const RunResult run = run_cli("approximate --input " + input.string() +
                                  " --rank 2 --seed 5 --no-timestamp --dump-states " + prefix);
    CHECK(run.exit_code == 0);
    CHECK(std::filesystem::exists(prefix + "000000.csv"));
    const json report = json::parse(run.out);
    const std::size_t samples = report["trajectory"]["samples"].get<std::size_t>();
    char last[16];
    std::snprintf(last, sizeof(last), "%06zu.csv", samples - 1);
    CHECK(std::filesystem::exists(prefix + last));
}

TEST_CASE("generate accepts an all-zero spectrum") {
    const auto out = work_dir() / "zero.csv";
    CHECK(run_cli("generate --m 3 --n 3 --sigma 0,0,0 --seed 1 --output " + out.string())
              .exit_code == 0);
    CHECK(frob_norm(read_matrix_csv(out)) == 0.0);
}

TEST_CASE("RANKFLOW_LOG=info surfaces diagnostics on stderr") {
    const auto out = work_dir() / "log_gen.csv";
    const auto err_path = work_dir() / "stderr.txt";
    const std::string command = "RANKFLOW_LOG=info " + cli_bin() +
                                " generate --m 3 --n 3 --sigma 3,2,1 --seed 1 --output " +
                                out.string() + " > /dev/null 2> " + err_path.string();
    REQUIRE(std::system(command.c_str()) == 0);
    CHECK(slurp(err_path).find("rankflow info") != std::string::npos);
}

TEST_CASE("bad inputs exit 1") {
    CHECK(run_cli("approximate --input /nonexistent.csv --rank 2").exit_code == 1);

    const auto input = work_dir() / "small.csv";
    write_matrix_csv(input, DenseMatrix::identity(2));
    CHECK(run_cli("approximate --input " + input.string() + " --rank 5").exit_code == 1);

    // init of the wrong rank violates the integrator precondition
    const auto a_path = work_dir() / "badinit_a.csv";
    write_matrix_csv(a_path, diag_a_4x3());
    const auto init = work_dir() / "badinit.csv";
    write_matrix_csv(init, diag_a_4x3());  // rank 3, not 2
    CHECK(run_cli("approximate --input " + a_path.string() + " --rank 2 --init " + init.string())
              .exit_code == 1);
}

TEST_CASE("classify with k = n yields the single stable equilibrium") {
    const auto input = work_dir() / "kn.csv";
    write_matrix_csv(input, diag_a_4x3());
    const RunResult run = run_cli("classify --input " + input.string() + " --rank 3");
    CHECK(run.exit_code == 0);
    const json report = json::parse(run.out);
    CHECK(report["count"] == 1);
    CHECK(report["equilibria"][0]["verdict"] == "stable");
}

TEST_CASE("approximate handles wide inputs") {
    const auto input = work_dir() / "wide.csv";
    const double sigma[] = {3.0, 2.0, 1.0};
    write_matrix_csv(input, generate_with_spectrum(3, 5, sigma, 13));
    const RunResult run =
        run_cli("approximate --input " + input.string() + " --rank 2 --seed 5 --no-timestamp");
    CHECK(run.exit_code == 0);
    const json report = json::parse(run.out);
    CHECK(report["equilibrium"]["verdict"] == "stable");
    CHECK(report["equilibrium"]["support"] == json::array({1, 2}));
}

TEST_CASE("verify results do not depend on the job count") {
    const RunResult serial = run_cli("verify --m 5 --n 4 --rank 2 --trials 3 --seed 8 --jobs 1");
    const RunResult parallel = run_cli("verify --m 5 --n 4 --rank 2 --trials 3 --seed 8 --jobs 3");
    REQUIRE(serial.exit_code == 0);
    REQUIRE(parallel.exit_code == 0);
    const json a = json::parse(serial.out);
    const json b = json::parse(parallel.out);
    CHECK(a["totals"] == b["totals"]);
    CHECK(a["runs"] == b["runs"]);
}
