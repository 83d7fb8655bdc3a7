#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rankflow/equilibria.hpp"
#include "rankflow/frobenius.hpp"
#include "rankflow/integrator.hpp"
#include "rankflow/io.hpp"
#include "rankflow/log.hpp"
#include "rankflow/random.hpp"
#include "rankflow/svd.hpp"
#include "rankflow/verify.hpp"

namespace {

using nlohmann::json;
using namespace rankflow;

constexpr int kSchemaVersion = 1;

void emit_report(const json& report, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << report.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path + " for writing");
    out << report.dump(2) << '\n';
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

FlowConfig load_config(const std::string& path) {
    FlowConfig config;
    if (path.empty()) return config;
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config " + path);
    json j = json::parse(in);
    config.initial_step = j.value("initial_step", config.initial_step);
    config.min_step = j.value("min_step", config.min_step);
    config.max_step = j.value("max_step", config.max_step);
    config.grad_tol = j.value("grad_tol", config.grad_tol);
    config.max_steps = j.value("max_steps", config.max_steps);
    config.rank_tol = j.value("rank_tol", config.rank_tol);
    config.retraction_period = j.value("retraction_period", config.retraction_period);
    config.record_every = j.value("record_every", config.record_every);
    return config;
}

json config_json(const FlowConfig& c) {
    return json{{"initial_step", c.initial_step},
                {"min_step", c.min_step},
                {"max_step", c.max_step},
                {"grad_tol", c.grad_tol},
                {"max_steps", c.max_steps},
                {"rank_tol", c.rank_tol},
                {"retraction_period", c.retraction_period},
                {"record_every", c.record_every}};
}

const char* eigen_kind_name(EigenvalueEntry::Kind kind) {
    switch (kind) {
        case EigenvalueEntry::Kind::diagonal: return "diagonal";
        case EigenvalueEntry::Kind::pair_sum: return "pair_sum";
        case EigenvalueEntry::Kind::pair_diff: return "pair_diff";
        case EigenvalueEntry::Kind::single: return "single";
    }
    return "?";
}

json equilibrium_json(const EquilibriumReport& report) {
    json eigenvalues = json::array();
    for (const EigenvalueEntry& ev : report.eigenvalues) {
        eigenvalues.push_back(
            {{"value", ev.value}, {"kind", eigen_kind_name(ev.kind)}, {"p", ev.p}, {"q", ev.q}});
    }
    json j{{"e", report.e},
           {"support", report.support},
           {"residual_equilibrium", report.residual_equilibrium},
           {"residual_quasi_commuting",
            {report.residual_quasi_commuting.first, report.residual_quasi_commuting.second}},
           {"eigenvalues", eigenvalues},
           {"verdict", to_string(report.verdict)}};
    if (report.witness.has_value()) {
        j["witness"] = {{"p", report.witness->p},
                        {"q", report.witness->q},
                        {"eigenvalue", report.witness->eigenvalue}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

struct ApproximateArgs {
    std::string input;
    std::size_t rank = 0;
    double tol = 1e-6;
    std::string config_path;
    std::string init_path;
    std::string trajectory_path;
    std::string output_path;
    std::string report_path = "-";
    std::string dump_states_prefix;
    std::uint64_t seed = 42;
    bool no_timestamp = false;
};

int cmd_approximate(const ApproximateArgs& args) {
    const auto t_start = std::chrono::steady_clock::now();
    const DenseMatrix a = read_matrix_csv(args.input);
    const std::size_t l = std::min(a.rows(), a.cols());
    if (args.rank == 0 || args.rank > l) {
        std::cerr << "rankflow: rank must satisfy 1 <= k <= min(m, n) = " << l << "\n";
        return 1;
    }
    const FlowConfig config = load_config(args.config_path);
    const SingularSpectrum spectrum = svd(a);
    const bool generic = has_distinct_positive_singular_values(a, kDistinctRelGap);
    if (!generic) {
        log_message(LogLevel::warn,
                    "approximate: spectrum is not distinct-positive; equilibrium matching and "
                    "uniqueness guarantees do not apply");
    }
    const bool target_deficient = numerical_rank(a, config.rank_tol) <= args.rank;
    if (target_deficient) {
        log_message(LogLevel::warn, "approximate: rank(A) <= k, the problem is degenerate and the "
                                    "optimum is A itself");
    }

    const Truncation oracle = svd_truncate(a, args.rank);
    DenseMatrix x0;
    if (!args.init_path.empty()) {
        x0 = read_matrix_csv(args.init_path);
    } else if (target_deficient) {
        x0 = oracle.matrix;
    } else {
        Rng rng(args.seed);
        x0 = default_start(rng, a, args.rank);
    }

    const Trajectory traj = integrate(FlowProblem{a, args.rank}, x0, config);
    const TrajectorySample& last = traj.final_sample();
    const double norm_a = frob_norm(a);
    const double dist = frob_norm(last.x - oracle.matrix);
    const double rel_dist = dist / std::max(norm_a, 1e-300);
    const double gap = objective(a, last.x) - objective(a, oracle.matrix);
    if (gap < -1e-9) {
        log_message(LogLevel::error, "approximate: objective gap " + std::to_string(gap) +
                                         " below the optimality floor; oracle or flow is broken");
    }

    std::optional<EquilibriumReport> matched;
    if (generic && traj.status == FlowStatus::converged) {
        matched = match_to_equilibrium(spectrum, last.x, 1e-4 * (1.0 + norm_a));
    }

    if (!args.output_path.empty()) write_matrix_csv(args.output_path, last.x);
    if (!args.trajectory_path.empty()) {
        write_trajectory_csv(args.trajectory_path, traj, oracle.matrix);
    }
    if (!args.dump_states_prefix.empty()) {
        for (std::size_t i = 0; i < traj.samples.size(); ++i) {
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "%06zu.csv", i);
            write_matrix_csv(args.dump_states_prefix + suffix, traj.samples[i].x);
        }
    }

    json report{{"schema_version", kSchemaVersion},
                {"command", "approximate"},
                {"problem",
                 {{"m", a.rows()},
                  {"n", a.cols()},
                  {"rank", args.rank},
                  {"sigma", spectrum.sigma},
                  {"spectrum_distinct_positive", generic},
                  {"target_rank_deficient", target_deficient}}},
                {"config", config_json(config)},
                {"seed", args.seed},
                {"tol", args.tol},
                {"trajectory",
                 {{"status", to_string(traj.status)},
                  {"accepted_steps", traj.accepted_steps},
                  {"rejected_steps", traj.rejected_steps},
                  {"samples", traj.samples.size()},
                  {"final_t", last.t},
                  {"final_f", last.f},
                  {"final_grad_norm", last.grad_norm},
                  {"final_numerical_rank", last.numerical_rank}}},
                {"oracle",
                 {{"distance", dist},
                  {"relative_distance", rel_dist},
                  {"objective_gap", gap}}}};
    report["equilibrium"] = matched.has_value() ? equilibrium_json(*matched) : json(nullptr);
    if (!args.no_timestamp) {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t_start;
        report["wall_time_seconds"] = elapsed.count();
        report["timestamp"] = utc_timestamp();
    }
    emit_report(report, args.report_path);

    if (traj.status != FlowStatus::converged) {
        std::cerr << "rankflow: integration ended with status " << to_string(traj.status) << "\n";
        return 1;
    }
    if (rel_dist <= args.tol) return 0;
    std::cerr << "rankflow: converged to a non-optimal equilibrium (relative oracle distance "
              << rel_dist << ")\n";
    return 2;
}

int cmd_classify(const std::string& input, std::size_t rank, const std::string& report_path) {
    const DenseMatrix a = read_matrix_csv(input);
    const SingularSpectrum spectrum = svd(a);
    std::vector<EquilibriumReport> reports;
    try {
        reports = enumerate_equilibria(spectrum, rank);
    } catch (const degeneracy_error& err) {
        std::cerr << "rankflow: " << err.what() << "\n";
        return 1;
    }
    std::size_t stable_count = 0;
    json list = json::array();
    for (const EquilibriumReport& r : reports) {
        if (r.verdict == Verdict::stable) ++stable_count;
        list.push_back(equilibrium_json(r));
    }
    json report{{"schema_version", kSchemaVersion},
                {"command", "classify"},
                {"problem",
                 {{"m", a.rows()},
                  {"n", a.cols()},
                  {"rank", rank},
                  {"sigma", spectrum.sigma}}},
                {"equilibria", list},
                {"count", reports.size()},
                {"stable_count", stable_count}};
    emit_report(report, report_path);
    if (stable_count != 1) {
        std::cerr << "rankflow: expected exactly one stable equilibrium, found " << stable_count
                  << "\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const VerifyOptions& options, const std::string& report_path) {
    const VerifySummary summary = run_verify(options);
    json runs = json::array();
    for (const VerifyRun& run : summary.runs) {
        runs.push_back({{"problem", run.problem},
                        {"start", run.start},
                        {"engineered", run.engineered},
                        {"status", to_string(run.status)},
                        {"reached_stable", run.reached_stable},
                        {"matched_support", run.matched_support},
                        {"oracle_dist_rel", run.oracle_dist_rel},
                        {"objective_gap", run.objective_gap},
                        {"lyapunov_violations", run.lyapunov_violations},
                        {"steps", run.steps}});
    }
    json report{{"schema_version", kSchemaVersion},
                {"command", "verify"},
                {"params",
                 {{"m", options.m},
                  {"n", options.n},
                  {"rank", options.rank},
                  {"trials", options.trials},
                  {"starts", options.starts},
                  {"seed", options.seed},
                  {"jobs", options.jobs},
                  {"start_at_unstable", options.start_at_unstable},
                  {"oracle_tol", options.oracle_tol},
                  {"certificate_horizon", options.certificate_horizon}}},
                {"totals",
                 {{"runs", summary.runs.size()},
                  {"converged", summary.converged},
                  {"reached_stable", summary.reached_stable},
                  {"stable_fraction", summary.stable_fraction},
                  {"lyapunov_violations", summary.lyapunov_violations},
                  {"rank_drift_events", summary.rank_drift_events},
                  {"step_underflows", summary.step_underflows},
                  {"min_objective_gap", summary.min_objective_gap},
                  {"max_certificate_residual_rel", summary.max_certificate_residual_rel},
                  {"certificate_inconclusive", summary.certificate_inconclusive}}},
                {"runs", runs}};
    emit_report(report, report_path);
    if (summary.lyapunov_violations > 0) return 3;
    return 0;
}

int cmd_generate(std::size_t m, std::size_t n, const std::string& sigma_spec, std::uint64_t seed,
                 const std::string& output) {
    std::vector<double> sigma;
    std::stringstream ss(sigma_spec);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            sigma.push_back(std::stod(cell));
        } catch (const std::exception&) {
            std::cerr << "rankflow: cannot parse sigma entry '" << cell << "'\n";
            return 1;
        }
    }
    const DenseMatrix a = generate_with_spectrum(m, n, sigma, seed);
    write_matrix_csv(output, a);
    log_message(LogLevel::info, "generate: wrote " + shape_string(a) + " matrix to " + output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rankflow: closest rank-k approximation by a rank-preserving gradient flow"};
    app.require_subcommand(1);

    ApproximateArgs approx;
    CLI::App* cmd_approx =
        app.add_subcommand("approximate", "Integrate the flow to the closest rank-k matrix");
    cmd_approx->add_option("--input", approx.input, "input matrix CSV")->required();
    cmd_approx->add_option("--rank", approx.rank, "target rank k")->required();
    cmd_approx->add_option("--tol", approx.tol,
                           "relative oracle distance for exit code 0 (default 1e-6)");
    cmd_approx->add_option("--config", approx.config_path, "integrator config JSON");
    cmd_approx->add_option("--init", approx.init_path, "initial state CSV (rank k)");
    cmd_approx->add_option("--trajectory", approx.trajectory_path, "trajectory CSV output");
    cmd_approx->add_option("--output", approx.output_path, "approximation matrix CSV output");
    cmd_approx->add_option("--report", approx.report_path, "report JSON output ('-' = stdout)");
    cmd_approx->add_option("--dump-states", approx.dump_states_prefix,
                           "write each sampled state to <prefix>NNNNNN.csv");
    cmd_approx->add_option("--seed", approx.seed, "seed for the default random start");
    cmd_approx->add_flag("--no-timestamp", approx.no_timestamp,
                         "omit timestamp and wall time from the report");

    std::string cls_input;
    std::size_t cls_rank = 0;
    std::string cls_report = "-";
    CLI::App* cmd_cls =
        app.add_subcommand("classify", "Enumerate and classify all rank-k equilibria");
    cmd_cls->add_option("--input", cls_input, "input matrix CSV")->required();
    cmd_cls->add_option("--rank", cls_rank, "target rank k")->required();
    cmd_cls->add_option("--report", cls_report, "report JSON output ('-' = stdout)");

    VerifyOptions vopt;
    std::string verify_report = "-";
    CLI::App* cmd_ver =
        app.add_subcommand("verify", "Statistical end-to-end checks on random problems");
    cmd_ver->add_option("--m", vopt.m, "problem rows (default 8)");
    cmd_ver->add_option("--n", vopt.n, "problem cols (default 5)");
    cmd_ver->add_option("--rank", vopt.rank, "target rank (default 2)");
    cmd_ver->add_option("--trials", vopt.trials, "number of random problems (default 50)");
    cmd_ver->add_option("--starts", vopt.starts, "random starts per problem (default 1)");
    cmd_ver->add_option("--seed", vopt.seed, "master seed (default 42)");
    cmd_ver->add_option("--jobs", vopt.jobs, "worker threads (default 1)");
    cmd_ver->add_flag("--start-at-unstable", vopt.start_at_unstable,
                      "also start each problem exactly at an unstable equilibrium");
    cmd_ver->add_option("--tol", vopt.oracle_tol, "relative oracle tolerance (default 1e-6)");
    cmd_ver->add_option("--horizon", vopt.certificate_horizon,
                        "factor-certificate horizon (default 0.5)");
    cmd_ver->add_option("--report", verify_report, "report JSON output ('-' = stdout)");

    std::size_t gen_m = 0;
    std::size_t gen_n = 0;
    std::string gen_sigma;
    std::uint64_t gen_seed = 42;
    std::string gen_output;
    CLI::App* cmd_gen =
        app.add_subcommand("generate", "Write a matrix with a prescribed spectrum");
    cmd_gen->add_option("--m", gen_m, "rows")->required();
    cmd_gen->add_option("--n", gen_n, "cols")->required();
    cmd_gen->add_option("--sigma", gen_sigma, "comma-separated singular values, descending")
        ->required();
    cmd_gen->add_option("--seed", gen_seed, "seed (default 42)");
    cmd_gen->add_option("--output", gen_output, "output matrix CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_approx->parsed()) return cmd_approximate(approx);
        if (cmd_cls->parsed()) return cmd_classify(cls_input, cls_rank, cls_report);
        if (cmd_ver->parsed()) return cmd_verify(vopt, verify_report);
        if (cmd_gen->parsed()) return cmd_generate(gen_m, gen_n, gen_sigma, gen_seed, gen_output);
    } catch (const std::exception& err) {
        std::cerr << "rankflow: " << err.what() << "\n";
        return 1;
    }
    return 1;
}
