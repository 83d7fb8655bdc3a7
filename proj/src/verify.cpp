#include "rankflow/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "rankflow/frobenius.hpp"
#include "rankflow/log.hpp"
#include "rankflow/random.hpp"

namespace rankflow {

namespace {

struct ProblemResult {
    std::vector<VerifyRun> runs;
    double certificate_residual_rel = 0.0;
    bool certificate_inconclusive = false;
};

bool is_stable_support(const std::vector<std::size_t>& support, std::size_t k) {
    if (support.size() != k) return false;
    for (std::size_t i = 0; i < k; ++i) {
        if (support[i] != i + 1) return false;
    }
    return true;
}

VerifyRun run_one(const VerifyOptions& opt, const DenseMatrix& a, const DenseMatrix& oracle,
                  const SingularSpectrum& spectrum, const DenseMatrix& x0, std::size_t problem,
                  std::size_t start, bool engineered) {
    VerifyRun run;
    run.problem = problem;
    run.start = start;
    run.engineered = engineered;
    const Trajectory traj = integrate(FlowProblem{a, opt.rank}, x0, opt.config);
    run.status = traj.status;
    run.steps = traj.accepted_steps;
    run.lyapunov_violations = count_lyapunov_violations(traj);
    const DenseMatrix& x_final = traj.final_sample().x;
    run.oracle_dist_rel = frob_norm(x_final - oracle) / std::max(frob_norm(a), 1e-300);
    run.objective_gap = objective(a, x_final) - objective(a, oracle);
    if (traj.status == FlowStatus::converged) {
        const auto matched =
            match_to_equilibrium(spectrum, x_final, 1e-4 * (1.0 + frob_norm(a)));
        if (matched.has_value()) run.matched_support = matched->support;
    }
    run.reached_stable = traj.status == FlowStatus::converged &&
                         run.oracle_dist_rel <= opt.oracle_tol &&
                         is_stable_support(run.matched_support, opt.rank);
    return run;
}

ProblemResult run_problem(const VerifyOptions& opt, std::size_t problem) {
    ProblemResult result;
    Rng rng(derive_seed(opt.seed, problem));
    const std::vector<double> sigma = spectrum_with_min_gaps(rng, std::min(opt.m, opt.n));
    const DenseMatrix a =
        generate_with_spectrum(opt.m, opt.n, sigma, derive_seed(opt.seed, problem * 2 + 1));
    const SingularSpectrum spectrum = svd(a);
    const DenseMatrix oracle = svd_truncate(a, opt.rank).matrix;

    for (std::size_t s = 0; s < opt.starts; ++s) {
        const DenseMatrix x0 = default_start(rng, a, opt.rank);
        result.runs.push_back(run_one(opt, a, oracle, spectrum, x0, problem, s, false));
    }

    if (opt.start_at_unstable) {
        // engineered start at the unstable equilibrium that swaps the last
        // kept direction for the first dropped one
        const std::size_t l = sigma.size();
        if (opt.rank < l) {
            std::vector<double> e(l, 0.0);
            for (std::size_t i = 0; i + 1 < opt.rank; ++i) e[i] = spectrum.sigma[i];
            e[opt.rank] = spectrum.sigma[opt.rank];
            const DenseMatrix x0 =
                spectrum.u * DenseMatrix::diagonal(e, opt.m, opt.n) * spectrum.v.transpose();
            result.runs.push_back(
                run_one(opt, a, oracle, spectrum, x0, problem, opt.starts, true));
        }
    }

    const DenseMatrix k0 = default_start(rng, a, opt.rank);
    const FactorCertificate cert =
        integrate_with_factors(FlowProblem{a, opt.rank}, k0, opt.config, opt.certificate_horizon);
    result.certificate_inconclusive = cert.inconclusive;
    if (!cert.inconclusive) {
        result.certificate_residual_rel = cert.residual / std::max(frob_norm(k0), 1e-300);
    }
    return result;
}

}  // namespace

std::size_t count_lyapunov_violations(const Trajectory& trajectory) {
    std::size_t count = 0;
    for (std::size_t i = 1; i < trajectory.samples.size(); ++i) {
        const double prev = trajectory.samples[i - 1].f;
        const double cur = trajectory.samples[i].f;
        if (cur > prev + 1e-12 * std::max(prev, 1e-300)) ++count;
    }
    return count;
}

VerifySummary run_verify(const VerifyOptions& options) {
    if (options.trials == 0) throw domain_error("run_verify: trials must be >= 1");
    if (options.starts == 0) throw domain_error("run_verify: starts must be >= 1");
    if (options.rank == 0 || options.rank > std::min(options.m, options.n)) {
        throw domain_error("run_verify: rank must satisfy 1 <= k <= min(m, n)");
    }

    VerifySummary summary;
    summary.options = options;
    std::vector<ProblemResult> results(options.trials);

    const unsigned jobs = std::max(1u, options.jobs);
    if (jobs == 1) {
        for (std::size_t p = 0; p < options.trials; ++p) results[p] = run_problem(options, p);
    } else {
        std::vector<std::thread> workers;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < jobs; ++w) {
            workers.emplace_back([&]() {
                while (true) {
                    const std::size_t p = next.fetch_add(1);
                    if (p >= options.trials) return;
                    results[p] = run_problem(options, p);
                }
            });
        }
        for (std::thread& worker : workers) worker.join();
    }

    for (const ProblemResult& pr : results) {
        for (const VerifyRun& run : pr.runs) {
            summary.runs.push_back(run);
            if (run.status == FlowStatus::converged) ++summary.converged;
            if (run.status == FlowStatus::rank_drift_detected) ++summary.rank_drift_events;
            if (run.status == FlowStatus::step_underflow) ++summary.step_underflows;
            summary.lyapunov_violations += run.lyapunov_violations;
            if (run.reached_stable) ++summary.reached_stable;
            summary.min_objective_gap = std::min(summary.min_objective_gap, run.objective_gap);
        }
        if (pr.certificate_inconclusive) {
            ++summary.certificate_inconclusive;
        } else {
            summary.max_certificate_residual_rel =
                std::max(summary.max_certificate_residual_rel, pr.certificate_residual_rel);
        }
    }
    summary.stable_fraction =
        summary.runs.empty() ? 0.0
                             : static_cast<double>(summary.reached_stable) /
                                   static_cast<double>(summary.runs.size());
    if (summary.lyapunov_violations > 0) {
        log_message(LogLevel::error, "run_verify: Lyapunov violations detected");
    }
    return summary;
}

}  // namespace rankflow
