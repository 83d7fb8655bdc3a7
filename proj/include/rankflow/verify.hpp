#pragma once

#include <cstdint>
#include <vector>

#include "rankflow/equilibria.hpp"
#include "rankflow/integrator.hpp"

namespace rankflow {

/// End-to-end statistical check: random problems and random rank-k starts,
/// each integrated to convergence and matched against the equilibrium set.
struct VerifyOptions {
    std::size_t m = 8;
    std::size_t n = 5;
    std::size_t rank = 2;
    /// Number of independently generated problems.
    std::size_t trials = 50;
    /// Random starts per problem.
    std::size_t starts = 1;
    std::uint64_t seed = 42;
    unsigned jobs = 1;
    /// Additionally start each problem exactly at one unstable equilibrium.
    bool start_at_unstable = false;
    /// Relative Frobenius tolerance for "reached the truncated-SVD optimum".
    double oracle_tol = 1e-6;
    double certificate_horizon = 0.5;
    FlowConfig config{};
};

struct VerifyRun {
    std::size_t problem = 0;
    std::size_t start = 0;
    bool engineered = false;
    FlowStatus status = FlowStatus::converged;
    bool reached_stable = false;
    std::vector<std::size_t> matched_support;
    double oracle_dist_rel = 0.0;
    /// objective(A, X_final) - objective(A, truncated SVD); never below
    /// -1e-9 when the integrator holds the flow to rank k.
    double objective_gap = 0.0;
    std::size_t lyapunov_violations = 0;
    std::size_t steps = 0;
};

struct VerifySummary {
    VerifyOptions options;
    std::vector<VerifyRun> runs;
    std::size_t converged = 0;
    std::size_t reached_stable = 0;
    /// Fraction of all runs that converged to the stable equilibrium (the
    /// truncated-SVD optimum); engineered unstable starts drag it below 1.
    double stable_fraction = 0.0;
    std::size_t lyapunov_violations = 0;
    std::size_t rank_drift_events = 0;
    std::size_t step_underflows = 0;
    double min_objective_gap = 0.0;
    double max_certificate_residual_rel = 0.0;
    std::size_t certificate_inconclusive = 0;
};

/// Counts sample-to-sample objective increases beyond 1e-12 relative.
std::size_t count_lyapunov_violations(const Trajectory& trajectory);

VerifySummary run_verify(const VerifyOptions& options);

}  // namespace rankflow
