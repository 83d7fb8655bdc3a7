#pragma once

#include <string>
#include <vector>

#include "rankflow/flow.hpp"
#include "rankflow/matrix.hpp"
#include "rankflow/svd.hpp"

namespace rankflow {

/// Step-size and stopping configuration for the flow integrator.
///
/// initial_step <= 0 selects the norm-scaled default 1e-2/(1 + |A|_F)^2; the
/// field is cubic in X, so a fixed default would overshoot on large inputs.
struct FlowConfig {
    double initial_step = 0.0;
    double min_step = 1e-12;
    double max_step = 1.0;
    /// Stop when |F(X)|_F <= grad_tol * (1 + |A|_F).
    double grad_tol = 1e-10;
    std::size_t max_steps = 200000;
    /// Relative threshold for the numerical-rank monitor.
    double rank_tol = 1e-8;
    /// Every this-many accepted steps, replace X by its rank-k truncation;
    /// 0 disables (the pure flow is what gets tested).
    std::size_t retraction_period = 0;
    /// Sampling cadence for the trajectory record, in accepted steps.
    std::size_t record_every = 10;
};

enum class FlowStatus {
    converged,
    max_steps_reached,
    step_underflow,
    rank_drift_detected,
    /// Fixed-horizon runs (the factor certificate) that complete normally.
    horizon_reached,
};

std::string to_string(FlowStatus status);

struct TrajectorySample {
    double t;
    DenseMatrix x;
    double f;
    double grad_norm;
    std::size_t numerical_rank;
};

/// Time-stamped record of a flow integration. Sample times are strictly
/// increasing and f is non-increasing up to the monotonicity guard's 1e-13
/// relative slack.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    FlowStatus status = FlowStatus::converged;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    const TrajectorySample& final_sample() const { return samples.back(); }
};

/// One classical fourth-order Runge-Kutta step of X' = F(X).
DenseMatrix rk4_step(const DenseMatrix& a, const DenseMatrix& x, double h);

/// Integrates X' = F(X) from x0 with step-doubling error control and a
/// Lyapunov monotonicity guard until the gradient criterion, a budget, or a
/// failure mode is hit. x0 must have numerical rank problem.rank.
Trajectory integrate(const FlowProblem& problem, const DenseMatrix& x0, const FlowConfig& config);

/// Result of the joint (X, G, H) integration certifying rank preservation
/// through the identity X(t) = G(t) K H(t)^{-1}.
struct FactorCertificate {
    Trajectory trajectory;
    FactorPair factors;
    /// |X(T) - G(T) K H(T)^{-1}|_F; exact arithmetic would give zero.
    double residual = 0.0;
    /// Set when cond(H) exceeds 1e12 and the residual is a numerical
    /// artifact rather than evidence.
    bool inconclusive = false;
    double h_condition = 0.0;
};

FactorCertificate integrate_with_factors(const FlowProblem& problem, const DenseMatrix& k0,
                                         const FlowConfig& config, double horizon);

}  // namespace rankflow
