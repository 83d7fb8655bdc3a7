#include "rankflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankflow/frobenius.hpp"
#include "rankflow/log.hpp"

namespace rankflow {

namespace {

// Local-error acceptance threshold, relative to 1 + |X|. The normal
// directions of the rank manifold are only neutrally stable, so per-step
// error accumulates into sigma_{k+1} over a whole run; the accumulated drift
// must stay well below the 1e-8 rank monitor and small enough that
// f(X_final) cannot dip more than 1e-9 below the rank-k optimum (the drift
// buys roughly sigma_{k+1} * drift of objective). Measured drift scales like
// tol^(4/5); 1e-11 holds both bounds with an order of magnitude to spare.
constexpr double kLocalErrTol = 1e-11;

// The monotonicity guard accepts f_new <= f_old * (1 + slack). Strictly
// enforcing f_new <= f_old stalls once per-step decrements drop below one ulp
// of f; the slack stays an order below the 1e-12 relative increase that
// counts as a Lyapunov violation.
constexpr double kGuardSlack = 1e-13;

constexpr double kGrowthSafety = 0.9;

DenseMatrix rk4_from(const DenseMatrix& a, const DenseMatrix& x, const DenseMatrix& k1, double h) {
    const DenseMatrix k2 = vector_field(a, x + (h / 2.0) * k1);
    const DenseMatrix k3 = vector_field(a, x + (h / 2.0) * k2);
    const DenseMatrix k4 = vector_field(a, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double step_growth(double tol, double est) {
    const double factor = kGrowthSafety * std::pow(tol / std::max(est, 1e-300), 0.2);
    return std::clamp(factor, 0.5, 2.0);
}

void validate_config(const FlowConfig& config) {
    if (config.min_step <= 0.0 || config.max_step < config.min_step) {
        throw domain_error("integrate: need 0 < min_step <= max_step");
    }
    if (config.initial_step > 0.0 &&
        (config.initial_step < config.min_step || config.initial_step > config.max_step)) {
        throw domain_error("integrate: initial_step outside [min_step, max_step]");
    }
    if (config.grad_tol <= 0.0) throw domain_error("integrate: grad_tol <= 0");
    if (config.rank_tol <= 0.0) throw domain_error("integrate: rank_tol <= 0");
    if (config.max_steps == 0) throw domain_error("integrate: max_steps == 0");
    if (config.record_every == 0) throw domain_error("integrate: record_every == 0");
}

double default_initial_step(const FlowConfig& config, double norm_a) {
    if (config.initial_step > 0.0) return config.initial_step;
    const double h = 1e-2 / ((1.0 + norm_a) * (1.0 + norm_a));
    return std::clamp(h, config.min_step, config.max_step);
}

}  // namespace

std::string to_string(FlowStatus status) {
    switch (status) {
        case FlowStatus::converged: return "converged";
        case FlowStatus::max_steps_reached: return "max_steps_reached";
        case FlowStatus::step_underflow: return "step_underflow";
        case FlowStatus::rank_drift_detected: return "rank_drift_detected";
        case FlowStatus::horizon_reached: return "horizon_reached";
    }
    return "unknown";
}

DenseMatrix rk4_step(const DenseMatrix& a, const DenseMatrix& x, double h) {
    return rk4_from(a, x, vector_field(a, x), h);
}

Trajectory integrate(const FlowProblem& problem, const DenseMatrix& x0, const FlowConfig& config) {
    validate_config(config);
    const DenseMatrix& a = problem.target;
    if (problem.rank == 0 || problem.rank > std::min(a.rows(), a.cols())) {
        throw domain_error("integrate: rank must satisfy 1 <= k <= min(m, n)");
    }
    require_same_shape(a, x0, "integrate");
    const std::size_t rank0 = numerical_rank(x0, config.rank_tol);
    if (rank0 != problem.rank) {
        throw precondition_error("integrate: x0 has numerical rank " + std::to_string(rank0) +
                                 ", expected " + std::to_string(problem.rank));
    }

    const double norm_a = frob_norm(a);
    const double grad_stop = config.grad_tol * (1.0 + norm_a);
    double h = default_initial_step(config, norm_a);

    Trajectory traj;
    DenseMatrix x = x0;
    double t = 0.0;
    double f = objective(a, x);
    DenseMatrix field = vector_field(a, x);
    double grad_norm = frob_norm(field);
    traj.samples.push_back({t, x, f, grad_norm, rank0});

    while (true) {
        if (grad_norm <= grad_stop) {
            traj.status = FlowStatus::converged;
            break;
        }
        if (traj.accepted_steps >= config.max_steps) {
            traj.status = FlowStatus::max_steps_reached;
            break;
        }

        bool underflow = false;
        while (true) {
            if (h < config.min_step) {
                underflow = true;
                break;
            }
            const DenseMatrix full = rk4_from(a, x, field, h);
            const DenseMatrix half2 = rk4_step(a, rk4_from(a, x, field, h / 2.0), h / 2.0);
            const double est = frob_norm(full - half2);
            const double tol = kLocalErrTol * (1.0 + frob_norm(x));
            // negated comparisons so NaN/Inf estimates reject the step
            if (!(est <= tol)) {
                h *= 0.5;
                ++traj.rejected_steps;
                continue;
            }
            const double f_new = objective(a, half2);
            if (!(f_new <= f * (1.0 + kGuardSlack))) {
                h *= 0.5;
                ++traj.rejected_steps;
                continue;
            }
            x = half2;
            t += h;
            f = std::min(f_new, f);
            ++traj.accepted_steps;
            h = std::clamp(h * step_growth(tol, est), config.min_step, config.max_step);
            break;
        }
        if (underflow) {
            traj.status = FlowStatus::step_underflow;
            break;
        }

        if (config.retraction_period > 0 &&
            traj.accepted_steps % config.retraction_period == 0) {
            x = svd_truncate(x, problem.rank).matrix;
            f = objective(a, x);
        }

        field = vector_field(a, x);
        grad_norm = frob_norm(field);

        if (traj.accepted_steps % config.record_every == 0) {
            const std::size_t r = numerical_rank(x, config.rank_tol);
            traj.samples.push_back({t, x, f, grad_norm, r});
            if (r != problem.rank) {
                log_message(LogLevel::warn,
                            "integrate: numerical rank drifted to " + std::to_string(r) + " at t=" +
                                std::to_string(t));
                traj.status = FlowStatus::rank_drift_detected;
                return traj;
            }
            log_message(LogLevel::debug, "integrate: t=" + std::to_string(t) +
                                             " f=" + std::to_string(f) +
                                             " grad=" + std::to_string(grad_norm));
        }
    }

    if (traj.samples.back().t < t) {
        const std::size_t r = numerical_rank(x, config.rank_tol);
        traj.samples.push_back({t, x, f, grad_norm, r});
        if (r != problem.rank) traj.status = FlowStatus::rank_drift_detected;
    } else if (traj.status == FlowStatus::converged &&
               traj.samples.back().numerical_rank != problem.rank) {
        traj.status = FlowStatus::rank_drift_detected;
    }
    return traj;
}

namespace {

struct TripleState {
    DenseMatrix x;
    DenseMatrix g;
    DenseMatrix h;
};

TripleState triple_field(const DenseMatrix& a, const TripleState& s) {
    return {vector_field(a, s.x), factor_field_g(a, s.x, s.g), factor_field_h(a, s.x, s.h)};
}

TripleState triple_axpy(const TripleState& s, double c, const TripleState& d) {
    return {s.x + c * d.x, s.g + c * d.g, s.h + c * d.h};
}

TripleState triple_rk4(const DenseMatrix& a, const TripleState& s, double h) {
    const TripleState k1 = triple_field(a, s);
    const TripleState k2 = triple_field(a, triple_axpy(s, h / 2.0, k1));
    const TripleState k3 = triple_field(a, triple_axpy(s, h / 2.0, k2));
    const TripleState k4 = triple_field(a, triple_axpy(s, h, k3));
    TripleState out = s;
    out.x += (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    out.g += (h / 6.0) * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
    out.h += (h / 6.0) * (k1.h + 2.0 * k2.h + 2.0 * k3.h + k4.h);
    return out;
}

double triple_err(const TripleState& a, const TripleState& b) {
    return std::max({frob_norm(a.x - b.x), frob_norm(a.g - b.g), frob_norm(a.h - b.h)});
}

double triple_scale(const TripleState& s) {
    return std::max({frob_norm(s.x), frob_norm(s.g), frob_norm(s.h)});
}

}  // namespace

FactorCertificate integrate_with_factors(const FlowProblem& problem, const DenseMatrix& k0,
                                         const FlowConfig& config, double horizon) {
    validate_config(config);
    if (horizon <= 0.0) throw domain_error("integrate_with_factors: horizon <= 0");
    const DenseMatrix& a = problem.target;
    require_same_shape(a, k0, "integrate_with_factors");
    const std::size_t rank0 = numerical_rank(k0, config.rank_tol);
    if (rank0 != problem.rank) {
        throw precondition_error("integrate_with_factors: K has numerical rank " +
                                 std::to_string(rank0) + ", expected " +
                                 std::to_string(problem.rank));
    }

    const double norm_a = frob_norm(a);
    double h = std::min(default_initial_step(config, norm_a), horizon);

    FactorCertificate cert;
    Trajectory& traj = cert.trajectory;
    TripleState s{k0, DenseMatrix::identity(a.rows()), DenseMatrix::identity(a.cols())};
    double t = 0.0;
    double f = objective(a, s.x);
    traj.samples.push_back({t, s.x, f, frob_norm(vector_field(a, s.x)), rank0});
    traj.status = FlowStatus::horizon_reached;

    while (horizon - t > 1e-15 * horizon) {
        if (traj.accepted_steps >= config.max_steps) {
            traj.status = FlowStatus::max_steps_reached;
            break;
        }
        const double remaining = horizon - t;
        if (remaining <= config.min_step) {
            // final sliver: one plain step, error O(min_step) is negligible
            s = triple_rk4(a, s, remaining);
            t = horizon;
            ++traj.accepted_steps;
            break;
        }
        const double h_eff = std::min(h, remaining);
        const TripleState full = triple_rk4(a, s, h_eff);
        const TripleState half2 = triple_rk4(a, triple_rk4(a, s, h_eff / 2.0), h_eff / 2.0);
        const double est = triple_err(full, half2);
        const double tol = kLocalErrTol * (1.0 + triple_scale(s));
        const double f_new = objective(a, half2.x);
        if (!(est <= tol) || !(f_new <= f * (1.0 + kGuardSlack))) {
            h = h_eff * 0.5;
            ++traj.rejected_steps;
            if (h < config.min_step) {
                traj.status = FlowStatus::step_underflow;
                break;
            }
            continue;
        }
        s = half2;
        t += h_eff;
        f = std::min(f_new, f);
        ++traj.accepted_steps;
        h = std::clamp(h_eff * step_growth(tol, est), config.min_step, config.max_step);

        if (traj.accepted_steps % config.record_every == 0) {
            const std::size_t r = numerical_rank(s.x, config.rank_tol);
            traj.samples.push_back({t, s.x, f, frob_norm(vector_field(a, s.x)), r});
            if (r != problem.rank) {
                traj.status = FlowStatus::rank_drift_detected;
                break;
            }
        }
    }

    if (traj.samples.back().t < t) {
        traj.samples.push_back(
            {t, s.x, f, frob_norm(vector_field(a, s.x)), numerical_rank(s.x, config.rank_tol)});
    }

    cert.factors = FactorPair{s.g, s.h};
    const SingularSpectrum hs = svd(s.h);
    cert.h_condition = (hs.sigma.back() > 0.0)
                           ? hs.sigma.front() / hs.sigma.back()
                           : std::numeric_limits<double>::infinity();
    cert.inconclusive = !(cert.h_condition <= 1e12);
    if (cert.inconclusive) {
        log_message(LogLevel::warn, "integrate_with_factors: cond(H) estimate exceeds 1e12, "
                                    "certificate inconclusive");
        cert.residual = std::numeric_limits<double>::quiet_NaN();
        return cert;
    }
    // K H^{-1} via one LU solve: solve H^T R^T = K^T.
    const DenseMatrix k_hinv = lu_solve(s.h.transpose(), k0.transpose()).transpose();
    cert.residual = frob_norm(s.x - s.g * k_hinv);
    return cert;
}

}  // namespace rankflow
