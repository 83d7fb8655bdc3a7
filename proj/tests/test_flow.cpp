#include <doctest.h>

#include "rankflow/flow.hpp"
#include "rankflow/integrator.hpp"
#include "rankflow/random.hpp"
#include "test_support.hpp"

using namespace rankflow;
using namespace rankflow::testsupport;

namespace {

DenseMatrix diag43(double a, double b, double c) {
    const double values[] = {a, b, c};
    return DenseMatrix::diagonal(values, 4, 3);
}

}  // namespace

TEST_CASE("objective fixed values") {
    const DenseMatrix a = diag_a_4x3();
    CHECK(objective(a, a) == 0.0);
    CHECK(objective(a, diag43(3, 2, 0)) == 0.5);

    Rng rng(301);
    const DenseMatrix x = standard_normal_matrix(rng, 4, 3);
    CHECK(close_rel(objective(DenseMatrix::zero(4, 3), x), 0.5 * frob_norm(x) * frob_norm(x),
                    1e-12));
}

TEST_CASE("gradient fixed values and finite differences") {
    const DenseMatrix a = diag_a_4x3();
    CHECK(frob_norm(gradient(a, a)) == 0.0);

    Rng rng(302);
    const DenseMatrix x = standard_normal_matrix(rng, 4, 3);
    CHECK(gradient(DenseMatrix::zero(4, 3), x) == x);

    // central differences of the objective, step 1e-5
    for (int trial = 0; trial < 5; ++trial) {
        const DenseMatrix a2 = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix x2 = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix g = gradient(a2, x2);
        const double h = 1e-5;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                DenseMatrix probe = x2;
                probe(i, j) += h;
                const double fp = objective(a2, probe);
                probe(i, j) -= 2 * h;
                const double fm = objective(a2, probe);
                CHECK(close((fp - fm) / (2 * h), g(i, j), 1e-6));
            }
        }
    }
}

TEST_CASE("vector_field fixed values") {
    const DenseMatrix a = diag_a_4x3();
    CHECK(frob_norm(vector_field(a, a)) == 0.0);
    CHECK(vector_field(a, diag43(1, 0, 0)) == diag43(4, 0, 0));
    // the top-2 truncation is an equilibrium, exactly in floating point
    CHECK(frob_norm(vector_field(a, diag43(3, 2, 0))) == 0.0);
}

TEST_CASE("vector_field equals the quasi-projected negative gradient") {
    Rng rng(303);
    for (int trial = 0; trial < 25; ++trial) {
        const DenseMatrix a = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix x = standard_normal_matrix(rng, 4, 3);
        CHECK(vector_field(a, x) == tangent_map(x, tangent_adjoint(x, a - x)));
        const DenseMatrix formula =
            (a - x) * x.transpose() * x + x * x.transpose() * (a - x);
        CHECK(matrices_close(vector_field(a, x), formula, 1e-12));
    }
}

TEST_CASE("lyapunov_rate identities") {
    const DenseMatrix a = diag_a_4x3();
    CHECK(lyapunov_rate(a, a) == 0.0);
    CHECK(lyapunov_rate(a, diag43(3, 2, 0)) == 0.0);

    Rng rng(304);
    for (int trial = 0; trial < 25; ++trial) {
        const DenseMatrix a2 = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix x = standard_normal_matrix(rng, 4, 3);
        const double rate = lyapunov_rate(a2, x);
        CHECK(rate <= 0.0);
        if (frob_norm(vector_field(a2, x)) > 1e-10) CHECK(rate < 0.0);
        CHECK(close_rel(rate, -inner(a2 - x, vector_field(a2, x)), 1e-12));
    }
}

TEST_CASE("flow direction decreases the objective") {
    Rng rng(305);
    for (int trial = 0; trial < 20; ++trial) {
        const DenseMatrix a = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix x = standard_normal_matrix(rng, 4, 3);
        const DenseMatrix f = vector_field(a, x);
        if (frob_norm(f) < 1e-9) continue;
        double h = 1e-2;
        bool decreased = false;
        for (int halvings = 0; halvings < 40; ++halvings) {
            if (objective(a, x + h * f) < objective(a, x)) {
                decreased = true;
                break;
            }
            h *= 0.5;
        }
        CHECK(decreased);
    }
}

TEST_CASE("chain rule: d/dt objective equals lyapunov_rate") {
    Rng rng(306);
    for (int trial = 0; trial < 10; ++trial) {
        const DenseMatrix a = standard_normal_matrix(rng, 4, 3);
        DenseMatrix x = standard_normal_matrix(rng, 4, 3);
        x *= 0.5;  // keep the cubic field tame
        const double delta = 1e-5;
        const double forward = objective(a, rk4_step(a, x, delta));
        const double backward = objective(a, rk4_step(a, x, -delta));
        const double fd_rate = (forward - backward) / (2.0 * delta);
        CHECK(close_rel(fd_rate, lyapunov_rate(a, x), 1e-6));
    }
}

TEST_CASE("factor fields fixed values and linearity") {
    const DenseMatrix a = diag_a_4x3();
    const DenseMatrix x = diag43(1, 0, 0);

    CHECK(frob_norm(factor_field_g(a, a, DenseMatrix::identity(4))) == 0.0);
    CHECK(frob_norm(factor_field_h(a, a, DenseMatrix::identity(3))) == 0.0);

    const double g_expected[] = {2.0, 0.0, 0.0, 0.0};
    CHECK(factor_field_g(a, x, DenseMatrix::identity(4)) ==
          DenseMatrix::diagonal(g_expected, 4, 4));
    const double h_expected[] = {-2.0, 0.0, 0.0};
    CHECK(factor_field_h(a, x, DenseMatrix::identity(3)) ==
          DenseMatrix::diagonal(h_expected, 3, 3));

    Rng rng(307);
    const DenseMatrix g = standard_normal_matrix(rng, 4, 4);
    const DenseMatrix h = standard_normal_matrix(rng, 3, 3);
    CHECK(matrices_close(factor_field_g(a, x, 2.0 * g), 2.0 * factor_field_g(a, x, g), 1e-13));
    CHECK(matrices_close(factor_field_h(a, x, 2.0 * h), 2.0 * factor_field_h(a, x, h), 1e-13));
}
