#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/numerics.hpp"

using namespace coalition_nash;

namespace {

// Independent fixed-point oracle: W = sum_{k>=0} (M^T)^k M^k, truncated.
DenseMatrix neumann_oracle(const DenseMatrix& m, int terms) {
    const int n = m.rows();
    DenseMatrix w(n, n, 0.0);
    DenseMatrix mk = DenseMatrix::identity(n);
    for (int k = 0; k < terms; ++k) {
        w = add(w, matmul(transpose(mk), mk));
        mk = matmul(mk, m);
    }
    return w;
}

// Random strictly-diagonally-dominant Schur matrix: every Gershgorin disc is
// inside the unit circle, so the spectral radius is below 1 by construction.
DenseMatrix random_dd_schur(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    std::uniform_real_distribution<double> budget(0.3, 0.95);
    DenseMatrix m(n, n, 0.0);
    for (int r = 0; r < n; ++r) {
        double row_budget = budget(rng);
        Vec raw(n);
        double raw_sum = 0.0;
        for (int c = 0; c < n; ++c) {
            raw[c] = entry(rng);
            raw_sum += std::fabs(raw[c]);
        }
        for (int c = 0; c < n; ++c) m.at(r, c) = raw[c] * row_budget / raw_sum;
    }
    return m;
}

DenseMatrix random_symmetric(std::mt19937& rng, int n, double scale) {
    std::uniform_real_distribution<double> entry(-scale, scale);
    DenseMatrix s(n, n, 0.0);
    for (int r = 0; r < n; ++r)
        for (int c = r; c < n; ++c) {
            const double v = entry(rng);
            s.at(r, c) = v;
            s.at(c, r) = v;
        }
    return s;
}

double power_iteration_norm(const DenseMatrix& m, int iters) {
    const DenseMatrix gram = matmul(transpose(m), m);
    Vec v(gram.rows(), 1.0);
    v[0] = 1.5;  // break symmetry
    for (int k = 0; k < iters; ++k) {
        Vec next = matvec(gram, v);
        const double n2 = norm2(next);
        if (n2 == 0.0) return 0.0;
        for (double& x : next) x /= n2;
        v = next;
    }
    const Vec gv = matvec(gram, v);
    return std::sqrt(dot(v, gv));
}

}  // namespace

TEST_CASE("discrete Lyapunov: scalar cases") {
    const LyapunovSolution zero = solve_discrete_lyapunov(DenseMatrix::from_rows({{0.0}}));
    CHECK(zero.W.at(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    const LyapunovSolution half = solve_discrete_lyapunov(DenseMatrix::from_rows({{0.5}}));
    CHECK(half.W.at(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(half.residual_norm < 1e-8);
}

TEST_CASE("discrete Lyapunov: 2x2 vs Neumann-series oracle") {
    const DenseMatrix m = DenseMatrix::from_rows({{0.5, 0.1}, {0.0, 0.4}});
    const LyapunovSolution sol = solve_discrete_lyapunov(m);
    const DenseMatrix oracle = neumann_oracle(m, 200);
    CHECK(max_abs_diff(sol.W, oracle) < 1e-10);
    CHECK(sol.residual_norm < 1e-8);
}

TEST_CASE("discrete Lyapunov: spectral radius >= 1 is rejected") {
    CHECK_THROWS_AS(solve_discrete_lyapunov(DenseMatrix::identity(2)), NotSchur);
    CHECK_THROWS_AS(solve_discrete_lyapunov(DenseMatrix::from_rows({{1.5}})), NotSchur);
}

TEST_CASE("discrete Lyapunov: residual + solution shape on random Schur matrices") {
    std::mt19937 rng(20240801);
    std::uniform_int_distribution<int> size(1, 20);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = size(rng);
        const DenseMatrix m = random_dd_schur(rng, n);
        const LyapunovSolution sol = solve_discrete_lyapunov(m);

        // Defining equation M^T W M - W + I = 0.
        const DenseMatrix residual = add(subtract(matmul(transpose(m), matmul(sol.W, m)), sol.W),
                                         DenseMatrix::identity(n));
        CHECK(max_abs(residual) < 1e-8);
        CHECK(sol.residual_norm < 1e-8);

        // Symmetric positive definite.
        CHECK(max_abs_diff(sol.W, transpose(sol.W)) < 1e-12);
        const std::vector<double> eigs = symmetric_eigenvalues(sol.W);
        CHECK(eigs.front() > 0.0);

        // Agreement with the independent series oracle.
        CHECK(max_abs_diff(sol.W, neumann_oracle(m, 400)) < 1e-8);
    }
}

TEST_CASE("discrete Lyapunov: elimination and series paths agree across the size switch") {
    // The solver switches representation at order 30; both paths must agree
    // on the same operator. Embed a 10x10 problem into block-diagonal copies.
    std::mt19937 rng(7);
    const DenseMatrix small = random_dd_schur(rng, 10);
    const LyapunovSolution direct = solve_discrete_lyapunov(small);

    const int copies = 4;  // 40x40: series path
    DenseMatrix big(10 * copies, 10 * copies, 0.0);
    for (int b = 0; b < copies; ++b)
        for (int r = 0; r < 10; ++r)
            for (int c = 0; c < 10; ++c) big.at(10 * b + r, 10 * b + c) = small.at(r, c);
    const LyapunovSolution series = solve_discrete_lyapunov(big);
    for (int b = 0; b < copies; ++b)
        for (int r = 0; r < 10; ++r)
            for (int c = 0; c < 10; ++c)
                CHECK(series.W.at(10 * b + r, 10 * b + c) ==
                      doctest::Approx(direct.W.at(r, c)).epsilon(1e-9));
}

TEST_CASE("symmetric eigenvalues: known spectra") {
    const DenseMatrix path3 =
        DenseMatrix::from_rows({{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}});
    const std::vector<double> eigs = symmetric_eigenvalues(path3);
    REQUIRE(eigs.size() == 3);
    CHECK(std::fabs(eigs[0]) < 1e-12);
    CHECK(eigs[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eigs[2] == doctest::Approx(3.0).epsilon(1e-12));

    // K2 Laplacian squared.
    const DenseMatrix k2sq = DenseMatrix::from_rows({{8, -8}, {-8, 8}});
    const std::vector<double> e2 = symmetric_eigenvalues(k2sq);
    CHECK(std::fabs(e2[0]) < 1e-12);
    CHECK(e2[1] == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("symmetric eigenvalues: 4-agent coalition Laplacian matches characteristic roots") {
    // Coalition 1 of the builtin network (edges 11-12, 11-14, 12-13). The
    // characteristic polynomial factors as lambda (lambda - 2) (lambda^2 - 4
    // lambda + 2), giving roots {0, 2 - sqrt 2, 2, 2 + sqrt 2}.
    const DenseMatrix l1 = DenseMatrix::from_rows(
        {{2, -1, 0, -1}, {-1, 2, -1, 0}, {0, -1, 1, 0}, {-1, 0, 0, 1}});
    const std::vector<double> eigs = symmetric_eigenvalues(l1);
    REQUIRE(eigs.size() == 4);
    const double r2 = std::sqrt(2.0);
    CHECK(std::fabs(eigs[0]) < 1e-9);
    CHECK(eigs[1] == doctest::Approx(2.0 - r2).epsilon(1e-9));
    CHECK(eigs[2] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(eigs[3] == doctest::Approx(2.0 + r2).epsilon(1e-9));

    // Cross-check each root against the characteristic polynomial via the
    // elimination determinant.
    for (const double lambda : eigs) {
        DenseMatrix shifted = l1;
        for (int i = 0; i < 4; ++i) shifted.at(i, i) -= lambda;
        CHECK(std::fabs(determinant(shifted)) < 1e-9);
    }
}

TEST_CASE("symmetric eigenvalues: non-symmetric input is rejected") {
    CHECK_THROWS_AS(symmetric_eigenvalues(DenseMatrix::from_rows({{0, 1}, {0, 0}})),
                    NotSymmetric);
    CHECK_THROWS_AS(symmetric_eigenvalues(DenseMatrix(2, 3, 0.0)), NotSymmetric);
}

TEST_CASE("symmetric eigenvalues: trace and determinant invariants") {
    std::mt19937 rng(20240802);
    std::uniform_int_distribution<int> size(1, 8);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = size(rng);
        const DenseMatrix s = random_symmetric(rng, n, 3.0);
        const std::vector<double> eigs = symmetric_eigenvalues(s);

        double trace = 0.0;
        for (int i = 0; i < n; ++i) trace += s.at(i, i);
        double eig_sum = 0.0, eig_prod = 1.0;
        for (double e : eigs) {
            eig_sum += e;
            eig_prod *= e;
        }
        CHECK(std::fabs(eig_sum - trace) < 1e-9 * std::max(1.0, frobenius_norm(s)));

        const double det = determinant(s);
        CHECK(eig_prod == doctest::Approx(det).epsilon(1e-6));
    }
}

TEST_CASE("lambda2 of the squared Laplacian") {
    const DenseMatrix k2 = DenseMatrix::from_rows({{1, -1}, {-1, 1}});
    CHECK(lambda2_of_square(k2) == doctest::Approx(4.0).epsilon(1e-12));

    const DenseMatrix path3 =
        DenseMatrix::from_rows({{1, -1, 0}, {-1, 2, -1}, {0, -1, 1}});
    CHECK(lambda2_of_square(path3) == doctest::Approx(1.0).epsilon(1e-12));

    // 5-agent coalition of the builtin network is the path 23-22-21-25-24,
    // so lambda_2 = 2 - 2 cos(pi/5) and the value here is its square.
    const DenseMatrix l2 = DenseMatrix::from_rows({{2, -1, 0, 0, -1},
                                                   {-1, 2, -1, 0, 0},
                                                   {0, -1, 1, 0, 0},
                                                   {0, 0, 0, 1, -1},
                                                   {-1, 0, 0, -1, 2}});
    const double lam2 = 2.0 - 2.0 * std::cos(M_PI / 5.0);
    CHECK(lambda2_of_square(l2) == doctest::Approx(lam2 * lam2).epsilon(1e-9));

    // Same value as squaring the eigensolver's second-smallest output.
    const std::vector<double> eigs = symmetric_eigenvalues(l2);
    CHECK(lambda2_of_square(l2) == doctest::Approx(eigs[1] * eigs[1]).epsilon(1e-12));
}

TEST_CASE("lambda2 of the squared Laplacian: disconnected input is rejected") {
    const DenseMatrix two_components = DenseMatrix::from_rows({{1, -1, 0, 0},
                                                               {-1, 1, 0, 0},
                                                               {0, 0, 1, -1},
                                                               {0, 0, -1, 1}});
    CHECK_THROWS_AS(lambda2_of_square(two_components), MultipleZeroEigenvalues);
    CHECK_THROWS_AS(lambda2_of_square(DenseMatrix(1, 1, 0.0)), MultipleZeroEigenvalues);
}

TEST_CASE("spectral norm: known values") {
    CHECK(spectral_norm(DenseMatrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spectral_norm(DenseMatrix::from_rows({{0, 2}, {0, 0}})) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spectral_norm(DenseMatrix::from_rows({{3, 0}, {0, -4}})) ==
          doctest::Approx(4.0).epsilon(1e-12));
    CHECK(spectral_norm(DenseMatrix(2, 2, 0.0)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("spectral norm: power-iteration oracle and transpose symmetry") {
    std::mt19937 rng(20240803);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix m(5, 5, 0.0);
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) m.at(r, c) = entry(rng);
        const double got = spectral_norm(m);
        CHECK(got == doctest::Approx(power_iteration_norm(m, 500)).epsilon(1e-8));
        CHECK(std::fabs(got - spectral_norm(transpose(m))) < 1e-10);
    }
}

TEST_CASE("linear solver: exact solve and singularity") {
    const DenseMatrix a = DenseMatrix::from_rows({{2, 1}, {1, 3}});
    const Vec x = solve_linear(a, {5, 10});
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));

    CHECK_THROWS_AS(solve_linear(DenseMatrix::from_rows({{1, 2}, {2, 4}}), {1, 2}),
                    SingularSystem);
}

TEST_CASE("determinant by elimination") {
    CHECK(determinant(DenseMatrix::identity(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(determinant(DenseMatrix::from_rows({{0, 1}, {1, 0}})) ==
          doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(determinant(DenseMatrix::from_rows({{2, 1}, {1, 3}})) ==
          doctest::Approx(5.0).epsilon(1e-12));
    CHECK(determinant(DenseMatrix::from_rows({{1, 2}, {2, 4}})) ==
          doctest::Approx(0.0).scale(1.0));
}
