#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/harness.hpp"
#include "coalition_nash/numerics.hpp"

using namespace coalition_nash;

namespace {

Game case_game(const std::string& name) { return make_game(builtin_scenario(name)); }

// Decoupled single-coalition game: path of `n` agents, f_j = (x_j - b_j)^2.
Game decoupled_game(const Vec& b, double total, const Vec& holdings) {
    const int n = static_cast<int>(b.size());
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (int j = 1; j < n; ++j) edges.push_back({{1, j}, {1, j + 1}});
    auto topo = std::make_shared<const NetworkTopology>(build_topology({n}, edges));
    std::vector<Objective> objectives;
    for (int j = 0; j < n; ++j) objectives.push_back(QuadraticObjective{1.0, b[j], Vec(n, 0.0)});
    return Game(topo, std::move(objectives), {total}, holdings);
}

Vec random_point(std::mt19937& rng, int n, double scale) {
    std::uniform_real_distribution<double> entry(-scale, scale);
    Vec x(n);
    for (double& v : x) v = entry(rng);
    return x;
}

// Full gradient of one agent's objective (all partials stacked).
Vec agent_gradient(const Game& game, int agent, const Vec& x) {
    const int n = game.topology().n_sum;
    Vec g(n);
    for (int t = 0; t < n; ++t) g[t] = game.agent_partial(agent, t, x);
    return g;
}

}  // namespace

TEST_CASE("game construction: validation and kind classification") {
    const Game g1 = case_game("case1");
    CHECK(g1.kind() == GameKind::Special);
    CHECK(g1.all_quadratic());
    const Game g2 = case_game("case2");
    CHECK(g2.kind() == GameKind::General);

    // Holdings must sum to the coalition resource, named on failure.
    Scenario broken = builtin_scenario("case1");
    broken.resources[1].holdings[0] += 0.5;
    try {
        make_game(broken);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("coalition 2") != std::string::npos);
    }
}

TEST_CASE("pseudo_gradient: decoupled, zero, and rejected inputs") {
    const Game g = decoupled_game({1, 2, 3}, 6.0, {2, 2, 2});
    const Vec at = {5, -1, 2};
    const Vec grad = pseudo_gradient(g, at);
    CHECK(grad[0] == doctest::Approx(2.0 * (5 - 1)).epsilon(1e-15));
    CHECK(grad[1] == doctest::Approx(2.0 * (-1 - 2)).epsilon(1e-15));
    CHECK(grad[2] == doctest::Approx(2.0 * (2 - 3)).epsilon(1e-15));

    // Zero game: q = 0, no coupling.
    auto topo = std::make_shared<const NetworkTopology>(
        build_topology({2}, {{{1, 1}, {1, 2}}}));
    std::vector<Objective> zeros = {QuadraticObjective{0.0, 0.0, {0, 0}},
                                    QuadraticObjective{0.0, 0.0, {0, 0}}};
    const Game zero_game(topo, std::move(zeros), {4.0}, {2.0, 2.0});
    CHECK(pseudo_gradient(zero_game, {17.0, -13.0}) == Vec{0.0, 0.0});
    CHECK(coalition_values(zero_game, {17.0, -13.0}) == Vec{0.0});

    const double inf = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(pseudo_gradient(zero_game, {1.0, inf}), Error);
}

TEST_CASE("pseudo_gradient: matches central finite differences on both case games") {
    std::mt19937 rng(20240807);
    const double h = 1e-5;  // objectives are quadratic, so only rounding matters
    for (const char* name : {"case1", "case2"}) {
        const Game game = case_game(name);
        const NetworkTopology& t = game.topology();
        Vec x = game.holdings();
        for (int rep = 0; rep < 3; ++rep) {
            const Vec grad = pseudo_gradient(game, x);
            for (int i = 0; i < t.n_coalitions; ++i) {
                for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) {
                    Vec hi = x, lo = x;
                    hi[a] += h;
                    lo[a] -= h;
                    double fhi = 0.0, flo = 0.0;
                    for (int m = t.offsets[i]; m < t.offsets[i + 1]; ++m) {
                        fhi += game.objective_value(m, hi);
                        flo += game.objective_value(m, lo);
                    }
                    CHECK(std::fabs(grad[a] - (fhi - flo) / (2 * h)) < 1e-5);
                }
            }
            x = random_point(rng, t.n_sum, 40.0);
        }
    }
}

TEST_CASE("agent_partial: worked example and trivial cases") {
    const Game g1 = case_game("case1");
    const Vec x0 = g1.holdings();  // x_11 = 25, x_31 = 20
    // f_11 = (x_11 - 20)^2 + 1/2 x_11 x_31, so d f_11 / d x_31 = x_11 / 2.
    const int a11 = g1.topology().flat({1, 1});
    const int a31 = g1.topology().flat({3, 1});
    CHECK(g1.agent_partial(a11, a31, x0) == doctest::Approx(12.5).epsilon(1e-15));
    // Uncoupled target: f_11 never references x_22.
    CHECK(g1.agent_partial(a11, g1.topology().flat({2, 2}), x0) == 0.0);

    // Own partial of a decoupled quadratic vanishes at its target value.
    const Game d = decoupled_game({7, 7}, 14.0, {7, 7});
    CHECK(d.agent_partial(0, 0, {7.0, 3.0}) == 0.0);
}

TEST_CASE("agent_partial: matches finite differences at 100 random points per case") {
    std::mt19937 rng(20240808);
    const double h = 1e-6;
    std::uniform_int_distribution<int> pick(0, 14);
    for (const char* name : {"case1", "case2"}) {
        const Game game = case_game(name);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_point(rng, 15, 30.0);
            const int agent = pick(rng), target = pick(rng);
            Vec hi = x, lo = x;
            hi[target] += h;
            lo[target] -= h;
            const double fd =
                (game.objective_value(agent, hi) - game.objective_value(agent, lo)) / (2 * h);
            CHECK(std::fabs(game.agent_partial(agent, target, x) - fd) < 1e-5);
        }
    }
}

TEST_CASE("compute_constants: closed forms and frozen case values") {
    const Game d = decoupled_game({1, 2, 3}, 6.0, {2, 2, 2});
    const GameConstants kd = compute_constants(d);
    for (double l : kd.l_ij) CHECK(l == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(kd.l_i[0] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(kd.mu == doctest::Approx(2.0).epsilon(1e-12));

    const GameConstants k1 = compute_constants(case_game("case1"));
    CHECK(k1.mu == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(k1.l_i[0] == doctest::Approx(8.792268602924661).epsilon(1e-9));
    CHECK(k1.l_i[1] == doctest::Approx(10.910302591674554).epsilon(1e-9));
    CHECK(k1.l_i[2] == doctest::Approx(13.028336580424451).epsilon(1e-9));

    const GameConstants k2 = compute_constants(case_game("case2"));
    CHECK(k2.mu == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(k2.l_i[0] == doctest::Approx(40.396078054371145).epsilon(1e-9));
    CHECK(k2.l_i[1] == doctest::Approx(50.49509756796394).epsilon(1e-9));
    CHECK(k2.l_i[2] == doctest::Approx(60.59411708155671).epsilon(1e-9));
}

TEST_CASE("compute_constants: mu agrees with a finite-difference Jacobian assembly") {
    for (const char* name : {"case1", "case2"}) {
        const Game game = case_game(name);
        const int n = game.topology().n_sum;
        const double h = 1e-5;
        const Vec base = game.holdings();
        DenseMatrix j(n, n);
        for (int col = 0; col < n; ++col) {
            Vec hi = base, lo = base;
            hi[col] += h;
            lo[col] -= h;
            const Vec ghi = pseudo_gradient(game, hi), glo = pseudo_gradient(game, lo);
            for (int row = 0; row < n; ++row) j.at(row, col) = (ghi[row] - glo[row]) / (2 * h);
        }
        const DenseMatrix sym = scale(add(j, transpose(j)), 0.5);
        const double mu_fd = symmetric_eigenvalues(sym).front();
        CHECK(compute_constants(game).mu == doctest::Approx(mu_fd).epsilon(1e-5));
    }
}

TEST_CASE("compute_constants: error paths") {
    // Zero game: mu = 0.
    auto topo = std::make_shared<const NetworkTopology>(build_topology({2}, {{{1, 1}, {1, 2}}}));
    std::vector<Objective> zeros = {QuadraticObjective{0.0, 0.0, {0, 0}},
                                    QuadraticObjective{0.0, 0.0, {0, 0}}};
    const Game zero_game(topo, std::move(zeros), {4.0}, {2.0, 2.0});
    CHECK_THROWS_AS(compute_constants(zero_game), NotStronglyMonotone);

    // Generic objectives without supplied constants.
    std::vector<Objective> generic;
    for (int j = 0; j < 2; ++j) {
        const double b = j + 1.0;
        GenericObjective o;
        o.value = [j, b](const Vec& x) { return (x[j] - b) * (x[j] - b); };
        o.partial = [j, b](int target, const Vec& x) {
            return target == j ? 2.0 * (x[j] - b) : 0.0;
        };
        generic.push_back(std::move(o));
    }
    const Game generic_game(topo, std::move(generic), {4.0}, {2.0, 2.0});
    CHECK_THROWS_AS(compute_constants(generic_game), UnsupportedObjective);
    CHECK_THROWS_AS(pseudo_jacobian(generic_game), UnsupportedObjective);

    // Same game with supplied constants returns them untouched.
    std::vector<Objective> generic2;
    for (int j = 0; j < 2; ++j) {
        const double b = j + 1.0;
        GenericObjective o;
        o.value = [j, b](const Vec& x) { return (x[j] - b) * (x[j] - b); };
        o.partial = [j, b](int target, const Vec& x) {
            return target == j ? 2.0 * (x[j] - b) : 0.0;
        };
        generic2.push_back(std::move(o));
    }
    const GameConstants supplied{{2.0, 2.0}, {4.0}, 2.0};
    const Game with_constants(topo, std::move(generic2), {4.0}, {2.0, 2.0}, supplied);
    const GameConstants got = compute_constants(with_constants);
    CHECK(got.mu == 2.0);
    CHECK(got.l_i == Vec{4.0});
}

TEST_CASE("solve_ne: reproduces the published equilibria") {
    const Vec ne1 = {14.12, 15.29, 28.63, 41.96, 47.44, 34.11, 20.78, 18.5,
                     29.17, 26.89, 14.73, 14.73, 14.73, 25.79, 23.12};
    const Vec ne2 = {9.08, 20.19, 29.27, 41.46, 48.78, 35.07, 23.96, 15.54,
                     26.65, 10.14, 21.25, 28.87, 28.87, 21.0, 9.89};
    const Vec f1 = {2554, 2746, 2326};
    const Vec f2 = {6598, 7295, 9347};

    const Game g1 = case_game("case1");
    const NEResult r1 = solve_ne(g1, 1e-9);
    CHECK(r1.passed);
    for (int i = 0; i < 15; ++i) CHECK(std::fabs(r1.x_star[i] - ne1[i]) < 0.01);
    const Vec v1 = coalition_values(g1, r1.x_star);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(v1[i] - f1[i]) < 2.0);

    const Game g2 = case_game("case2");
    const NEResult r2 = solve_ne(g2, 1e-9);
    CHECK(r2.passed);
    for (int i = 0; i < 15; ++i) CHECK(std::fabs(r2.x_star[i] - ne2[i]) < 0.01);
    const Vec v2 = coalition_values(g2, r2.x_star);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(v2[i] - f2[i]) < 2.0);

    // Self-consistency: the solutions satisfy the verifier at 1e-9 and stay
    // on the budget planes.
    for (const NEResult* r : {&r1, &r2}) {
        const NEResult check = verify_ne(r == &r1 ? g1 : g2, r->x_star, 1e-9);
        CHECK(check.passed);
        CHECK(check.kkt_residual < 1e-9);
        CHECK(check.constraint_residual < 1e-9);
    }
}

TEST_CASE("solve_ne: symmetric equal split and singular systems") {
    // Identical decoupled objectives, R = n b: optimum is the symmetric split.
    const Game sym = decoupled_game({5, 5, 5, 5}, 20.0, {8, 4, 4, 4});
    const NEResult r = solve_ne(sym, 1e-9);
    for (double v : r.x_star) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));

    // q = 0 with no coupling: stationarity rows vanish, system is singular.
    auto topo = std::make_shared<const NetworkTopology>(build_topology({2}, {{{1, 1}, {1, 2}}}));
    std::vector<Objective> zeros = {QuadraticObjective{0.0, 0.0, {0, 0}},
                                    QuadraticObjective{0.0, 0.0, {0, 0}}};
    const Game zero_game(topo, std::move(zeros), {4.0}, {2.0, 2.0});
    CHECK_THROWS_AS(solve_ne(zero_game, 1e-9), SingularKKT);
}

TEST_CASE("solve_ne: projected-gradient path for generic objectives") {
    auto make_generic = [](std::optional<GameConstants> constants) {
        auto topo =
            std::make_shared<const NetworkTopology>(build_topology({2}, {{{1, 1}, {1, 2}}}));
        std::vector<Objective> obj;
        for (int j = 0; j < 2; ++j) {
            const double b = j == 0 ? 1.0 : 3.0;
            GenericObjective o;
            o.value = [j, b](const Vec& x) { return (x[j] - b) * (x[j] - b); };
            o.partial = [j, b](int target, const Vec& x) {
                return target == j ? 2.0 * (x[j] - b) : 0.0;
            };
            obj.push_back(std::move(o));
        }
        return Game(topo, std::move(obj), {10.0}, {5.0, 5.0}, std::move(constants));
    };
    // minimize (x1-1)^2 + (x2-3)^2 subject to x1 + x2 = 10 -> (4, 6).
    const Game g = make_generic(GameConstants{{2.0, 2.0}, {4.0}, 2.0});
    const NEResult r = solve_ne(g, 1e-10);
    CHECK(std::fabs(r.x_star[0] - 4.0) < 1e-6);
    CHECK(std::fabs(r.x_star[1] - 6.0) < 1e-6);
    CHECK(r.constraint_residual < 1e-9);

    // tol = 0 can never be reached: the iteration cap reports NoConvergence.
    const Game g2 = make_generic(GameConstants{{2.0, 2.0}, {4.0}, 2.0});
    CHECK_THROWS_AS(solve_ne(g2, 0.0), NoConvergence);
}

TEST_CASE("verify_ne: rounded reference vectors and non-equilibria") {
    const Game g1 = case_game("case1");
    const Vec ne1 = {14.12, 15.29, 28.63, 41.96, 47.44, 34.11, 20.78, 18.5,
                     29.17, 26.89, 14.73, 14.73, 14.73, 25.79, 23.12};
    const NEResult rounded = verify_ne(g1, ne1, 0.2);
    CHECK(rounded.kkt_residual < 0.2);  // 2-decimal rounding radius

    const NEResult at_start = verify_ne(g1, g1.holdings(), 1e-9);
    CHECK_FALSE(at_start.passed);
    CHECK(at_start.kkt_residual > 1.0);
}

TEST_CASE("monotonicity and Lipschitz bounds hold at the computed constants") {
    std::mt19937 rng(20240809);
    for (const char* name : {"case1", "case2"}) {
        const Game game = case_game(name);
        const GameConstants k = compute_constants(game);
        const int n = game.topology().n_sum;
        for (int trial = 0; trial < 1000; ++trial) {
            const Vec x = random_point(rng, n, 25.0), y = random_point(rng, n, 25.0);
            Vec diff(n);
            for (int i = 0; i < n; ++i) diff[i] = x[i] - y[i];
            const double dist_sq = dot(diff, diff);

            // (x - y)^T (P(x) - P(y)) >= mu ||x - y||^2.
            const Vec px = pseudo_gradient(game, x), py = pseudo_gradient(game, y);
            Vec pdiff(n);
            for (int i = 0; i < n; ++i) pdiff[i] = px[i] - py[i];
            CHECK(dot(diff, pdiff) >= k.mu * dist_sq * (1.0 - 1e-8) - 1e-12);

            // ||grad f_a(x) - grad f_a(y)|| <= l_a ||x - y||, every agent.
            if (trial < 100) {
                for (int a = 0; a < n; ++a) {
                    const Vec ga = agent_gradient(game, a, x), gb = agent_gradient(game, a, y);
                    Vec gdiff(n);
                    for (int i = 0; i < n; ++i) gdiff[i] = ga[i] - gb[i];
                    CHECK(norm2(gdiff) <=
                          k.l_ij[a] * std::sqrt(dist_sq) * (1.0 + 1e-9) + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("special-kind games: coalition gradient reduces to own partials") {
    std::mt19937 rng(20240810);
    const Game g1 = case_game("case1");
    REQUIRE(g1.kind() == GameKind::Special);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec x = random_point(rng, 15, 35.0);
        const Vec grad = pseudo_gradient(g1, x);
        for (int a = 0; a < 15; ++a)
            CHECK(grad[a] == doctest::Approx(g1.agent_partial(a, a, x)).epsilon(1e-12));
    }
}

TEST_CASE("coalition_values: published objective values at the equilibrium") {
    const Game g1 = case_game("case1");
    const Vec v1 = coalition_values(g1, solve_ne(g1, 1e-9).x_star);
    CHECK(v1[0] == doctest::Approx(2554).epsilon(0.001));
    CHECK(v1[1] == doctest::Approx(2746).epsilon(0.001));
    CHECK(v1[2] == doctest::Approx(2326).epsilon(0.001));

    const Game g2 = case_game("case2");
    const Vec v2 = coalition_values(g2, solve_ne(g2, 1e-9).x_star);
    CHECK(v2[0] == doctest::Approx(6598).epsilon(0.001));
    CHECK(v2[1] == doctest::Approx(7295).epsilon(0.001));
    CHECK(v2[2] == doctest::Approx(9347).epsilon(0.001));
}
