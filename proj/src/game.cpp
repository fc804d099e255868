#include "coalition_nash/game.hpp"

#include <cmath>
#include <string>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/numerics.hpp"

namespace coalition_nash {

namespace {

GameKind classify(const NetworkTopology& topo, const std::vector<Objective>& objectives) {
    for (int agent = 0; agent < topo.n_sum; ++agent) {
        const auto* quad = std::get_if<QuadraticObjective>(&objectives[agent]);
        if (quad == nullptr) return GameKind::General;  // opaque partials: assume the worst
        const int i = topo.coalition_of(agent);
        for (int other = topo.offsets[i]; other < topo.offsets[i + 1]; ++other)
            if (other != agent && quad->coupling[other] != 0.0) return GameKind::General;
    }
    return GameKind::Special;
}

}  // namespace

Game::Game(std::shared_ptr<const NetworkTopology> topo, std::vector<Objective> objectives,
           Vec resources, Vec holdings, std::optional<GameConstants> supplied_constants)
    : topo_(std::move(topo)),
      objectives_(std::move(objectives)),
      resources_(std::move(resources)),
      holdings_(std::move(holdings)),
      supplied_constants_(std::move(supplied_constants)) {
    const NetworkTopology& t = *topo_;
    if (static_cast<int>(objectives_.size()) != t.n_sum)
        throw ValidationError("need exactly one objective per agent");
    if (static_cast<int>(resources_.size()) != t.n_coalitions)
        throw ValidationError("need exactly one resource total per coalition");
    if (static_cast<int>(holdings_.size()) != t.n_sum)
        throw ValidationError("need exactly one initial holding per agent");
    for (int agent = 0; agent < t.n_sum; ++agent) {
        if (const auto* quad = std::get_if<QuadraticObjective>(&objectives_[agent])) {
            if (static_cast<int>(quad->coupling.size()) != t.n_sum)
                throw ValidationError("coupling vector of agent " + std::to_string(agent) +
                                      " has wrong length");
            if (quad->coupling[agent] != 0.0)
                throw ValidationError("coupling of agent " + std::to_string(agent) +
                                      " must be zero on its own coordinate");
        }
    }
    for (int i = 0; i < t.n_coalitions; ++i) {
        double sum = 0.0;
        for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) sum += holdings_[a];
        if (std::fabs(sum - resources_[i]) > 1e-12 * std::max(1.0, std::fabs(resources_[i])))
            throw ValidationError("holdings of coalition " + std::to_string(i + 1) +
                                  " sum to " + std::to_string(sum) + ", expected " +
                                  std::to_string(resources_[i]));
    }
    kind_ = classify(t, objectives_);
}

bool Game::all_quadratic() const {
    for (const Objective& o : objectives_)
        if (!std::holds_alternative<QuadraticObjective>(o)) return false;
    return true;
}

double Game::objective_value(int agent, const Vec& x) const {
    if (const auto* quad = std::get_if<QuadraticObjective>(&objectives_[agent])) {
        const double diff = x[agent] - quad->b;
        return quad->q * diff * diff + 0.5 * x[agent] * dot(quad->coupling, x);
    }
    return std::get<GenericObjective>(objectives_[agent]).value(x);
}

double Game::agent_partial(int agent, int target, const Vec& point) const {
    if (const auto* quad = std::get_if<QuadraticObjective>(&objectives_[agent])) {
        if (target == agent)
            return 2.0 * quad->q * (point[agent] - quad->b) + 0.5 * dot(quad->coupling, point);
        return 0.5 * point[agent] * quad->coupling[target];
    }
    return std::get<GenericObjective>(objectives_[agent]).partial(target, point);
}

Vec pseudo_gradient(const Game& game, const Vec& x) {
    if (!all_finite(x)) throw Error("pseudo_gradient: non-finite input");
    const NetworkTopology& t = game.topology();
    Vec g(t.n_sum, 0.0);
    for (int i = 0; i < t.n_coalitions; ++i)
        for (int target = t.offsets[i]; target < t.offsets[i + 1]; ++target) {
            double acc = 0.0;
            for (int member = t.offsets[i]; member < t.offsets[i + 1]; ++member)
                acc += game.agent_partial(member, target, x);
            g[target] = acc;
        }
    return g;
}

DenseMatrix pseudo_jacobian(const Game& game) {
    if (!game.all_quadratic())
        throw UnsupportedObjective("pseudo_jacobian needs an all-quadratic game");
    const NetworkTopology& t = game.topology();
    DenseMatrix j(t.n_sum, t.n_sum);
    for (int i = 0; i < t.n_coalitions; ++i) {
        for (int r = t.offsets[i]; r < t.offsets[i + 1]; ++r) {
            const auto& own = std::get<QuadraticObjective>(game.objectives()[r]);
            j.at(r, r) += 2.0 * own.q;
            for (int c = 0; c < t.n_sum; ++c) j.at(r, c) += 0.5 * own.coupling[c];
            for (int l = t.offsets[i]; l < t.offsets[i + 1]; ++l) {
                if (l == r) continue;
                const auto& member = std::get<QuadraticObjective>(game.objectives()[l]);
                j.at(r, l) += 0.5 * member.coupling[r];
            }
        }
    }
    return j;
}

GameConstants compute_constants(const Game& game) {
    if (!game.all_quadratic()) {
        if (game.supplied_constants()) return *game.supplied_constants();
        throw UnsupportedObjective(
            "constants for generic objectives must be supplied with the game");
    }
    const NetworkTopology& t = game.topology();
    GameConstants k;
    k.l_ij.resize(t.n_sum);
    for (int agent = 0; agent < t.n_sum; ++agent) {
        const auto& quad = std::get<QuadraticObjective>(game.objectives()[agent]);
        // Hessian of one objective: 2q on (own,own) plus the symmetrized
        // coupling rank-2 part.
        DenseMatrix h(t.n_sum, t.n_sum);
        h.at(agent, agent) = 2.0 * quad.q;
        for (int c = 0; c < t.n_sum; ++c) {
            h.at(agent, c) += 0.5 * quad.coupling[c];
            h.at(c, agent) += 0.5 * quad.coupling[c];
        }
        k.l_ij[agent] = spectral_norm(h);
    }
    k.l_i.assign(t.n_coalitions, 0.0);
    for (int i = 0; i < t.n_coalitions; ++i)
        for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) k.l_i[i] += k.l_ij[a];

    const DenseMatrix j = pseudo_jacobian(game);
    const DenseMatrix sym = scale(add(j, transpose(j)), 0.5);
    k.mu = symmetric_eigenvalues(sym).front();
    if (k.mu <= 1e-12)
        throw NotStronglyMonotone("pseudo-gradient is not strongly monotone (mu = " +
                                  std::to_string(k.mu) + ")");
    return k;
}

namespace {

NEResult residuals_at(const Game& game, const Vec& x) {
    const NetworkTopology& t = game.topology();
    const Vec g = pseudo_gradient(game, x);
    NEResult r;
    r.x_star = x;
    r.kkt_residual = 0.0;
    r.constraint_residual = 0.0;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const DenseMatrix& l = t.laplacians[i];
        double budget = -game.resources()[i];
        for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) budget += x[a];
        r.constraint_residual = std::max(r.constraint_residual, std::fabs(budget));
        for (int row = 0; row < l.rows(); ++row) {
            double acc = 0.0;
            for (int col = 0; col < l.cols(); ++col) acc += l.at(row, col) * g[t.offsets[i] + col];
            r.kkt_residual = std::max(r.kkt_residual, std::fabs(acc));
        }
    }
    return r;
}

NEResult solve_ne_quadratic(const Game& game, double tol) {
    const NetworkTopology& t = game.topology();
    const int n = t.n_sum, nc = t.n_coalitions;
    // Stationarity with one multiplier per coalition plus the budget rows:
    //   J x + g0 + lambda_i 1 = 0 on coalition i;  1^T x_i = R_i.
    const DenseMatrix j = pseudo_jacobian(game);
    const Vec g0 = pseudo_gradient(game, Vec(n, 0.0));
    DenseMatrix k(n + nc, n + nc);
    Vec rhs(n + nc, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) k.at(r, c) = j.at(r, c);
        rhs[r] = -g0[r];
    }
    for (int i = 0; i < nc; ++i) {
        for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) {
            k.at(a, n + i) = 1.0;
            k.at(n + i, a) = 1.0;
        }
        rhs[n + i] = game.resources()[i];
    }
    Vec sol;
    try {
        sol = solve_linear(std::move(k), std::move(rhs));
    } catch (const SingularSystem& e) {
        throw SingularKKT(std::string("equilibrium system is singular: ") + e.what());
    }
    Vec x(sol.begin(), sol.begin() + n);
    NEResult r = residuals_at(game, x);
    r.passed = r.kkt_residual <= tol && r.constraint_residual <= 1e-9;
    return r;
}

NEResult solve_ne_generic(const Game& game, double tol) {
    const NetworkTopology& t = game.topology();
    const GameConstants k = compute_constants(game);
    double l_sum = 0.0;
    for (double v : k.l_i) l_sum += v;
    const double step = k.mu / (l_sum * l_sum);
    Vec x = game.holdings();
    const long cap = 1000000;
    for (long it = 0; it < cap; ++it) {
        const Vec g = pseudo_gradient(game, x);
        Vec next(t.n_sum, 0.0);
        for (int i = 0; i < t.n_coalitions; ++i) {
            // Gradient step, then affine projection back onto the budget plane.
            double sum = 0.0;
            for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) {
                next[a] = x[a] - step * g[a];
                sum += next[a];
            }
            const double shift = (game.resources()[i] - sum) / t.coalition_sizes[i];
            for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) next[a] += shift;
        }
        double moved = 0.0;
        for (int a = 0; a < t.n_sum; ++a) moved += (next[a] - x[a]) * (next[a] - x[a]);
        x = std::move(next);
        if (std::sqrt(moved) < tol) {
            NEResult r = residuals_at(game, x);
            r.passed = r.kkt_residual <= tol && r.constraint_residual <= 1e-9;
            return r;
        }
    }
    throw NoConvergence("projected pseudo-gradient iteration exceeded 1e6 iterations");
}

}  // namespace

NEResult solve_ne(const Game& game, double tol) {
    return game.all_quadratic() ? solve_ne_quadratic(game, tol) : solve_ne_generic(game, tol);
}

NEResult verify_ne(const Game& game, const Vec& x, double tol) {
    NEResult r = residuals_at(game, x);
    r.passed = r.kkt_residual <= tol && r.constraint_residual <= 1e-9;
    return r;
}

Vec coalition_values(const Game& game, const Vec& x) {
    const NetworkTopology& t = game.topology();
    Vec f(t.n_coalitions, 0.0);
    for (int i = 0; i < t.n_coalitions; ++i)
        for (int a = t.offsets[i]; a < t.offsets[i + 1]; ++a) f[i] += game.objective_value(a, x);
    return f;
}

}  // namespace coalition_nash
