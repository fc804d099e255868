#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "coalition_nash/topology.hpp"

namespace coalition_nash {

// f(x) = q (x_own - b)^2 + 1/2 x_own <coupling, x>, with coupling[own] = 0.
// Covers every experiment in scope; couplings are the interaction terms.
struct QuadraticObjective {
    double q = 0.0;
    double b = 0.0;
    Vec coupling;  // length n_sum
};

// Escape hatch for non-quadratic objectives: closures for the value and all
// partial derivatives. Certificates then need explicitly supplied constants.
struct GenericObjective {
    std::function<double(const Vec&)> value;
    std::function<double(int target, const Vec&)> partial;  // d f / d x_target
};

using Objective = std::variant<QuadraticObjective, GenericObjective>;

// Special: every objective depends only on the owner's decision and decisions
// outside the owner's coalition. General: intra-coalition coupling allowed.
enum class GameKind { Special, General };

struct GameConstants {
    Vec l_ij;   // per-agent Lipschitz constant of the objective gradient
    Vec l_i;    // per-coalition sum of l_ij
    double mu;  // strong-monotonicity constant of the pseudo-gradient
};

struct NEResult {
    Vec x_star;
    double kkt_residual;         // max_i || L_i dF_i/dx_i ||_inf
    double constraint_residual;  // max_i | sum_j x_ij - R_i |
    bool passed = false;
};

// Immutable game: objectives per agent, per-coalition resource totals, and
// per-agent initial holdings summing to those totals.
class Game {
public:
    Game(std::shared_ptr<const NetworkTopology> topo, std::vector<Objective> objectives,
         Vec resources, Vec holdings,
         std::optional<GameConstants> supplied_constants = std::nullopt);

    const NetworkTopology& topology() const { return *topo_; }
    std::shared_ptr<const NetworkTopology> topology_ptr() const { return topo_; }
    GameKind kind() const { return kind_; }
    const Vec& resources() const { return resources_; }
    const Vec& holdings() const { return holdings_; }
    const std::vector<Objective>& objectives() const { return objectives_; }
    bool all_quadratic() const;
    const std::optional<GameConstants>& supplied_constants() const { return supplied_constants_; }

    // Value of one agent's objective at the collective point x.
    double objective_value(int agent, const Vec& x) const;
    // d f_agent / d x_target at `point` (which may be an estimate, not the
    // true collective state).
    double agent_partial(int agent, int target, const Vec& point) const;

private:
    std::shared_ptr<const NetworkTopology> topo_;
    std::vector<Objective> objectives_;
    Vec resources_;  // R_i
    Vec holdings_;   // R_ij (initial allocation)
    GameKind kind_;
    std::optional<GameConstants> supplied_constants_;
};

// Stacked coalition gradients [dF_1/dx_1; ...; dF_N/dx_N] at x, where
// F_i = sum of the coalition's member objectives. Throws on non-finite input.
Vec pseudo_gradient(const Game& game, const Vec& x);

// Constant Jacobian of the pseudo-gradient for an all-quadratic game.
DenseMatrix pseudo_jacobian(const Game& game);

// l_ij from the per-agent Hessians, mu from the symmetrized pseudo-gradient
// Jacobian. Throws UnsupportedObjective for generic objectives without
// supplied constants, NotStronglyMonotone when mu <= 1e-12.
GameConstants compute_constants(const Game& game);

// Independent equilibrium oracle. Quadratic games: one dense solve of the
// stationarity-plus-budget linear system (throws SingularKKT). Generic games:
// projected pseudo-gradient iteration with affine budget projection, step
// mu / (sum l_i)^2, stopping when the update is below tol (throws
// NoConvergence past 1e6 iterations).
NEResult solve_ne(const Game& game, double tol);

// Residuals of the equilibrium conditions at x; `passed` compares the
// stationarity residual against tol (budget residual against 1e-9).
NEResult verify_ne(const Game& game, const Vec& x, double tol);

// Coalition objective values F_i(x).
Vec coalition_values(const Game& game, const Vec& x);

}  // namespace coalition_nash
