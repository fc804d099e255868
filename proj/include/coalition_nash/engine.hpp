#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coalition_nash/game.hpp"

namespace coalition_nash {

enum class AlgorithmMode { Special, General };

// State of the estimate-based algorithm: x derived from eta, never mutated
// independently (keeps the coalition budgets exact), plus the estimator
// matrix xi stored estimator-major (xi[est * n_sum + tgt] is agent est's
// running estimate of agent tgt's decision).
struct SpecialCaseState {
    long k = 0;
    Vec x;
    Vec eta;
    Vec xi;
};

// Adds the gradient-tracking block psi: for coalition i (offset
// psi_offsets[i]), entry [j * n_i + l] is member j's running estimate of the
// coalition-average partial derivative with respect to member l's decision.
struct GeneralCaseState {
    long k = 0;
    Vec x;
    Vec eta;
    Vec xi;
    Vec psi;
    std::vector<int> psi_offsets;
};

// Everything the step-size theorems need, evaluated exactly from the game and
// its topology: Lyapunov solutions for the estimation operator (per-target
// blocks) and for the mixing matrices, their norms, and the resulting step
// bound and contraction rate.
struct StepSizeCertificate {
    AlgorithmMode mode = AlgorithmMode::Special;
    double gamma = 0.0;   // weight of the estimation error in the composite function
    double b = 0.0;       // n_sum (2 ||M^T W_M||^2 + ||W_M||)
    double gamma_psi = 0.0;
    double gamma_xi = 0.0;
    double W_M_norm = 0.0;
    double MTW_M_norm = 0.0;
    double I_minus_M_norm = 0.0;
    double W_c_norm = 0.0;
    std::vector<DenseMatrix> W_M_blocks;   // per-target Lyapunov solutions
    std::vector<DenseMatrix> W_c;          // per-coalition Lyapunov solutions
    Vec lambda2_Lsq;                       // per-coalition lambda_2(L_i^2)
    double bound = 0.0;                    // certified step-size upper limit
    double rate = 0.0;                     // certified linear contraction rate
    GameConstants constants;
};

// Per-iteration health and convergence measurements. Fields that do not apply
// to the current mode (or lack an oracle/certificate) are NaN.
struct Diagnostics {
    long k = 0;
    double constraint_residual = 0.0;
    double e_xi_norm = 0.0;
    double e_psi_norm = 0.0;
    double V_x = 0.0, V_xi = 0.0, V = 0.0;           // estimate-based composite
    double Vbar_x = 0.0, V_psi = 0.0, Vtilde = 0.0;  // tracking composite
    double dist_to_ne = 0.0;
    double kkt_residual = 0.0;
};

struct RunOptions {
    AlgorithmMode mode = AlgorithmMode::Special;
    double step = 0.0;
    long max_iters = 0;
    double stop_tol = 0.0;  // early stop when ||x(k+1) - x(k)||_inf < stop_tol; 0 disables
    long log_stride = 1;
    std::optional<Vec> oracle_ne;                  // enables dist_to_ne
    const StepSizeCertificate* certificate = nullptr;  // enables the V columns
};

struct Trajectory {
    std::vector<Diagnostics> diagnostics;  // rows at k = 0, stride, ..., final
    std::vector<Vec> x_rows;               // x at the same iterations
    Vec dist_series;                       // ||x(k) - x*|| after every iteration k = 1..end
    long iterations = 0;
    bool stopped_by_tolerance = false;
    Vec final_x;
};

// x(0) = holdings, eta(0) = 0, estimates initialized from locally visible
// decisions (own and direct neighbors; zero elsewhere). Emits a KindMismatch
// warning through the logger when the game has intra-coalition coupling the
// estimate-based update cannot see; the run is still permitted.
SpecialCaseState init_special(const Game& game);

// One synchronous update: all (k+1)-quantities from k-quantities, then x
// rebuilt from the holdings and the Laplacian image of eta.
SpecialCaseState step_special(const SpecialCaseState& s, const Game& game, double alpha);

GeneralCaseState init_general(const Game& game);
GeneralCaseState step_general(const GeneralCaseState& s, const Game& game, double beta);

// Certified step bounds (throws DegenerateTopology when every coalition is a
// single agent, NotSchur / NotStronglyMonotone propagate from the solvers).
StepSizeCertificate alpha_bound(const Game& game);
StepSizeCertificate beta_bound(const Game& game);

Trajectory run(const Game& game, const RunOptions& opts);

Diagnostics lyapunov_values(const SpecialCaseState& s, const Game& game,
                            const StepSizeCertificate& cert);
Diagnostics lyapunov_values(const GeneralCaseState& s, const Game& game,
                            const StepSizeCertificate& cert);

// Gradient-tracking mean identity: max over coalitions and coordinates of
// | column-mean(psi_i) - coalition-average partials at the current estimates |.
double tracking_identity_gap(const GeneralCaseState& s, const Game& game);

// Estimation-error vector xi - 1 (x) x, estimator-major.
Vec estimation_error(const Vec& xi, const Vec& x, int n_sum);

}  // namespace coalition_nash
