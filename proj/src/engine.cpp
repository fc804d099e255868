#include "coalition_nash/engine.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/log.hpp"
#include "coalition_nash/numerics.hpp"

namespace coalition_nash {

namespace {

constexpr double kDivergenceLimit = 1e12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rebuild x from the holdings and eta: x_i = x_i(0) - L_i eta_i. Doing it
// fresh every step keeps the budget identity structural (1^T L_i = 0) instead
// of an accumulating approximation.
Vec derive_x(const Game& game, const Vec& eta) {
    const NetworkTopology& t = game.topology();
    Vec x = game.holdings();
    for (int i = 0; i < t.n_coalitions; ++i) {
        const DenseMatrix& l = t.laplacians[i];
        for (int r = 0; r < l.rows(); ++r) {
            double acc = 0.0;
            for (int c = 0; c < l.cols(); ++c) acc += l.at(r, c) * eta[t.offsets[i] + c];
            x[t.offsets[i] + r] -= acc;
        }
    }
    return x;
}

Vec initial_estimates(const Game& game, const Vec& x) {
    const NetworkTopology& t = game.topology();
    Vec xi(static_cast<size_t>(t.n_sum) * t.n_sum, 0.0);
    for (int est = 0; est < t.n_sum; ++est) {
        xi[static_cast<size_t>(est) * t.n_sum + est] = x[est];
        for (int nb : t.neighbors[est]) xi[static_cast<size_t>(est) * t.n_sum + nb] = x[nb];
    }
    return xi;
}

// One synchronous estimate update: keep-weight wbar on the own entry, mix
// neighbors' estimates, and inject each neighbor's true decision as leader.
Vec step_estimates(const NetworkTopology& t, const Vec& xi, const Vec& x) {
    const int n = t.n_sum;
    Vec next(static_cast<size_t>(n) * n, 0.0);
    const DenseMatrix& w = t.weighted_adjacency;
    for (int est = 0; est < n; ++est) {
        const size_t row = static_cast<size_t>(est) * n;
        for (int tgt = 0; tgt < n; ++tgt) next[row + tgt] = t.wbar.at(est, tgt) * xi[row + tgt];
        for (int nb : t.neighbors[est]) {
            const double wv = w.at(est, nb);
            const size_t nb_row = static_cast<size_t>(nb) * n;
            for (int tgt = 0; tgt < n; ++tgt) next[row + tgt] += wv * xi[nb_row + tgt];
            next[row + nb] += wv * x[nb];
        }
    }
    return next;
}

void guard_finite(const Vec& x, long k) {
    if (!all_finite(x) || norm_inf(x) > kDivergenceLimit)
        throw Diverged("state diverged at iteration " + std::to_string(k), k);
}

// Coalition-partial table at the current estimates: row j (member), column l
// (coalition coordinate) holds d f_ij / d x_il evaluated at member j's own
// estimate row.
void partial_table(const Game& game, const Vec& xi, int coalition, Vec& scratch_row,
                   Vec& out) {
    const NetworkTopology& t = game.topology();
    const int ni = t.coalition_sizes[coalition], base = t.offsets[coalition];
    out.assign(static_cast<size_t>(ni) * ni, 0.0);
    for (int j = 0; j < ni; ++j) {
        const size_t row = static_cast<size_t>(base + j) * t.n_sum;
        scratch_row.assign(xi.begin() + row, xi.begin() + row + t.n_sum);
        for (int l = 0; l < ni; ++l)
            out[static_cast<size_t>(j) * ni + l] =
                game.agent_partial(base + j, base + l, scratch_row);
    }
}

}  // namespace

Vec estimation_error(const Vec& xi, const Vec& x, int n_sum) {
    Vec e(xi.size(), 0.0);
    for (int est = 0; est < n_sum; ++est)
        for (int tgt = 0; tgt < n_sum; ++tgt) {
            const size_t idx = static_cast<size_t>(est) * n_sum + tgt;
            e[idx] = xi[idx] - x[tgt];
        }
    return e;
}

SpecialCaseState init_special(const Game& game) {
    if (game.kind() == GameKind::General)
        log::warn(
            "estimate-based algorithm started on a game with intra-coalition coupling; "
            "its limit need not be an equilibrium (tracking mode handles this case)");
    SpecialCaseState s;
    s.k = 0;
    s.eta.assign(game.topology().n_sum, 0.0);
    s.x = game.holdings();
    s.xi = initial_estimates(game, s.x);
    return s;
}

SpecialCaseState step_special(const SpecialCaseState& s, const Game& game, double alpha) {
    const NetworkTopology& t = game.topology();
    const int n = t.n_sum;

    // Own-partials at each agent's estimate row.
    Vec own(n, 0.0), row(n, 0.0);
    for (int a = 0; a < n; ++a) {
        const size_t base = static_cast<size_t>(a) * n;
        row.assign(s.xi.begin() + base, s.xi.begin() + base + n);
        own[a] = game.agent_partial(a, a, row);
    }

    SpecialCaseState next;
    next.k = s.k + 1;
    next.eta = s.eta;
    for (int a = 0; a < n; ++a) {
        double acc = 0.0;
        for (int m : t.intra_neighbors[a]) acc += own[a] - own[m];
        next.eta[a] += alpha * acc;
    }
    next.xi = step_estimates(t, s.xi, s.x);
    next.x = derive_x(game, next.eta);
    guard_finite(next.x, next.k);
    return next;
}

GeneralCaseState init_general(const Game& game) {
    const NetworkTopology& t = game.topology();
    GeneralCaseState s;
    s.k = 0;
    s.eta.assign(t.n_sum, 0.0);
    s.x = game.holdings();
    s.xi = initial_estimates(game, s.x);
    s.psi_offsets.resize(t.n_coalitions + 1, 0);
    for (int i = 0; i < t.n_coalitions; ++i)
        s.psi_offsets[i + 1] = s.psi_offsets[i] + t.coalition_sizes[i] * t.coalition_sizes[i];
    s.psi.assign(s.psi_offsets.back(), 0.0);
    Vec scratch, table;
    for (int i = 0; i < t.n_coalitions; ++i) {
        partial_table(game, s.xi, i, scratch, table);
        std::copy(table.begin(), table.end(), s.psi.begin() + s.psi_offsets[i]);
    }
    return s;
}

GeneralCaseState step_general(const GeneralCaseState& s, const Game& game, double beta) {
    const NetworkTopology& t = game.topology();

    GeneralCaseState next;
    next.k = s.k + 1;
    next.psi_offsets = s.psi_offsets;

    next.eta = s.eta;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = t.coalition_sizes[i], base = t.offsets[i];
        const size_t pbase = s.psi_offsets[i];
        for (int j = 0; j < ni; ++j) {
            const size_t prow = pbase + static_cast<size_t>(j) * ni;
            double acc = 0.0;
            for (int m : t.intra_neighbors[base + j])
                acc += s.psi[prow + j] - s.psi[prow + (m - base)];
            next.eta[base + j] += beta * acc;
        }
    }

    next.xi = step_estimates(t, s.xi, s.x);

    // psi(k+1) = (C_i mix of psi(k)) + partials(xi(k+1)) - partials(xi(k)).
    next.psi.assign(s.psi.size(), 0.0);
    Vec scratch, stale, fresh;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = t.coalition_sizes[i];
        const size_t pbase = s.psi_offsets[i];
        const DenseMatrix& c = t.mixing[i];
        partial_table(game, s.xi, i, scratch, stale);
        partial_table(game, next.xi, i, scratch, fresh);
        for (int j = 0; j < ni; ++j) {
            const size_t prow = pbase + static_cast<size_t>(j) * ni;
            for (int l = 0; l < ni; ++l) {
                double acc = 0.0;
                for (int m = 0; m < ni; ++m)
                    acc += c.at(j, m) * s.psi[pbase + static_cast<size_t>(m) * ni + l];
                next.psi[prow + l] = acc + fresh[static_cast<size_t>(j) * ni + l] -
                                     stale[static_cast<size_t>(j) * ni + l];
            }
        }
    }

    next.x = derive_x(game, next.eta);
    guard_finite(next.x, next.k);
    if (!all_finite(next.psi))
        throw Diverged("tracking state diverged at iteration " + std::to_string(next.k), next.k);
    return next;
}

double tracking_identity_gap(const GeneralCaseState& s, const Game& game) {
    const NetworkTopology& t = game.topology();
    double worst = 0.0;
    Vec scratch, table;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = t.coalition_sizes[i];
        partial_table(game, s.xi, i, scratch, table);
        for (int l = 0; l < ni; ++l) {
            double psi_mean = 0.0, partial_mean = 0.0;
            for (int j = 0; j < ni; ++j) {
                psi_mean += s.psi[s.psi_offsets[i] + static_cast<size_t>(j) * ni + l];
                partial_mean += table[static_cast<size_t>(j) * ni + l];
            }
            worst = std::max(worst, std::fabs(psi_mean - partial_mean) / ni);
        }
    }
    return worst;
}

namespace {

struct CommonCertificateParts {
    GameConstants constants;
    std::vector<DenseMatrix> blocks;       // per-target estimation-mixing blocks B_t
    std::vector<DenseMatrix> W_M_blocks;
    double W_M_norm = 0.0, MTW_M_norm = 0.0, I_minus_M_norm = 0.0, b = 0.0;
    Vec laplacian_norms;  // ||L_i||, 0 for single-agent coalitions
    Vec lambda2;          // lambda_2(L_i^2), 0 for single-agent coalitions
    std::vector<bool> active;  // coalition participates (n_i > 1)
};

CommonCertificateParts certificate_parts(const Game& game) {
    const NetworkTopology& t = game.topology();
    CommonCertificateParts p;
    p.constants = compute_constants(game);

    p.active.resize(t.n_coalitions);
    p.laplacian_norms.assign(t.n_coalitions, 0.0);
    p.lambda2.assign(t.n_coalitions, 0.0);
    bool any_active = false;
    for (int i = 0; i < t.n_coalitions; ++i) {
        p.active[i] = t.coalition_sizes[i] > 1;
        any_active = any_active || p.active[i];
        if (p.active[i]) {
            p.laplacian_norms[i] = spectral_norm(t.laplacians[i]);
            p.lambda2[i] = lambda2_of_square(t.laplacians[i]);
        }
    }
    if (!any_active)
        throw DegenerateTopology(
            "every coalition is a single agent; the decision dynamics are frozen and no "
            "step-size bound exists");

    const ConsensusOperator op = consensus_matrices(t);
    const DenseMatrix eye = DenseMatrix::identity(t.n_sum);
    for (int tgt = 0; tgt < t.n_sum; ++tgt) {
        DenseMatrix block = op.target_block(tgt);
        LyapunovSolution sol = solve_discrete_lyapunov(block);
        p.W_M_norm = std::max(p.W_M_norm, spectral_norm(sol.W));
        p.MTW_M_norm = std::max(p.MTW_M_norm, spectral_norm(matmul(transpose(block), sol.W)));
        p.I_minus_M_norm = std::max(p.I_minus_M_norm, spectral_norm(subtract(eye, block)));
        p.W_M_blocks.push_back(std::move(sol.W));
        p.blocks.push_back(std::move(block));
    }
    p.b = t.n_sum * (2.0 * p.MTW_M_norm * p.MTW_M_norm + p.W_M_norm);
    return p;
}

}  // namespace

StepSizeCertificate alpha_bound(const Game& game) {
    const NetworkTopology& t = game.topology();
    CommonCertificateParts p = certificate_parts(game);

    double gamma = 0.0;        // 4 max_i l_i^2 ||L_i||^2
    double max_l2_L4 = 0.0;    // max_i l_i^2 ||L_i||^4
    double sum_l2_L2 = 0.0;    // sum_i l_i^2 ||L_i||^2
    double min_lambda2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < t.n_coalitions; ++i) {
        if (!p.active[i]) continue;
        const double li2 = p.constants.l_i[i] * p.constants.l_i[i];
        const double L2 = p.laplacian_norms[i] * p.laplacian_norms[i];
        gamma = std::max(gamma, 4.0 * li2 * L2);
        max_l2_L4 = std::max(max_l2_L4, li2 * L2 * L2);
        sum_l2_L2 += li2 * L2;
        min_lambda2 = std::min(min_lambda2, p.lambda2[i]);
    }
    const double mu = p.constants.mu;
    const double bound = std::min(gamma / (8.0 * mu * max_l2_L4),
                                  mu / (2.0 * sum_l2_L2 + gamma * p.b));
    const double rate =
        std::min(1.0 / (8.0 * p.W_M_norm), 0.5 * mu * bound * min_lambda2);

    StepSizeCertificate c;
    c.mode = AlgorithmMode::Special;
    c.gamma = gamma;
    c.b = p.b;
    c.W_M_norm = p.W_M_norm;
    c.MTW_M_norm = p.MTW_M_norm;
    c.I_minus_M_norm = p.I_minus_M_norm;
    c.W_M_blocks = std::move(p.W_M_blocks);
    c.lambda2_Lsq = p.lambda2;
    c.bound = bound;
    c.rate = rate;
    c.constants = std::move(p.constants);
    if (!(c.bound > 0.0) || !(c.rate > 0.0 && c.rate < 1.0))
        throw Error("step-size certificate is degenerate");
    return c;
}

StepSizeCertificate beta_bound(const Game& game) {
    const NetworkTopology& t = game.topology();
    CommonCertificateParts p = certificate_parts(game);
    const double mu = p.constants.mu;

    // Per-coalition Lyapunov data for the mixing matrices.
    std::vector<DenseMatrix> w_c;
    double w_c_norm = 0.0;
    double gamma_psi = 0.0;          // 4 max_i n_i ||Lbreve_i||^2
    double max_LLbreve_sq = 0.0;     // max_i ||L_i Lbreve_i||^2
    double max_mix_term = 0.0;       // max over agents of the W_c coupling factor
    double sum_term = 0.0;           // sum_i l_i^2 ||L_i||^2 / n_i
    double max_sum_lij2_L2_over_n = 0.0;
    double max_L4_sum_lij2_over_n2 = 0.0;
    double min_lambda2_over_n = std::numeric_limits<double>::infinity();

    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = t.coalition_sizes[i], base = t.offsets[i];
        // Centered mixing matrix and its Lyapunov solution.
        DenseMatrix centered = t.mixing[i];
        DenseMatrix centering = DenseMatrix::identity(ni);
        for (int r = 0; r < ni; ++r)
            for (int c = 0; c < ni; ++c) {
                centered.at(r, c) -= 1.0 / ni;
                centering.at(r, c) -= 1.0 / ni;
            }
        LyapunovSolution sol = solve_discrete_lyapunov(centered);
        w_c_norm = std::max(w_c_norm, spectral_norm(sol.W));

        double sum_lij2 = 0.0, max_lij2 = 0.0;
        for (int a = base; a < base + ni; ++a) {
            const double l2 = p.constants.l_ij[a] * p.constants.l_ij[a];
            sum_lij2 += l2;
            max_lij2 = std::max(max_lij2, l2);
        }
        const double mix_factor =
            2.0 * std::pow(spectral_norm(matmul(transpose(centered), matmul(sol.W, centering))), 2) +
            spectral_norm(matmul(transpose(centering), matmul(sol.W, centering)));
        max_mix_term = std::max(max_mix_term, mix_factor * max_lij2);
        w_c.push_back(std::move(sol.W));

        if (!p.active[i]) continue;
        const DenseMatrix breve = row_laplacian(t, i + 1);
        const double breve_norm = spectral_norm(breve);
        gamma_psi = std::max(gamma_psi, 4.0 * ni * breve_norm * breve_norm);
        const double ll = spectral_norm(matmul(t.laplacians[i], breve));
        max_LLbreve_sq = std::max(max_LLbreve_sq, ll * ll);

        const double L2 = p.laplacian_norms[i] * p.laplacian_norms[i];
        sum_term += p.constants.l_i[i] * p.constants.l_i[i] * L2 / ni;
        max_sum_lij2_L2_over_n = std::max(max_sum_lij2_L2_over_n, sum_lij2 * L2 / ni);
        max_L4_sum_lij2_over_n2 =
            std::max(max_L4_sum_lij2_over_n2, L2 * L2 * sum_lij2 / (static_cast<double>(ni) * ni));
        min_lambda2_over_n = std::min(min_lambda2_over_n, p.lambda2[i] / ni);
    }

    const double gamma_xi =
        4.0 * (max_sum_lij2_L2_over_n +
               2.0 * gamma_psi * max_mix_term * p.I_minus_M_norm * p.I_minus_M_norm);

    const double bound = std::min({mu / (2.0 * (sum_term + gamma_xi * p.b)),
                                   gamma_psi / (8.0 * mu * max_LLbreve_sq),
                                   gamma_xi / (8.0 * mu * max_L4_sum_lij2_over_n2)});
    const double rate = std::min({0.5 * mu * bound * min_lambda2_over_n,
                                  1.0 / (8.0 * w_c_norm), 1.0 / (8.0 * p.W_M_norm)});

    StepSizeCertificate c;
    c.mode = AlgorithmMode::General;
    c.gamma = 0.0;
    c.b = p.b;
    c.gamma_psi = gamma_psi;
    c.gamma_xi = gamma_xi;
    c.W_M_norm = p.W_M_norm;
    c.MTW_M_norm = p.MTW_M_norm;
    c.I_minus_M_norm = p.I_minus_M_norm;
    c.W_c_norm = w_c_norm;
    c.W_M_blocks = std::move(p.W_M_blocks);
    c.W_c = std::move(w_c);
    c.lambda2_Lsq = p.lambda2;
    c.bound = bound;
    c.rate = rate;
    c.constants = std::move(p.constants);
    if (!(c.bound > 0.0) || !(c.rate > 0.0 && c.rate < 1.0))
        throw Error("step-size certificate is degenerate");
    return c;
}

namespace {

// Shared pieces of the composite-function evaluation.
struct LyapunovParts {
    double V_x_sum = 0.0;      // sum_i ||L_i g_i||^2
    double Vbar_x_sum = 0.0;   // sum_i ||L_i g_i||^2 / (2 n_i)
    double kkt = 0.0;
    double constraint = 0.0;
};

LyapunovParts gradient_parts(const Game& game, const Vec& x) {
    const NetworkTopology& t = game.topology();
    const Vec g = pseudo_gradient(game, x);
    LyapunovParts out;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const DenseMatrix& l = t.laplacians[i];
        double budget = -game.resources()[i];
        double sq = 0.0;
        for (int r = 0; r < l.rows(); ++r) {
            budget += x[t.offsets[i] + r];
            double acc = 0.0;
            for (int c = 0; c < l.cols(); ++c) acc += l.at(r, c) * g[t.offsets[i] + c];
            sq += acc * acc;
            out.kkt = std::max(out.kkt, std::fabs(acc));
        }
        out.constraint = std::max(out.constraint, std::fabs(budget));
        out.V_x_sum += sq;
        out.Vbar_x_sum += sq / (2.0 * t.coalition_sizes[i]);
    }
    return out;
}

// V_xi = sum over targets of e[., t]^T W_Bt e[., t]; exact because the
// estimation operator never mixes target columns.
double estimation_energy(const StepSizeCertificate& cert, const Vec& e, int n) {
    double acc = 0.0;
    Vec column(n, 0.0);
    for (int tgt = 0; tgt < n; ++tgt) {
        for (int est = 0; est < n; ++est) column[est] = e[static_cast<size_t>(est) * n + tgt];
        acc += quadratic_form(cert.W_M_blocks[tgt], column, column);
    }
    return acc;
}

}  // namespace

Diagnostics lyapunov_values(const SpecialCaseState& s, const Game& game,
                            const StepSizeCertificate& cert) {
    const NetworkTopology& t = game.topology();
    Diagnostics d;
    d.k = s.k;
    const LyapunovParts parts = gradient_parts(game, s.x);
    d.constraint_residual = parts.constraint;
    d.kkt_residual = parts.kkt;
    const Vec e = estimation_error(s.xi, s.x, t.n_sum);
    d.e_xi_norm = norm2(e);
    d.e_psi_norm = kNaN;
    d.V_x = parts.V_x_sum;
    d.V_xi = estimation_energy(cert, e, t.n_sum);
    d.V = d.V_x + cert.gamma * d.V_xi;
    d.Vbar_x = kNaN;
    d.V_psi = kNaN;
    d.Vtilde = kNaN;
    d.dist_to_ne = kNaN;
    return d;
}

Diagnostics lyapunov_values(const GeneralCaseState& s, const Game& game,
                            const StepSizeCertificate& cert) {
    const NetworkTopology& t = game.topology();
    Diagnostics d;
    d.k = s.k;
    const LyapunovParts parts = gradient_parts(game, s.x);
    d.constraint_residual = parts.constraint;
    d.kkt_residual = parts.kkt;
    const Vec e = estimation_error(s.xi, s.x, t.n_sum);
    d.e_xi_norm = norm2(e);
    d.V_xi = estimation_energy(cert, e, t.n_sum);
    d.V_x = parts.V_x_sum;
    d.Vbar_x = parts.Vbar_x_sum;

    // Tracking disagreement energy: center each psi column within its
    // coalition, then apply that coalition's Lyapunov solution per column.
    double v_psi = 0.0, e_psi_sq = 0.0;
    Vec column;
    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = t.coalition_sizes[i];
        const size_t pbase = s.psi_offsets[i];
        column.assign(ni, 0.0);
        for (int l = 0; l < ni; ++l) {
            double mean = 0.0;
            for (int j = 0; j < ni; ++j) mean += s.psi[pbase + static_cast<size_t>(j) * ni + l];
            mean /= ni;
            for (int j = 0; j < ni; ++j)
                column[j] = s.psi[pbase + static_cast<size_t>(j) * ni + l] - mean;
            for (double v : column) e_psi_sq += v * v;
            if (!cert.W_c.empty()) v_psi += quadratic_form(cert.W_c[i], column, column);
        }
    }
    d.e_psi_norm = std::sqrt(e_psi_sq);
    d.V_psi = cert.W_c.empty() ? kNaN : v_psi;
    d.Vtilde = cert.W_c.empty() ? kNaN
                                : d.Vbar_x + cert.gamma_psi * d.V_psi + cert.gamma_xi * d.V_xi;
    d.V = kNaN;
    d.dist_to_ne = kNaN;
    return d;
}

namespace {

Diagnostics basic_diagnostics(const Game& game, const Vec& x, const Vec& xi, const Vec* psi,
                              const std::vector<int>* psi_offsets, long k) {
    const NetworkTopology& t = game.topology();
    Diagnostics d;
    d.k = k;
    const LyapunovParts parts = gradient_parts(game, x);
    d.constraint_residual = parts.constraint;
    d.kkt_residual = parts.kkt;
    d.V_x = parts.V_x_sum;
    d.Vbar_x = parts.Vbar_x_sum;
    d.e_xi_norm = norm2(estimation_error(xi, x, t.n_sum));
    if (psi != nullptr) {
        double acc = 0.0;
        for (int i = 0; i < t.n_coalitions; ++i) {
            const int ni = t.coalition_sizes[i];
            const size_t pbase = (*psi_offsets)[i];
            for (int l = 0; l < ni; ++l) {
                double mean = 0.0;
                for (int j = 0; j < ni; ++j) mean += (*psi)[pbase + static_cast<size_t>(j) * ni + l];
                mean /= ni;
                for (int j = 0; j < ni; ++j) {
                    const double v = (*psi)[pbase + static_cast<size_t>(j) * ni + l] - mean;
                    acc += v * v;
                }
            }
        }
        d.e_psi_norm = std::sqrt(acc);
    } else {
        d.e_psi_norm = kNaN;
    }
    d.V_xi = kNaN;
    d.V = kNaN;
    d.V_psi = kNaN;
    d.Vtilde = kNaN;
    d.dist_to_ne = kNaN;
    return d;
}

}  // namespace

Trajectory run(const Game& game, const RunOptions& opts) {
    if (!(opts.step > 0.0)) throw Error("step size must be positive");
    const long stride = std::max<long>(1, opts.log_stride);
    Trajectory out;

    const bool general = opts.mode == AlgorithmMode::General;
    SpecialCaseState sp;
    GeneralCaseState gn;
    if (general)
        gn = init_general(game);
    else
        sp = init_special(game);

    auto current_x = [&]() -> const Vec& { return general ? gn.x : sp.x; };
    auto current_xi = [&]() -> const Vec& { return general ? gn.xi : sp.xi; };

    auto log_row = [&](long k) {
        Diagnostics d;
        if (opts.certificate != nullptr && opts.certificate->mode == opts.mode) {
            d = general ? lyapunov_values(gn, game, *opts.certificate)
                        : lyapunov_values(sp, game, *opts.certificate);
        } else {
            d = basic_diagnostics(game, current_x(), current_xi(), general ? &gn.psi : nullptr,
                                  general ? &gn.psi_offsets : nullptr, k);
        }
        d.k = k;
        if (opts.oracle_ne) {
            Vec diff = current_x();
            for (size_t i = 0; i < diff.size(); ++i) diff[i] -= (*opts.oracle_ne)[i];
            d.dist_to_ne = norm2(diff);
        }
        out.diagnostics.push_back(d);
        out.x_rows.push_back(current_x());
    };

    log_row(0);
    long k = 0;
    Vec prev_x = current_x();
    while (k < opts.max_iters) {
        if (general)
            gn = step_general(gn, game, opts.step);
        else
            sp = step_special(sp, game, opts.step);
        ++k;
        if (opts.oracle_ne) {
            Vec diff = current_x();
            for (size_t i = 0; i < diff.size(); ++i) diff[i] -= (*opts.oracle_ne)[i];
            out.dist_series.push_back(norm2(diff));
        }
        double moved = 0.0;
        for (size_t i = 0; i < prev_x.size(); ++i)
            moved = std::max(moved, std::fabs(current_x()[i] - prev_x[i]));
        prev_x = current_x();

        // A non-finite tolerance disables early stopping (run the full horizon).
        const bool stop =
            (opts.stop_tol > 0.0 && std::isfinite(opts.stop_tol) && moved < opts.stop_tol);
        if (k % stride == 0 || k == opts.max_iters || stop) log_row(k);
        if (stop) {
            out.stopped_by_tolerance = true;
            break;
        }
        if (k % 1000 == 0)
            log::debug("iteration " + std::to_string(k) + ", max step " + std::to_string(moved));
    }
    out.iterations = k;
    out.final_x = current_x();
    return out;
}

}  // namespace coalition_nash
