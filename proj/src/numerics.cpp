#include "coalition_nash/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coalition_nash/errors.hpp"

namespace coalition_nash {

namespace {

// Off-diagonal mass sqrt(sum_{i != j} s_ij^2).
double off_diagonal_mass(const DenseMatrix& s) {
    double acc = 0.0;
    for (int i = 0; i < s.rows(); ++i)
        for (int j = 0; j < s.cols(); ++j)
            if (i != j) acc += s.at(i, j) * s.at(i, j);
    return std::sqrt(acc);
}

// Cholesky feasibility: succeeds iff the symmetric input is positive definite.
bool is_positive_definite(const DenseMatrix& s) {
    const int n = s.rows();
    DenseMatrix l(n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = s.at(i, j);
            for (int k = 0; k < j; ++k) acc -= l.at(i, k) * l.at(j, k);
            if (i == j) {
                if (!(acc > 0.0)) return false;
                l.at(i, i) = std::sqrt(acc);
            } else {
                l.at(i, j) = acc / l.at(j, j);
            }
        }
    }
    return true;
}

LyapunovSolution lyapunov_by_elimination(const DenseMatrix& m) {
    const int n = m.rows();
    const int nn = n * n;
    // Entry (i,j) of W - M^T W M = I reads
    //   W[i][j] - sum_{p,q} M[p][i] M[q][j] W[p][q] = delta_ij.
    DenseMatrix k(nn, nn);
    Vec rhs(nn, 0.0);
    auto flat = [n](int r, int c) { return r * n + c; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int row = flat(i, j);
            k.at(row, row) += 1.0;
            for (int p = 0; p < n; ++p) {
                const double mpi = m.at(p, i);
                if (mpi == 0.0) continue;
                for (int q = 0; q < n; ++q) k.at(row, flat(p, q)) -= mpi * m.at(q, j);
            }
            if (i == j) rhs[row] = 1.0;
        }
    }
    Vec w_flat;
    try {
        w_flat = solve_linear(std::move(k), std::move(rhs));
    } catch (const SingularSystem&) {
        throw NotSchur("discrete Lyapunov system is singular; matrix is not Schur");
    }
    DenseMatrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w.at(i, j) = 0.5 * (w_flat[flat(i, j)] + w_flat[flat(j, i)]);
    // The Stein equation has a positive definite solution iff the matrix is
    // Schur; an indefinite W means the input had spectral radius >= 1 even
    // though the linear system happened to be solvable.
    if (!is_positive_definite(w))
        throw NotSchur("Lyapunov solution is not positive definite; matrix is not Schur");
    return {std::move(w), 0.0};
}

LyapunovSolution lyapunov_by_neumann(const DenseMatrix& m) {
    const int n = m.rows();
    // Repeated squaring: after s rounds w = sum_{k=0}^{2^s - 1} (M^T)^k M^k and
    // p = M^(2^s), so the defining-equation residual is exactly p^T p.
    DenseMatrix w = DenseMatrix::identity(n);
    DenseMatrix p = m;
    for (int round = 0; round < 64; ++round) {
        const double pf = frobenius_norm(p);
        if (pf * pf < 1e-12) break;
        if (!p.all_finite() || pf > 1e12)
            throw NotSchur("Neumann series for the Lyapunov solution diverges; matrix is not Schur");
        w = add(w, matmul(transpose(p), matmul(w, p)));
        p = matmul(p, p);
    }
    // Symmetrize away accumulation asymmetry.
    DenseMatrix sym(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sym.at(i, j) = 0.5 * (w.at(i, j) + w.at(j, i));
    return {std::move(sym), 0.0};
}

}  // namespace

LyapunovSolution solve_discrete_lyapunov(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw NotSchur("Lyapunov equation needs a square matrix");
    LyapunovSolution sol = m.rows() <= 30 ? lyapunov_by_elimination(m) : lyapunov_by_neumann(m);
    const DenseMatrix mt = transpose(m);
    DenseMatrix residual = add(subtract(matmul(mt, matmul(sol.W, m)), sol.W), DenseMatrix::identity(m.rows()));
    sol.residual_norm = max_abs(residual);
    if (!(sol.residual_norm < 1e-8))
        throw NotSchur("Lyapunov residual " + std::to_string(sol.residual_norm) +
                       " exceeds 1e-8; matrix is not Schur");
    return sol;
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& s) {
    if (s.rows() != s.cols()) throw NotSymmetric("matrix is not square");
    const int n = s.rows();
    const double scale = std::max(1.0, frobenius_norm(s));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::fabs(s.at(i, j) - s.at(j, i)) > 1e-10 * scale)
                throw NotSymmetric("matrix deviates from its transpose beyond tolerance");

    DenseMatrix a = s;
    // Exact symmetry keeps the rotations clean.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a.at(i, j) + a.at(j, i));
            a.at(i, j) = a.at(j, i) = v;
        }

    const double tol = 1e-12 * scale;
    for (int sweep = 0; sweep < 100 && off_diagonal_mass(a) > tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - sn * akq;
                    a.at(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - sn * aqk;
                    a.at(q, k) = sn * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = a.at(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

double lambda2_of_square(const DenseMatrix& laplacian) {
    const std::vector<double> eigs = symmetric_eigenvalues(laplacian);
    double lmax = 0.0;
    for (double e : eigs) lmax = std::max(lmax, std::fabs(e));
    const double zero_tol = 1e-9 * lmax;
    int zeros = 0;
    double second = -1.0;
    for (double e : eigs) {
        if (std::fabs(e) <= zero_tol) {
            ++zeros;
        } else if (second < 0.0) {
            second = e;
        }
    }
    if (zeros > 1)
        throw MultipleZeroEigenvalues("Laplacian has " + std::to_string(zeros) +
                                      " zero eigenvalues; subgraph is disconnected");
    if (second < 0.0)
        throw MultipleZeroEigenvalues("Laplacian has no nonzero eigenvalue (single-node subgraph)");
    return second * second;
}

double spectral_norm(const DenseMatrix& m) {
    const DenseMatrix gram = matmul(transpose(m), m);
    const std::vector<double> eigs = symmetric_eigenvalues(gram);
    const double top = eigs.empty() ? 0.0 : std::max(0.0, eigs.back());
    return std::sqrt(top);
}

Vec solve_linear(DenseMatrix a, Vec b) {
    const int n = a.rows();
    if (a.cols() != n || static_cast<int>(b.size()) != n)
        throw SingularSystem("solve_linear needs a square system");
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        if (std::fabs(a.at(pivot, col)) < 1e-300)
            throw SingularSystem("singular linear system (zero pivot in column " +
                                 std::to_string(col) + ")");
        if (pivot != col) {
            for (int c = col; c < n; ++c) std::swap(a.at(pivot, c), a.at(col, c));
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) * inv;
            if (f == 0.0) continue;
            a.at(r, col) = 0.0;
            for (int c = col + 1; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
            b[r] -= f * b[col];
        }
    }
    Vec x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a.at(r, c) * x[c];
        x[r] = acc / a.at(r, r);
    }
    return x;
}

double determinant(DenseMatrix a) {
    const int n = a.rows();
    if (a.cols() != n) throw SingularSystem("determinant needs a square matrix");
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a.at(r, col)) > std::fabs(a.at(pivot, col))) pivot = r;
        if (a.at(pivot, col) == 0.0) return 0.0;
        if (pivot != col) {
            for (int c = col; c < n; ++c) std::swap(a.at(pivot, c), a.at(col, c));
            det = -det;
        }
        det *= a.at(col, col);
        const double inv = 1.0 / a.at(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a.at(r, c) -= f * a.at(col, c);
        }
    }
    return det;
}

}  // namespace coalition_nash
