#pragma once

#include "coalition_nash/matrix.hpp"

namespace coalition_nash {

struct LyapunovSolution {
    DenseMatrix W;         // symmetric positive definite
    double residual_norm;  // max-entry norm of M^T W M - W + I
};

// Solve the discrete Lyapunov equation M^T W M - W = -I for a Schur matrix M
// (spectral radius < 1; the caller guarantees it). Two paths, same equation:
//   - order <= 30: vectorize to (I - M^T (x) M^T) vec(W) = vec(I), dense
//     elimination, then symmetrize W <- (W + W^T)/2;
//   - larger: Neumann series W = sum_k (M^T)^k M^k accumulated with repeated
//     squaring until the partial-product norm drops below 1e-6 (so the
//     truncated tail, (M^T)^K M^K with ||M^K||^2 < 1e-12, is negligible).
// Throws NotSchur when the system is singular or the residual exceeds 1e-8.
LyapunovSolution solve_discrete_lyapunov(const DenseMatrix& m);

// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi
// rotations iterated until the off-diagonal mass is below 1e-12 (scaled by
// max(1, ||S||_F) so the threshold is attainable in double at any magnitude).
// Throws NotSymmetric if S deviates from S^T by more than 1e-10 (same scaling).
std::vector<double> symmetric_eigenvalues(const DenseMatrix& s);

// lambda_2(L^2) = (second-smallest eigenvalue of L)^2 for a connected-subgraph
// Laplacian; eigenvalues below 1e-9 * ||L|| count as zero. Throws
// MultipleZeroEigenvalues when more than one eigenvalue is zero (disconnected
// subgraph) or none is nonzero (trivial single-node subgraph).
double lambda2_of_square(const DenseMatrix& laplacian);

// Largest singular value, via a symmetric eigensolve of M^T M.
double spectral_norm(const DenseMatrix& m);

// Dense Gaussian elimination with partial pivoting; throws SingularSystem.
Vec solve_linear(DenseMatrix a, Vec b);

// Determinant by elimination (test oracle for the eigensolver and the
// characteristic-polynomial checks).
double determinant(DenseMatrix a);

}  // namespace coalition_nash
