#pragma once

#include <utility>
#include <vector>

#include "coalition_nash/matrix.hpp"

namespace coalition_nash {

// 1-based coalition/member pair; flattening is the bijection
// flat = sum of earlier coalition sizes + (member - 1).
struct AgentId {
    int coalition = 0;
    int member = 0;
    friend bool operator==(const AgentId&, const AgentId&) = default;
    friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

// Immutable communication structure: the global undirected graph, its
// per-coalition subgraphs, and every derived matrix the algorithms consume.
struct NetworkTopology {
    std::vector<int> coalition_sizes;
    std::vector<int> offsets;  // offsets[i] = first flat index of coalition i (0-based), plus sentinel
    int n_coalitions = 0;
    int n_sum = 0;

    // Deduplicated, symmetrized edge set as flat index pairs (u < v).
    std::vector<std::pair<int, int>> edges;

    // Adjacency as exact integers (source of truth) and as floats (for algebra).
    std::vector<std::vector<int>> adjacency_int;
    DenseMatrix adjacency;
    std::vector<DenseMatrix> sub_adjacency;  // A_i, diagonal blocks of A
    std::vector<DenseMatrix> laplacians;     // L_i

    // Estimator weights: W[est][tgt] = a_est,tgt / h_est and the completion
    // constants wbar[est][tgt] = 1 - (row sum of W at est) - W[est][tgt].
    DenseMatrix weighted_adjacency;  // W
    DenseMatrix wbar;
    std::vector<double> h_params;  // per-agent h = degree + (max adjacency entry) + 1

    std::vector<DenseMatrix> mixing;  // doubly-stochastic C_i per coalition

    std::vector<std::vector<int>> neighbors;        // flat neighbor lists
    std::vector<std::vector<int>> intra_neighbors;  // neighbors inside own coalition

    int flat(AgentId id) const { return offsets[id.coalition - 1] + id.member - 1; }
    AgentId unflat(int flat_index) const;
    int coalition_of(int flat_index) const;  // 0-based coalition index
};

// Validates agent references, deduplicates/symmetrizes edges, builds all
// derived matrices, and verifies the structural invariants (connectivity of
// the global graph and of every coalition subgraph, Laplacian row sums,
// strict estimator-weight inequalities, doubly-stochastic mixing).
// Throws InvalidEdge / DisconnectedGraph.
NetworkTopology build_topology(const std::vector<int>& coalition_sizes,
                               const std::vector<std::pair<AgentId, AgentId>>& edge_list);

// Coalition Laplacian L_i (i is 1-based). Throws std::out_of_range.
const DenseMatrix& laplacian(const NetworkTopology& topo, int i);

// Row-diagonal form of L_i: the n_i x n_i^2 matrix with row j carrying row j
// of L_i in its j-th block, so that row_laplacian * (1 (x) v) = L_i * v.
DenseMatrix row_laplacian(const NetworkTopology& topo, int i);

// The estimation mixing operator. The full matrix
//   M = W (x) I + diag(wbar)
// acts on estimator-major stacked estimates e[est*n_sum + tgt] and never mixes
// target columns, so it is block-diagonal per target under a permutation:
//   (M e)[., t] = B_t e[., t],   B_t = W + diag(wbar[., t]).
// The identity (W (x) I + diag(wbar) + diag(what)) (1 (x) x) = 1 (x) x holds by
// construction (what[est,tgt] = W[est][tgt] is the leader-injection weight).
struct ConsensusOperator {
    const NetworkTopology* topo = nullptr;

    int dim() const { return topo->n_sum * topo->n_sum; }
    // Per-target mixing block B_t (n_sum x n_sum).
    DenseMatrix target_block(int tgt) const;
    // y = M e for an estimator-major stacked vector e of length n_sum^2.
    Vec apply(const Vec& e) const;
    // y = M e + what . (1 (x) x): one synchronous estimate update toward the
    // replicated leader state x.
    Vec apply_with_leader(const Vec& e, const Vec& x) const;
    // Materialized M (test oracle only; n_sum^2 x n_sum^2).
    DenseMatrix dense() const;
    // Diagonal of what as an estimator-major flat vector.
    Vec what_diagonal() const;
};

ConsensusOperator consensus_matrices(const NetworkTopology& topo);

}  // namespace coalition_nash
