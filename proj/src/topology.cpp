#include "coalition_nash/topology.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

#include "coalition_nash/errors.hpp"

namespace coalition_nash {

namespace {

std::string agent_str(AgentId id) {
    return std::to_string(id.coalition) + std::to_string(id.member);
}

// Connected components by BFS over an integer adjacency restricted to
// [begin, end); returns true when all nodes in the range are reachable.
bool range_connected(const std::vector<std::vector<int>>& adj, int begin, int end) {
    const int n = end - begin;
    if (n <= 1) return true;
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(begin);
    seen[0] = 1;
    int found = 1;
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = begin; v < end; ++v) {
            if (adj[u][v] != 0 && !seen[v - begin]) {
                seen[v - begin] = 1;
                ++found;
                q.push(v);
            }
        }
    }
    return found == n;
}

void verify_invariants(const NetworkTopology& t) {
    // Laplacian rows and columns sum to zero exactly (integer entries).
    for (int i = 0; i < t.n_coalitions; ++i) {
        const DenseMatrix& l = t.laplacians[i];
        for (int r = 0; r < l.rows(); ++r) {
            double row = 0.0, col = 0.0;
            for (int c = 0; c < l.cols(); ++c) {
                row += l.at(r, c);
                col += l.at(c, r);
            }
            if (row != 0.0 || col != 0.0)
                throw std::logic_error("Laplacian row/column sums are not zero");
        }
    }
    // Strict per-agent weight inequality and positive completion constants.
    for (int est = 0; est < t.n_sum; ++est) {
        double row_sum = 0.0, row_max = 0.0;
        for (int tgt = 0; tgt < t.n_sum; ++tgt) {
            const double w = t.weighted_adjacency.at(est, tgt);
            row_sum += w;
            row_max = std::max(row_max, w);
            if ((w > 0.0) != (t.adjacency_int[est][tgt] != 0))
                throw std::logic_error("estimator weight support must equal the edge set");
        }
        if (!(row_sum + row_max < 1.0))
            throw std::logic_error("estimator weight row violates the strict inequality");
        for (int tgt = 0; tgt < t.n_sum; ++tgt)
            if (!(t.wbar.at(est, tgt) > 0.0))
                throw std::logic_error("completion constant must be positive");
    }
    // Mixing matrices: nonnegative, doubly stochastic, support = subgraph + self.
    for (int i = 0; i < t.n_coalitions; ++i) {
        const DenseMatrix& c = t.mixing[i];
        const int ni = t.coalition_sizes[i];
        for (int r = 0; r < ni; ++r) {
            double row = 0.0, col = 0.0;
            for (int k = 0; k < ni; ++k) {
                row += c.at(r, k);
                col += c.at(k, r);
                if (c.at(r, k) < 0.0) throw std::logic_error("mixing entry is negative");
                const bool support = (r == k) || t.sub_adjacency[i].at(r, k) != 0.0;
                if ((c.at(r, k) > 0.0) && !support)
                    throw std::logic_error("mixing support exceeds the subgraph");
            }
            if (std::fabs(row - 1.0) > 1e-15 * ni || std::fabs(col - 1.0) > 1e-15 * ni)
                throw std::logic_error("mixing matrix is not doubly stochastic");
        }
    }
}

}  // namespace

AgentId NetworkTopology::unflat(int flat_index) const {
    const int i = coalition_of(flat_index);
    return AgentId{i + 1, flat_index - offsets[i] + 1};
}

int NetworkTopology::coalition_of(int flat_index) const {
    for (int i = 0; i < n_coalitions; ++i)
        if (flat_index < offsets[i + 1]) return i;
    throw std::out_of_range("flat agent index out of range");
}

NetworkTopology build_topology(const std::vector<int>& coalition_sizes,
                               const std::vector<std::pair<AgentId, AgentId>>& edge_list) {
    if (coalition_sizes.empty()) throw std::invalid_argument("need at least one coalition");
    for (int s : coalition_sizes)
        if (s < 1) throw std::invalid_argument("coalition sizes must be >= 1");

    NetworkTopology t;
    t.coalition_sizes = coalition_sizes;
    t.n_coalitions = static_cast<int>(coalition_sizes.size());
    t.offsets.resize(t.n_coalitions + 1, 0);
    for (int i = 0; i < t.n_coalitions; ++i) t.offsets[i + 1] = t.offsets[i] + coalition_sizes[i];
    t.n_sum = t.offsets.back();

    auto check_agent = [&](AgentId id) {
        if (id.coalition < 1 || id.coalition > t.n_coalitions)
            throw InvalidEdge("edge endpoint " + agent_str(id) + " references coalition " +
                              std::to_string(id.coalition) + " out of range");
        if (id.member < 1 || id.member > coalition_sizes[id.coalition - 1])
            throw InvalidEdge("edge endpoint " + agent_str(id) + " references member " +
                              std::to_string(id.member) + " out of range");
    };

    // Deduplicate and symmetrize silently: {u,v} and {v,u} are the same edge.
    std::set<std::pair<int, int>> edge_set;
    for (const auto& [a, b] : edge_list) {
        check_agent(a);
        check_agent(b);
        const int u = t.flat(a), v = t.flat(b);
        if (u == v) throw InvalidEdge("self-loop on agent " + agent_str(a));
        edge_set.insert({std::min(u, v), std::max(u, v)});
    }
    t.edges.assign(edge_set.begin(), edge_set.end());

    t.adjacency_int.assign(t.n_sum, std::vector<int>(t.n_sum, 0));
    for (const auto& [u, v] : t.edges) t.adjacency_int[u][v] = t.adjacency_int[v][u] = 1;

    if (!range_connected(t.adjacency_int, 0, t.n_sum))
        throw DisconnectedGraph("global communication graph is disconnected");
    for (int i = 0; i < t.n_coalitions; ++i)
        if (!range_connected(t.adjacency_int, t.offsets[i], t.offsets[i + 1]))
            throw DisconnectedGraph("coalition " + std::to_string(i + 1) +
                                    " subgraph is disconnected");

    t.adjacency = DenseMatrix(t.n_sum, t.n_sum);
    for (int r = 0; r < t.n_sum; ++r)
        for (int c = 0; c < t.n_sum; ++c) t.adjacency.at(r, c) = t.adjacency_int[r][c];

    t.neighbors.resize(t.n_sum);
    t.intra_neighbors.resize(t.n_sum);
    for (int u = 0; u < t.n_sum; ++u)
        for (int v = 0; v < t.n_sum; ++v)
            if (t.adjacency_int[u][v] != 0) {
                t.neighbors[u].push_back(v);
                if (t.coalition_of(u) == t.coalition_of(v)) t.intra_neighbors[u].push_back(v);
            }

    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = coalition_sizes[i], base = t.offsets[i];
        DenseMatrix ai(ni, ni), li(ni, ni);
        for (int r = 0; r < ni; ++r) {
            int degree = 0;
            for (int c = 0; c < ni; ++c) {
                const int a = t.adjacency_int[base + r][base + c];
                ai.at(r, c) = a;
                li.at(r, c) = -a;
                degree += a;
            }
            li.at(r, r) = degree;
        }
        t.sub_adjacency.push_back(std::move(ai));
        t.laplacians.push_back(std::move(li));
    }

    // Estimator weights: h = degree + max adjacency entry + 1 (the smallest
    // integer satisfying the strict bound h > degree + max entry).
    t.h_params.resize(t.n_sum);
    t.weighted_adjacency = DenseMatrix(t.n_sum, t.n_sum);
    t.wbar = DenseMatrix(t.n_sum, t.n_sum);
    for (int est = 0; est < t.n_sum; ++est) {
        const int degree = static_cast<int>(t.neighbors[est].size());
        const int max_entry = degree > 0 ? 1 : 0;
        t.h_params[est] = degree + max_entry + 1;
        for (int tgt = 0; tgt < t.n_sum; ++tgt)
            t.weighted_adjacency.at(est, tgt) = t.adjacency_int[est][tgt] / t.h_params[est];
        double row_sum = 0.0;
        for (int tgt = 0; tgt < t.n_sum; ++tgt) row_sum += t.weighted_adjacency.at(est, tgt);
        for (int tgt = 0; tgt < t.n_sum; ++tgt)
            t.wbar.at(est, tgt) = 1.0 - row_sum - t.weighted_adjacency.at(est, tgt);
    }

    // Doubly-stochastic mixing: off-diagonal a/n_i, diagonal 1 - degree/n_i.
    for (int i = 0; i < t.n_coalitions; ++i) {
        const int ni = coalition_sizes[i];
        DenseMatrix ci(ni, ni);
        for (int r = 0; r < ni; ++r) {
            double degree = 0.0;
            for (int c = 0; c < ni; ++c) {
                ci.at(r, c) = t.sub_adjacency[i].at(r, c) / ni;
                degree += t.sub_adjacency[i].at(r, c);
            }
            ci.at(r, r) = 1.0 - degree / ni;
        }
        t.mixing.push_back(std::move(ci));
    }

    verify_invariants(t);
    return t;
}

const DenseMatrix& laplacian(const NetworkTopology& topo, int i) {
    if (i < 1 || i > topo.n_coalitions) throw std::out_of_range("coalition index out of range");
    return topo.laplacians[i - 1];
}

DenseMatrix row_laplacian(const NetworkTopology& topo, int i) {
    const DenseMatrix& l = laplacian(topo, i);
    const int ni = l.rows();
    DenseMatrix breve(ni, ni * ni);
    for (int j = 0; j < ni; ++j)
        for (int c = 0; c < ni; ++c) breve.at(j, j * ni + c) = l.at(j, c);
    return breve;
}

DenseMatrix ConsensusOperator::target_block(int tgt) const {
    const int n = topo->n_sum;
    DenseMatrix b = topo->weighted_adjacency;
    for (int est = 0; est < n; ++est) b.at(est, est) += topo->wbar.at(est, tgt);
    return b;
}

Vec ConsensusOperator::apply(const Vec& e) const {
    const int n = topo->n_sum;
    Vec out(static_cast<size_t>(n) * n, 0.0);
    const DenseMatrix& w = topo->weighted_adjacency;
    for (int est = 0; est < n; ++est) {
        for (int tgt = 0; tgt < n; ++tgt) {
            double acc = topo->wbar.at(est, tgt) * e[static_cast<size_t>(est) * n + tgt];
            for (int nb : topo->neighbors[est])
                acc += w.at(est, nb) * e[static_cast<size_t>(nb) * n + tgt];
            out[static_cast<size_t>(est) * n + tgt] = acc;
        }
    }
    return out;
}

Vec ConsensusOperator::apply_with_leader(const Vec& e, const Vec& x) const {
    const int n = topo->n_sum;
    Vec out = apply(e);
    const DenseMatrix& w = topo->weighted_adjacency;
    for (int est = 0; est < n; ++est)
        for (int nb : topo->neighbors[est]) out[static_cast<size_t>(est) * n + nb] += w.at(est, nb) * x[nb];
    return out;
}

DenseMatrix ConsensusOperator::dense() const {
    const int n = topo->n_sum;
    DenseMatrix m(n * n, n * n);
    const DenseMatrix& w = topo->weighted_adjacency;
    for (int est = 0; est < n; ++est)
        for (int tgt = 0; tgt < n; ++tgt) {
            const int row = est * n + tgt;
            m.at(row, row) += topo->wbar.at(est, tgt);
            for (int nb : topo->neighbors[est]) m.at(row, nb * n + tgt) += w.at(est, nb);
        }
    return m;
}

Vec ConsensusOperator::what_diagonal() const {
    const int n = topo->n_sum;
    Vec d(static_cast<size_t>(n) * n, 0.0);
    for (int est = 0; est < n; ++est)
        for (int tgt = 0; tgt < n; ++tgt)
            d[static_cast<size_t>(est) * n + tgt] = topo->weighted_adjacency.at(est, tgt);
    return d;
}

ConsensusOperator consensus_matrices(const NetworkTopology& topo) { return ConsensusOperator{&topo}; }

}  // namespace coalition_nash
