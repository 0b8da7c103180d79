#pragma once

// Brute-force reference implementations used only by tests. Everything here
// is deliberately independent of the library's algorithms: straight scans
// over all 2^n states and dense matrix assembly, so library results can be
// checked against an implementation with nothing in common beyond the
// definitions.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "aqo/graph.hpp"
#include "aqo/instance.hpp"
#include "aqo/ising.hpp"

namespace aqo::testsupport {

inline bool brute_is_independent(const Graph& g, uint64_t bits) {
    for (auto [i, j] : g.edges())
        if (((bits >> i) & 1) && ((bits >> j) & 1)) return false;
    return true;
}

inline std::vector<NodeSet> brute_maximal_sets(const Graph& g) {
    const int n = g.node_count();
    std::vector<NodeSet> out;
    for (uint64_t b = 0; b < (uint64_t{1} << n); ++b) {
        if (!brute_is_independent(g, b)) continue;
        bool maximal = true;
        for (int v = 0; v < n && maximal; ++v)
            if (!((b >> v) & 1) && brute_is_independent(g, b | (uint64_t{1} << v)))
                maximal = false;
        if (maximal) out.push_back(NodeSet{b});
    }
    return out;  // ascending by construction
}

inline double brute_cost(const ProblemInstance& inst, uint64_t bits) {
    double e = -static_cast<double>(std::popcount(bits));
    for (auto [i, j] : inst.graph.edges())
        if (((bits >> i) & 1) && ((bits >> j) & 1)) e += inst.c;
    return e;
}

// Dense a * H_driver + b * H_problem over the full 2^n basis. Basis state x
// has sigma^z_i = +1 where bit i of x is set.
inline Eigen::MatrixXd dense_hamiltonian(const TransverseFieldModel& m, double a,
                                         double b) {
    const int dim = 1 << m.n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int x = 0; x < dim; ++x) {
        h(x, x) = b * diagonal_energy(m, NodeSet{static_cast<uint64_t>(x)});
        for (int i = 0; i < m.n; ++i) h(x ^ (1 << i), x) += a * -m.delta[i];
    }
    return h;
}

inline Eigen::VectorXd dense_eigenvalues(const Eigen::MatrixXd& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    return es.eigenvalues();
}

}  // namespace aqo::testsupport
