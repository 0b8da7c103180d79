#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "aqo/ising.hpp"

namespace aqo {

// Degenerate cluster of local minima and its second-order response to the
// transverse field. For the rescaled operator H_problem + lambda * H_driver,
// the lowest state built on the cluster behaves as
//
//   E(lambda) = e0 + lambda^2 * e2 + O(lambda^4)
//
// where e2 is the smallest eigenvalue of the effective coupling matrix over
// the members and coefficients holds the matching unit eigenvector. Members
// of a connected cluster always mix with strictly positive weights.
struct ClusterState {
    struct PairPaths {
        int a = 0;
        int b = 0;
        std::vector<std::pair<int, int>> paths;  // ordered flips (first, second)
    };

    std::vector<NodeSet> members;  // equal-size maximal independent sets, ascending
    double e0 = 0.0;
    std::vector<double> coefficients;
    double e2 = 0.0;
    std::vector<PairPaths> adjacency;

    int size() const { return static_cast<int>(members.size()); }
};

// Ordered two-flip routes (i then j) taking configuration a to b. Identical
// endpoints produce the n return routes (i, i); Hamming distance two
// produces both orderings of the differing bits; anything else is empty.
std::vector<std::pair<int, int>> two_flip_paths(const TransverseFieldModel& m,
                                                NodeSet a, NodeSet b);

// Connected components of the given states under "Hamming distance exactly
// two" adjacency. Returns index groups, each sorted, ordered by smallest
// member.
std::vector<std::vector<int>> two_flip_components(const std::vector<NodeSet>& states);

// Splits strict local minima into equal-energy groups and each group into
// two-flip connected components. Every input must descend to itself (all
// flip costs positive), otherwise the call is rejected.
std::vector<std::vector<NodeSet>> find_clusters(const TransverseFieldModel& m,
                                                const std::vector<NodeSet>& minima);

// K x K symmetric matrix with entries
//   A(k, l) = - sum over routes (i, j) from member k to member l of
//             delta_i * delta_j / flip_cost(member_k, i)
// including the diagonal return routes. Flip costs must be positive, which
// holds exactly when the members are strict local minima.
Eigen::MatrixXd effective_matrix(const TransverseFieldModel& m,
                                 const std::vector<NodeSet>& members);

ClusterState cluster_state(const TransverseFieldModel& m,
                           const std::vector<NodeSet>& members);

// Driver expectation in the cluster ground combination. Equal-size members
// are never one flip apart, so this is exactly zero; computed explicitly as
// a consistency check. Mixed member sizes are an input error.
double first_order_correction(const TransverseFieldModel& m, const ClusterState& cluster);

struct CrossingPrediction {
    std::optional<double> lambda_star;
    bool condition_met = false;
    bool outside_perturbative_regime = false;
};

// Where the local cluster's level would dip below the global one:
//   lambda* = sqrt((local.e0 - global.e0) / (global.e2 - local.e2))
// defined when the local curvature is the more negative one (condition_met).
// Requires global.e0 < local.e0. lambda* > 1 is flagged as outside the
// perturbative regime rather than rejected.
CrossingPrediction predict_crossing(const ClusterState& global_cluster,
                                    const ClusterState& local_cluster);

nlohmann::json analysis_report(const std::vector<ClusterState>& clusters,
                               const std::vector<CrossingPrediction>& predictions);

}  // namespace aqo
