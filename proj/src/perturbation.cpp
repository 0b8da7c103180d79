#include "aqo/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

#include "aqo/errors.hpp"

namespace aqo {

std::vector<std::pair<int, int>> two_flip_paths(const TransverseFieldModel& m,
                                                NodeSet a, NodeSet b) {
    std::vector<std::pair<int, int>> out;
    const uint64_t diff = a.bits ^ b.bits;
    const int dist = std::popcount(diff);
    if (dist == 0) {
        for (int i = 0; i < m.n; ++i) out.emplace_back(i, i);
    } else if (dist == 2) {
        const int p = std::countr_zero(diff);
        const int q = std::countr_zero(diff & (diff - 1));
        out.emplace_back(p, q);
        out.emplace_back(q, p);
    }
    return out;
}

std::vector<std::vector<int>> two_flip_components(const std::vector<NodeSet>& states) {
    const int k = static_cast<int>(states.size());
    std::vector<int> parent(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (std::popcount(states[i].bits ^ states[j].bits) == 2)
                parent[find(i)] = find(j);

    std::vector<std::vector<int>> groups;
    std::vector<int> root_to_group(static_cast<size_t>(k), -1);
    for (int i = 0; i < k; ++i) {
        const int r = find(i);
        if (root_to_group[r] < 0) {
            root_to_group[r] = static_cast<int>(groups.size());
            groups.emplace_back();
        }
        groups[root_to_group[r]].push_back(i);
    }
    std::sort(groups.begin(), groups.end(),
              [&states](const std::vector<int>& a, const std::vector<int>& b) {
                  return states[a.front()].bits < states[b.front()].bits;
              });
    return groups;
}

namespace {

void require_strict_minimum(const TransverseFieldModel& m, NodeSet s) {
    for (int i = 0; i < m.n; ++i)
        if (!(flip_cost(m, s, i) > 0.0))
            throw InputError("cluster members must be strict local minima");
}

}  // namespace

std::vector<std::vector<NodeSet>> find_clusters(const TransverseFieldModel& m,
                                                const std::vector<NodeSet>& minima) {
    for (NodeSet s : minima) require_strict_minimum(m, s);

    // Group by energy first; two-flip neighbours at different energies are
    // not degenerate and must not merge.
    std::vector<std::pair<double, NodeSet>> keyed;
    keyed.reserve(minima.size());
    for (NodeSet s : minima) keyed.emplace_back(diagonal_energy(m, s), s);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.bits < b.second.bits;
    });

    std::vector<std::vector<NodeSet>> clusters;
    size_t lo = 0;
    while (lo < keyed.size()) {
        size_t hi = lo + 1;
        while (hi < keyed.size() && std::abs(keyed[hi].first - keyed[lo].first) < 1e-9) ++hi;
        std::vector<NodeSet> level;
        for (size_t i = lo; i < hi; ++i) level.push_back(keyed[i].second);
        for (const auto& group : two_flip_components(level)) {
            std::vector<NodeSet> cluster;
            for (int idx : group) cluster.push_back(level[idx]);
            std::sort(cluster.begin(), cluster.end());
            clusters.push_back(std::move(cluster));
        }
        lo = hi;
    }
    return clusters;
}

Eigen::MatrixXd effective_matrix(const TransverseFieldModel& m,
                                 const std::vector<NodeSet>& members) {
    const int k = static_cast<int>(members.size());
    if (k == 0) throw InputError("effective_matrix: empty cluster");

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
    for (int row = 0; row < k; ++row) {
        for (int col = 0; col < k; ++col) {
            double sum = 0.0;
            for (auto [i, j] : two_flip_paths(m, members[row], members[col])) {
                const double b = flip_cost(m, members[row], i);
                if (!(b > 0.0))
                    throw NumericalError(
                        "effective_matrix: nonpositive flip cost; member is not a "
                        "strict local minimum",
                        {b});
                sum -= m.delta[i] * m.delta[j] / b;
            }
            a(row, col) = sum;
        }
    }
    return a;
}

ClusterState cluster_state(const TransverseFieldModel& m,
                           const std::vector<NodeSet>& members) {
    if (members.empty()) throw InputError("cluster_state: empty cluster");
    const int sz = members.front().count();
    for (NodeSet s : members)
        if (s.count() != sz)
            throw InputError("cluster_state: members must share one size");

    ClusterState cs;
    cs.members = members;
    std::sort(cs.members.begin(), cs.members.end());
    cs.e0 = diagonal_energy(m, cs.members.front());

    const Eigen::MatrixXd a = effective_matrix(m, cs.members);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd& vals = es.eigenvalues();
    cs.e2 = vals(0);

    const int k = cs.size();
    Eigen::VectorXd c = es.eigenvectors().col(0);
    // Exactly degenerate lowest eigenvalue: any combination in the eigenspace
    // is admissible; take the uniform-weight projection so the result is
    // deterministic and symmetric under member relabeling.
    const double scale = std::max(1.0, std::abs(vals(0)));
    int deg = 1;
    while (deg < k && vals(deg) - vals(0) < 1e-12 * scale) ++deg;
    if (deg > 1) {
        Eigen::VectorXd uniform = Eigen::VectorXd::Constant(k, 1.0);
        Eigen::VectorXd proj = Eigen::VectorXd::Zero(k);
        for (int d = 0; d < deg; ++d)
            proj += es.eigenvectors().col(d).dot(uniform) * es.eigenvectors().col(d);
        if (proj.norm() > 1e-12) c = proj;
    }

    int imax = 0;
    c.cwiseAbs().maxCoeff(&imax);
    if (c(imax) < 0.0) c = -c;
    c.normalize();
    if (c.minCoeff() < -1e-8)
        throw InputError(
            "cluster_state: ground combination has mixed signs; members do not "
            "form one connected cluster");

    const double check = c.dot(a * c);
    if (std::abs(check - cs.e2) > 1e-10)
        throw NumericalError("cluster_state: quadratic form mismatch",
                             {std::abs(check - cs.e2)});

    cs.coefficients.assign(c.data(), c.data() + k);

    for (int row = 0; row < k; ++row) {
        for (int col = row + 1; col < k; ++col) {
            auto paths = two_flip_paths(m, cs.members[row], cs.members[col]);
            if (!paths.empty())
                cs.adjacency.push_back({row, col, std::move(paths)});
        }
    }
    return cs;
}

double first_order_correction(const TransverseFieldModel& m, const ClusterState& cluster) {
    if (cluster.members.empty()) throw InputError("first_order_correction: empty cluster");
    const int sz = cluster.members.front().count();
    for (NodeSet s : cluster.members)
        if (s.count() != sz)
            throw InputError("first_order_correction: members must share one size");
    if (cluster.coefficients.size() != cluster.members.size())
        throw InputError("first_order_correction: cluster has no coefficients");

    // <a| H_driver |b> = -delta_i when b is a single flip of a; accumulate
    // over all member pairs. Equal sizes make every term vanish, so the sum
    // stays exactly zero by construction.
    double sum = 0.0;
    for (size_t p = 0; p < cluster.members.size(); ++p) {
        for (size_t q = 0; q < cluster.members.size(); ++q) {
            const uint64_t diff = cluster.members[p].bits ^ cluster.members[q].bits;
            if (std::popcount(diff) != 1) continue;
            const int i = std::countr_zero(diff);
            sum -= cluster.coefficients[p] * cluster.coefficients[q] * m.delta[i];
        }
    }
    return sum;
}

CrossingPrediction predict_crossing(const ClusterState& global_cluster,
                                    const ClusterState& local_cluster) {
    if (!(global_cluster.e0 < local_cluster.e0))
        throw InputError("predict_crossing: global cluster must lie strictly below");

    CrossingPrediction p;
    p.condition_met = local_cluster.e2 < global_cluster.e2;
    if (!p.condition_met) return p;
    const double lam = std::sqrt((local_cluster.e0 - global_cluster.e0) /
                                 (global_cluster.e2 - local_cluster.e2));
    p.lambda_star = lam;
    p.outside_perturbative_regime = lam > 1.0;
    return p;
}

nlohmann::json analysis_report(const std::vector<ClusterState>& clusters,
                               const std::vector<CrossingPrediction>& predictions) {
    nlohmann::json j;
    j["version"] = 1;
    j["clusters"] = nlohmann::json::array();
    for (const auto& c : clusters) {
        nlohmann::json jc;
        jc["size"] = c.members.empty() ? 0 : c.members.front().count();
        jc["K"] = c.size();
        jc["e0"] = c.e0;
        jc["e2"] = c.e2;
        jc["coefficients"] = c.coefficients;
        j["clusters"].push_back(std::move(jc));
    }
    j["predictions"] = nlohmann::json::array();
    for (const auto& p : predictions) {
        nlohmann::json jp;
        if (p.lambda_star)
            jp["lambda_star"] = *p.lambda_star;
        else
            jp["lambda_star"] = nullptr;
        jp["condition_met"] = p.condition_met;
        auto flags = nlohmann::json::array();
        if (p.outside_perturbative_regime) flags.push_back("outside_perturbative_regime");
        jp["flags"] = std::move(flags);
        j["predictions"].push_back(std::move(jp));
    }
    return j;
}

}  // namespace aqo
