#include "aqo/census.hpp"

#include <algorithm>

#include "aqo/perturbation.hpp"

namespace aqo {

MinimaCensus census(const ProblemInstance& inst, const std::vector<int>& sizes,
                    int node_cap) {
    const auto all = enumerate_maximal_sets(inst.graph, 0, node_cap);

    MinimaCensus out;
    std::map<int, std::vector<NodeSet>> by_sz;
    for (NodeSet s : all) {
        const int k = s.count();
        by_sz[k].push_back(s);
        out.max_size = std::max(out.max_size, k);
    }
    out.mis_unique =
        out.max_size > 0 && by_sz[out.max_size].size() == 1;

    auto wanted = [&sizes](int k) {
        return sizes.empty() || std::find(sizes.begin(), sizes.end(), k) != sizes.end();
    };
    for (auto& [k, sets] : by_sz) {
        if (!wanted(k)) continue;
        out.by_size[k] = static_cast<int64_t>(sets.size());
        for (const auto& group : two_flip_components(sets)) {
            std::vector<NodeSet> cluster;
            cluster.reserve(group.size());
            for (int idx : group) cluster.push_back(sets[idx]);
            std::sort(cluster.begin(), cluster.end());
            out.clusters.push_back(std::move(cluster));
        }
    }
    return out;
}

}  // namespace aqo
