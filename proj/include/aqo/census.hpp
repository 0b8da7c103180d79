#pragma once

#include <map>
#include <vector>

#include "aqo/instance.hpp"

namespace aqo {

// Exhaustive survey of the maximal independent sets (the local minima of the
// cost function). Clusters group equal-size sets that are connected through
// two-bit-flip steps.
struct MinimaCensus {
    std::map<int, int64_t> by_size;
    std::vector<std::vector<NodeSet>> clusters;
    bool mis_unique = false;
    int max_size = 0;
};

// Counts maximal independent sets at the requested sizes (empty = every size)
// and splits each counted size into two-flip connected clusters. mis_unique
// and max_size always describe the full enumeration regardless of the filter.
MinimaCensus census(const ProblemInstance& inst, const std::vector<int>& sizes = {},
                    int node_cap = 40);

}  // namespace aqo
