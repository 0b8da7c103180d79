#include "aqo/graph.hpp"

#include <algorithm>

#include "aqo/errors.hpp"

namespace aqo {

Graph::Graph(int node_count) : n_(node_count) {
    if (node_count < 1 || node_count > kMaxNodes)
        throw InputError("Graph: node count must be in [1, 64], got " +
                         std::to_string(node_count));
    adj_.assign(static_cast<size_t>(n_), 0);
}

void Graph::check_node(int i) const {
    if (i < 0 || i >= n_)
        throw InputError("Graph: node index " + std::to_string(i) + " out of range");
}

void Graph::add_edge(int i, int j) {
    check_node(i);
    check_node(j);
    if (i == j) throw InputError("Graph: self loops are not allowed");
    if (i > j) std::swap(i, j);
    if (has_edge(i, j)) return;
    adj_[i] |= uint64_t{1} << j;
    adj_[j] |= uint64_t{1} << i;
    auto e = std::make_pair(i, j);
    edges_.insert(std::upper_bound(edges_.begin(), edges_.end(), e), e);
}

bool Graph::has_edge(int i, int j) const {
    check_node(i);
    check_node(j);
    return (adj_[i] >> j) & 1;
}

namespace {

void check_set(const Graph& g, NodeSet s) {
    if (g.node_count() < kMaxNodes && (s.bits >> g.node_count()) != 0)
        throw InputError("NodeSet has bits set beyond the graph's node count");
}

}  // namespace

bool is_independent(const Graph& g, NodeSet s) {
    check_set(g, s);
    uint64_t b = s.bits;
    while (b) {
        int i = std::countr_zero(b);
        b &= b - 1;
        // Only check against remaining members; each edge is seen once.
        if (g.neighbors(i) & b) return false;
    }
    return true;
}

bool is_maximal_independent(const Graph& g, NodeSet s) {
    if (!is_independent(g, s)) return false;
    for (int v = 0; v < g.node_count(); ++v) {
        if (s.test(v)) continue;
        if ((g.neighbors(v) & s.bits) == 0) return false;
    }
    return true;
}

namespace {

// Bron-Kerbosch with pivoting over the complement graph: maximal cliques of
// the complement are exactly the maximal independent sets of g.
void bron_kerbosch(uint64_t r, uint64_t p, uint64_t x,
                   const std::vector<uint64_t>& cadj, std::vector<NodeSet>& out) {
    if (p == 0 && x == 0) {
        out.push_back(NodeSet{r});
        return;
    }
    // Pivot on the candidate covering most of p to prune sibling branches.
    uint64_t px = p | x;
    int pivot = -1;
    int best = -1;
    for (uint64_t b = px; b;) {
        int u = std::countr_zero(b);
        b &= b - 1;
        int c = std::popcount(p & cadj[u]);
        if (c > best) {
            best = c;
            pivot = u;
        }
    }
    uint64_t candidates = p & ~cadj[pivot];
    for (uint64_t b = candidates; b;) {
        int v = std::countr_zero(b);
        b &= b - 1;
        uint64_t vb = uint64_t{1} << v;
        bron_kerbosch(r | vb, p & cadj[v], x & cadj[v], cadj, out);
        p &= ~vb;
        x |= vb;
    }
}

}  // namespace

std::vector<NodeSet> enumerate_maximal_sets(const Graph& g, int min_size, int node_cap) {
    if (g.node_count() > node_cap)
        throw CapError("enumerate_maximal_sets: graph has " +
                       std::to_string(g.node_count()) + " nodes, cap is " +
                       std::to_string(node_cap));
    const int n = g.node_count();
    const uint64_t full = (n == kMaxNodes) ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
    std::vector<uint64_t> cadj(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        cadj[i] = full & ~g.neighbors(i) & ~(uint64_t{1} << i);

    std::vector<NodeSet> out;
    bron_kerbosch(0, full, 0, cadj, out);
    std::erase_if(out, [min_size](NodeSet s) { return s.count() < min_size; });
    std::sort(out.begin(), out.end());
    return out;
}

IndependentSetSearch::IndependentSetSearch(const Graph& g, int target_size)
    : g_(&g), target_(target_size) {
    if (target_size < 0 || target_size > g.node_count())
        throw InputError("IndependentSetSearch: target size out of range");
}

// Trims the decision path if edges added since the last yield made two
// included nodes adjacent. The conflicting include flips to its unexplored
// exclude branch; everything deeper is discarded. Sets skipped this way all
// contain the conflicting pair, so none of them is independent anymore.
bool IndependentSetSearch::prefix_valid_after_edges() {
    NodeSet acc;
    size_t bad = stack_.size();
    for (size_t k = 0; k < stack_.size(); ++k) {
        if (!stack_[k].included) continue;
        if (g_->neighbors(stack_[k].node) & acc.bits) {
            bad = k;
            break;
        }
        acc.set(stack_[k].node);
    }
    if (bad == stack_.size()) return true;
    while (stack_.size() > bad + 1) {
        if (stack_.back().included) chosen_.reset(stack_.back().node);
        stack_.pop_back();
    }
    chosen_.reset(stack_[bad].node);
    stack_[bad].included = false;
    return false;
}

std::optional<NodeSet> IndependentSetSearch::next() {
    if (exhausted_) return std::nullopt;
    const int n = g_->node_count();

    // Flips the deepest include decision to exclude, popping exhausted
    // frames. Returns false when the whole tree has been explored.
    auto advance = [this]() {
        while (!stack_.empty()) {
            Frame f = stack_.back();
            stack_.pop_back();
            if (f.included) {
                chosen_.reset(f.node);
                stack_.push_back({f.node, false});
                return true;
            }
        }
        return false;
    };

    if (started_) {
        // Resuming from the previously yielded leaf. If revalidation trimmed
        // the path, the flipped branch is itself unexplored; otherwise step
        // past the leaf.
        if (prefix_valid_after_edges() && !advance()) {
            exhausted_ = true;
            return std::nullopt;
        }
    } else {
        started_ = true;
    }

    while (true) {
        const int depth = static_cast<int>(stack_.size());
        const int have = chosen_.count();
        if (have == target_) {
            if (is_independent(*g_, chosen_)) return chosen_;
            if (!advance()) break;
            continue;
        }
        if (depth >= n || have + (n - depth) < target_) {
            if (!advance()) break;
            continue;
        }
        if ((g_->neighbors(depth) & chosen_.bits) == 0) {
            stack_.push_back({depth, true});
            chosen_.set(depth);
        } else {
            stack_.push_back({depth, false});
        }
    }
    exhausted_ = true;
    return std::nullopt;
}

std::optional<NodeSet> find_independent_set_dfs(const Graph& g, int target_size,
                                                std::span<const NodeSet> exclude) {
    IndependentSetSearch search(g, target_size);
    while (auto s = search.next()) {
        bool skip = false;
        for (NodeSet e : exclude) {
            if (e == *s) {
                skip = true;
                break;
            }
        }
        if (!skip) return s;
    }
    return std::nullopt;
}

}  // namespace aqo
