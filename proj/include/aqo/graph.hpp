#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace aqo {

// Node sets and adjacency rows are 64-bit masks, which caps problem size at
// 64 nodes. That covers the full working range here: enumeration and exact
// spectra stop far below this, and generated instances use n <= 64.
inline constexpr int kMaxNodes = 64;

// Set of node indices packed as a bitmask; bit i means node i is present.
// Bits at or above the owning graph's node count must stay zero.
struct NodeSet {
    uint64_t bits = 0;

    static NodeSet from_indices(std::initializer_list<int> idx) {
        NodeSet s;
        for (int i : idx) s.bits |= uint64_t{1} << i;
        return s;
    }

    bool test(int i) const { return (bits >> i) & 1; }
    void set(int i) { bits |= uint64_t{1} << i; }
    void reset(int i) { bits &= ~(uint64_t{1} << i); }
    void flip(int i) { bits ^= uint64_t{1} << i; }
    int count() const { return std::popcount(bits); }
    bool empty() const { return bits == 0; }

    std::vector<int> indices() const {
        std::vector<int> out;
        uint64_t b = bits;
        while (b) {
            out.push_back(std::countr_zero(b));
            b &= b - 1;
        }
        return out;
    }

    friend bool operator==(NodeSet a, NodeSet b) { return a.bits == b.bits; }
    friend bool operator<(NodeSet a, NodeSet b) { return a.bits < b.bits; }
};

// Simple undirected graph: no self loops, no duplicate edges. Edges are kept
// both as a sorted list (for serialization) and as per-node adjacency masks
// (for O(1) independence tests against a NodeSet).
class Graph {
public:
    explicit Graph(int node_count);

    void add_edge(int i, int j);
    bool has_edge(int i, int j) const;

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    uint64_t neighbors(int i) const { return adj_[i]; }
    int degree(int i) const { return std::popcount(adj_[i]); }

    // Sorted ascending by (i, j) with i < j.
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

private:
    void check_node(int i) const;

    int n_;
    std::vector<uint64_t> adj_;
    std::vector<std::pair<int, int>> edges_;
};

bool is_independent(const Graph& g, NodeSet s);

// Independent and not extendable: every node outside s has a neighbor in s.
bool is_maximal_independent(const Graph& g, NodeSet s);

// All maximal independent sets with at least min_size nodes, in ascending
// bitmask order. Runs Bron-Kerbosch with pivoting on the complement graph;
// node_cap guards against accidental use on graphs too large to enumerate.
std::vector<NodeSet> enumerate_maximal_sets(const Graph& g, int min_size = 0,
                                            int node_cap = 40);

// Depth-first enumeration of independent sets of exactly target_size.
// Nodes are decided in ascending index order and the include branch is
// explored before the exclude branch, so the yield order is deterministic.
//
// The search holds a pointer to the graph and revalidates its decision path
// against the current adjacency on every resume. Callers may therefore add
// edges between next() calls; sets invalidated by new edges are skipped and
// never yielded again (positions already passed are not revisited).
class IndependentSetSearch {
public:
    IndependentSetSearch(const Graph& g, int target_size);

    // Next independent set of target_size in DFS order, or nullopt when the
    // search space is exhausted.
    std::optional<NodeSet> next();

private:
    struct Frame {
        int node;
        bool included;  // current branch at this node
    };

    bool prefix_valid_after_edges();

    const Graph* g_;
    int target_;
    std::vector<Frame> stack_;
    NodeSet chosen_;
    bool exhausted_ = false;
    bool started_ = false;
};

// First independent set of exactly target_size not listed in exclude,
// in the deterministic DFS order above. nullopt when none exists.
std::optional<NodeSet> find_independent_set_dfs(const Graph& g, int target_size,
                                                std::span<const NodeSet> exclude = {});

}  // namespace aqo
