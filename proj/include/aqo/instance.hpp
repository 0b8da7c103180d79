#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "aqo/graph.hpp"

#include "json.hpp"

namespace aqo {

struct GeneratorParams {
    int n = 0;
    int e_initial = 0;
    int m = 0;
};

// An independent-set optimization instance. The objective being minimized is
//   cost(x) = -(number of selected nodes) + c * (edges inside the selection)
// so with penalty weight c > 1 the local minima are exactly the maximal
// independent sets and the global minima are the maximum independent sets.
struct ProblemInstance {
    Graph graph;
    double c = 2.0;
    std::optional<NodeSet> known_mis;
    uint64_t seed = 0;
    std::optional<GeneratorParams> generator_params;

    explicit ProblemInstance(Graph g, double c = 2.0) : graph(std::move(g)), c(c) {
        validate();
    }

    void validate() const;
};

double cost(const ProblemInstance& inst, NodeSet s);

nlohmann::json to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j);
void save_instance(const ProblemInstance& inst, const std::string& path);
ProblemInstance load_instance(const std::string& path);

struct GenerateOptions {
    double c = 2.0;
    // Internal restarts when edge completion around a reduced set dead-ends.
    int max_attempts = 32;
    // Wall-clock budget for the whole call; 0 disables the check.
    double time_budget_s = 0.0;
};

enum class GenerateStatus {
    ok,
    no_seed_set,         // the random graph has no independent set of size m
    dead_end_exhausted,  // every attempt hit an uncompletable reduction step
    time_budget_exceeded,
};

struct GenerateOutcome {
    GenerateStatus status = GenerateStatus::ok;
    std::optional<ProblemInstance> instance;
    int attempts = 0;

    explicit operator bool() const { return instance.has_value(); }
};

// Builds an instance whose unique maximum independent set is planted and
// whose lower-lying maximal sets form degenerate clusters:
//   1. draw a random graph with n nodes and e_initial distinct edges;
//   2. depth-first search for an independent set M of size m;
//   3. attach every outside node that misses M to one random member, making
//      M maximal;
//   4. resume the search; each further size-m set found loses one random
//      node, preferring nodes outside M (a member of M is dropped only when
//      the found set is a one-node swap of M, so the reduction never leaves
//      a subset of M);
//   5. the reduced set is made maximal the same way, choosing attachment
//      targets outside M for members of M so M stays independent;
//   6. repeat until the search exhausts, leaving M as the unique MIS.
// All randomness comes from the given seed; identical arguments reproduce
// identical instances byte for byte.
GenerateOutcome generate_hard_instance(int n, int e_initial, int m, uint64_t seed,
                                       const GenerateOptions& opt = {});

}  // namespace aqo
