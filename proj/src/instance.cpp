#include "aqo/instance.hpp"

#include <chrono>

#include "aqo/errors.hpp"
#include "aqo/io.hpp"
#include "aqo/rng.hpp"

namespace aqo {

void ProblemInstance::validate() const {
    if (!(c > 1.0))
        throw InputError("ProblemInstance: penalty weight c must exceed 1, got " +
                         std::to_string(c));
    if (known_mis && graph.node_count() < kMaxNodes &&
        (known_mis->bits >> graph.node_count()) != 0)
        throw InputError("ProblemInstance: known_mis has bits beyond node count");
}

double cost(const ProblemInstance& inst, NodeSet s) {
    if (inst.graph.node_count() < kMaxNodes && (s.bits >> inst.graph.node_count()) != 0)
        throw InputError("cost: NodeSet has bits beyond the instance's node count");
    int internal = 0;
    uint64_t b = s.bits;
    while (b) {
        int i = std::countr_zero(b);
        b &= b - 1;
        internal += std::popcount(inst.graph.neighbors(i) & b);
    }
    return -static_cast<double>(s.count()) + inst.c * internal;
}

nlohmann::json to_json(const ProblemInstance& inst) {
    nlohmann::json j;
    j["version"] = 1;
    j["n"] = inst.graph.node_count();
    j["edges"] = nlohmann::json::array();
    for (auto [a, b] : inst.graph.edges()) j["edges"].push_back({a, b});
    j["c"] = inst.c;
    if (inst.known_mis)
        j["known_mis"] = inst.known_mis->indices();
    else
        j["known_mis"] = nullptr;
    j["seed"] = inst.seed;
    if (inst.generator_params) {
        j["generator_params"] = {{"n", inst.generator_params->n},
                                 {"e_initial", inst.generator_params->e_initial},
                                 {"m", inst.generator_params->m}};
    } else {
        j["generator_params"] = nullptr;
    }
    return j;
}

ProblemInstance instance_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != 1)
            throw InputError("instance file: unsupported version");
        Graph g(j.at("n").get<int>());
        for (const auto& e : j.at("edges"))
            g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
        ProblemInstance inst(std::move(g), j.at("c").get<double>());
        if (j.contains("known_mis") && !j["known_mis"].is_null()) {
            NodeSet mis;
            for (const auto& v : j["known_mis"]) mis.set(v.get<int>());
            inst.known_mis = mis;
        }
        if (j.contains("seed")) inst.seed = j["seed"].get<uint64_t>();
        if (j.contains("generator_params") && !j["generator_params"].is_null()) {
            const auto& gp = j["generator_params"];
            inst.generator_params = GeneratorParams{gp.at("n").get<int>(),
                                                    gp.at("e_initial").get<int>(),
                                                    gp.at("m").get<int>()};
        }
        inst.validate();
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("instance file: ") + e.what());
    }
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
    atomic_write_file(path, to_json(inst).dump(2) + "\n");
}

ProblemInstance load_instance(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return instance_from_json(j);
}

namespace {

// Index k in [0, n*(n-1)/2) decoded to the k-th pair (i, j), i < j, in
// row-major order.
std::pair<int, int> unrank_pair(int n, uint64_t k) {
    int i = 0;
    while (k >= static_cast<uint64_t>(n - 1 - i)) {
        k -= static_cast<uint64_t>(n - 1 - i);
        ++i;
    }
    return {i, i + 1 + static_cast<int>(k)};
}

int nth_member(uint64_t mask, uint64_t idx) {
    uint64_t b = mask;
    while (idx--) b &= b - 1;
    return std::countr_zero(b);
}

}  // namespace

GenerateOutcome generate_hard_instance(int n, int e_initial, int m, uint64_t seed,
                                       const GenerateOptions& opt) {
    if (n < 1 || n > kMaxNodes)
        throw InputError("generate_hard_instance: n must be in [1, 64]");
    if (m < 1 || m > n) throw InputError("generate_hard_instance: m must be in [1, n]");
    const uint64_t max_edges = static_cast<uint64_t>(n) * (n - 1) / 2;
    if (e_initial < 0 || static_cast<uint64_t>(e_initial) > max_edges)
        throw InputError("generate_hard_instance: e_initial out of range");
    if (!(opt.c > 1.0)) throw InputError("generate_hard_instance: c must exceed 1");

    const auto start = std::chrono::steady_clock::now();
    auto over_budget = [&]() {
        if (opt.time_budget_s <= 0.0) return false;
        std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        return elapsed.count() > opt.time_budget_s;
    };

    GenerateOutcome outcome;
    for (int attempt = 0; attempt < std::max(1, opt.max_attempts); ++attempt) {
        outcome.attempts = attempt + 1;
        if (over_budget()) {
            outcome.status = GenerateStatus::time_budget_exceeded;
            return outcome;
        }
        const uint64_t attempt_seed =
            attempt == 0 ? seed : Rng::derive(seed, "regenerate", static_cast<uint64_t>(attempt));
        Rng rng(attempt_seed);

        Graph g(n);
        while (g.edge_count() < e_initial) {
            auto [a, b] = unrank_pair(n, rng.below(max_edges));
            g.add_edge(a, b);  // duplicates are ignored, so this is a rejection loop
        }

        IndependentSetSearch search(g, m);
        auto first = search.next();
        if (!first) {
            // The initial graph is too dense for any size-m seed set; a
            // different root seed is needed rather than an internal retry.
            outcome.status = GenerateStatus::no_seed_set;
            return outcome;
        }
        NodeSet planted = *first;

        // Pin the planted set as maximal: every outside node gets an edge
        // into it unless it already has one.
        for (int v = 0; v < n; ++v) {
            if (planted.test(v) || (g.neighbors(v) & planted.bits)) continue;
            g.add_edge(v, nth_member(planted.bits, rng.below(static_cast<uint64_t>(m))));
        }

        bool dead_end = false;
        while (auto found = search.next()) {
            if (over_budget()) {
                outcome.status = GenerateStatus::time_budget_exceeded;
                return outcome;
            }
            // Drop one node of the found set, preferring nodes it does not
            // share with the planted set. When only one such node exists
            // (the found set is a one-swap of the planted set), drop a
            // shared node instead: a reduced set lying entirely inside the
            // planted set could not be pinned maximal without wiring the
            // planted set to itself.
            uint64_t removable = found->bits & ~planted.bits;
            if (std::popcount(removable) <= 1 && (found->bits & planted.bits) != 0)
                removable = found->bits & planted.bits;
            NodeSet reduced = *found;
            reduced.reset(nth_member(removable, rng.below(static_cast<uint64_t>(std::popcount(removable)))));

            // Make the reduced set maximal without touching the planted
            // set's independence: members of the planted set may only be
            // attached to reduced-set nodes outside it.
            for (int u = 0; u < n; ++u) {
                if (reduced.test(u) || (g.neighbors(u) & reduced.bits)) continue;
                uint64_t pool = reduced.bits;
                if (planted.test(u)) pool &= ~planted.bits;
                if (pool == 0) {
                    dead_end = true;
                    break;
                }
                g.add_edge(u, nth_member(pool, rng.below(static_cast<uint64_t>(std::popcount(pool)))));
            }
            if (dead_end) break;
        }
        if (dead_end) continue;

        ProblemInstance inst(std::move(g), opt.c);
        inst.known_mis = planted;
        inst.seed = seed;
        inst.generator_params = GeneratorParams{n, e_initial, m};
        outcome.status = GenerateStatus::ok;
        outcome.instance = std::move(inst);
        return outcome;
    }
    outcome.status = GenerateStatus::dead_end_exhausted;
    return outcome;
}

}  // namespace aqo
