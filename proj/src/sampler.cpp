#include "aqo/sampler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "aqo/errors.hpp"
#include "aqo/rng.hpp"

namespace aqo {

namespace {

std::string hex_state(NodeSet s) {
    char buf[18];
    auto res = std::to_chars(buf, buf + sizeof(buf), s.bits, 16);
    return "0x" + std::string(buf, res.ptr);
}

std::vector<std::pair<NodeSet, int64_t>> sorted_counts(
    const std::map<uint64_t, int64_t>& counts) {
    std::vector<std::pair<NodeSet, int64_t>> out;
    out.reserve(counts.size());
    for (const auto& [bits, count] : counts) out.push_back({NodeSet{bits}, count});
    return out;
}

void fill_descended(const TransverseFieldModel& m, SampleSet& set) {
    std::map<uint64_t, int64_t> descended;
    for (const auto& [state, count] : set.raw)
        descended[gradient_descent(m, state).bits] += count;
    set.descended = sorted_counts(descended);
}

const char* kind_name(SamplerConfig::Kind kind) {
    return kind == SamplerConfig::Kind::exact ? "exact" : "qmc";
}

}  // namespace

void SamplerConfig::validate() const {
    if (r < 1) throw InputError("sampler: r must be at least 1");
    if (ratio <= 1.0) throw InputError("sampler: gap ratio must exceed 1");
    if (offset <= 0.0 || offset > 0.2)
        throw InputError("sampler: offset must lie in (0, 0.2]");
    if (slices < 2) throw InputError("sampler: need at least 2 slices");
    if (burn_in < 0) throw InputError("sampler: negative burn-in");
    if (thin < 1) throw InputError("sampler: thinning interval must be at least 1");
    if (beta <= 0.0) throw InputError("sampler: inverse temperature must be positive");
}

SamplePoint choose_sample_point(const SpectrumProfile& profile,
                                const SamplerConfig& cfg) {
    cfg.validate();
    SamplePoint out;
    if (cfg.rule == SamplerConfig::PointRule::gap_ratio) {
        for (size_t k = profile.s_grid.size(); k-- > 0;) {
            if (profile.s_grid[k] >= profile.s_star) continue;
            if (profile.gap[k] >= cfg.ratio * profile.g_min) {
                out.s = profile.s_grid[k];
                return out;
            }
        }
        out.used_fallback = true;
    }
    out.s = std::max(0.0, profile.s_star - cfg.offset);
    return out;
}

SampleSet sample_exact(const TransverseFieldModel& m, const Schedule& sch, double s,
                       const SamplerConfig& cfg) {
    cfg.validate();
    const auto pairs = lowest_eigenpairs(m, sch, s, 1);
    const uint64_t dim = uint64_t{1} << m.n;

    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (uint64_t x = 0; x < dim; ++x) {
        const double amp = pairs.vectors(static_cast<Eigen::Index>(x), 0);
        acc += amp * amp;
        cdf[x] = acc;
    }

    SampleSet set;
    set.s_point = s;
    set.seed = cfg.seed;
    set.kind = kind_name(SamplerConfig::Kind::exact);
    set.total = cfg.r;

    Rng rng(Rng::derive(cfg.seed, "sample-draws"));
    std::map<uint64_t, int64_t> raw;
    for (int k = 0; k < cfg.r; ++k) {
        const double u = rng.unit_real() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const uint64_t x = it == cdf.end() ? dim - 1
                                           : static_cast<uint64_t>(it - cdf.begin());
        ++raw[x];
    }
    set.raw = sorted_counts(raw);
    fill_descended(m, set);

    // Exact mass of the global-minimum descent basin: walk every basis state
    // carrying at least 1e-12 probability down to its local minimum and keep
    // the mass that lands on the lowest diagonal energy.
    std::vector<double> diag(dim);
    diag[0] = diagonal_energy(m, NodeSet{0});
    double lowest = diag[0];
    for (uint64_t x = 1; x < dim; ++x) {
        const uint64_t rest = x & (x - 1);
        diag[x] = diag[rest] + flip_cost(m, NodeSet{rest}, std::countr_zero(x));
        lowest = std::min(lowest, diag[x]);
    }
    double mass = 0.0;
    for (uint64_t x = 0; x < dim; ++x) {
        const double p = (x == 0 ? cdf[0] : cdf[x] - cdf[x - 1]) / acc;
        if (p < 1e-12) continue;
        if (diag[gradient_descent(m, NodeSet{x}).bits] <= lowest + 1e-9) mass += p;
    }
    set.global_basin_mass = mass;
    return set;
}

SampleSet sample_qmc(const TransverseFieldModel& m, const Schedule& sch, double s,
                     const SamplerConfig& cfg) {
    cfg.validate();
    for (double d : m.delta)
        if (d == 0.0)
            throw InputError("sample_qmc: zero transverse coefficient makes the "
                             "chain non-ergodic");

    const auto v = schedule_values(sch, s);
    const int slices = cfg.slices;
    const double dtau = cfg.beta / slices;

    // Temporal couplings K_i = -(1/2) ln tanh(dtau * A * delta_i), clamped so
    // a vanishing driver envelope freezes the columns instead of overflowing;
    // a frozen column still moves through whole-column cluster flips.
    std::vector<double> bond_prob(static_cast<size_t>(m.n));
    std::vector<double> coupling(static_cast<size_t>(m.n));
    for (int i = 0; i < m.n; ++i) {
        const double x = dtau * v.a * m.delta[static_cast<size_t>(i)];
        double k = x < 1e-18 ? 50.0 : 0.5 * std::log(1.0 / std::tanh(x));
        k = std::min(k, 50.0);
        coupling[static_cast<size_t>(i)] = k;
        bond_prob[static_cast<size_t>(i)] = 1.0 - std::exp(-2.0 * k);
    }

    const uint64_t mask = m.n == 64 ? ~uint64_t{0} : (uint64_t{1} << m.n) - 1;
    std::vector<uint64_t> conf(static_cast<size_t>(slices));
    Rng init(Rng::derive(cfg.seed, "qmc-init"));
    for (auto& slice : conf) slice = init.next_u64() & mask;

    Rng chain(Rng::derive(cfg.seed, "qmc-chain"));
    std::vector<int> members;
    members.reserve(static_cast<size_t>(slices));

    auto sweep = [&]() {
        for (int t = 0; t < slices; ++t) {
            const uint64_t prev = conf[static_cast<size_t>((t + slices - 1) % slices)];
            const uint64_t next = conf[static_cast<size_t>((t + 1) % slices)];
            for (int i = 0; i < m.n; ++i) {
                const uint64_t bit = uint64_t{1} << i;
                const double si = conf[static_cast<size_t>(t)] & bit ? 1.0 : -1.0;
                const double sp = prev & bit ? 1.0 : -1.0;
                const double sn = next & bit ? 1.0 : -1.0;
                const double ds =
                    dtau * v.b * flip_cost(m, NodeSet{conf[static_cast<size_t>(t)]}, i) +
                    2.0 * coupling[static_cast<size_t>(i)] * si * (sp + sn);
                if (ds <= 0.0 || chain.unit_real() < std::exp(-ds))
                    conf[static_cast<size_t>(t)] ^= bit;
            }
        }
        for (int i = 0; i < m.n; ++i) {
            const uint64_t bit = uint64_t{1} << i;
            const int t0 = static_cast<int>(chain.below(static_cast<uint64_t>(slices)));
            const bool spin0 = conf[static_cast<size_t>(t0)] & bit;
            members.clear();
            members.push_back(t0);
            // Grow a contiguous arc of equal spins along imaginary time,
            // forward then backward, bonding with probability 1 - e^(-2K).
            int fwd = t0;
            while (static_cast<int>(members.size()) < slices) {
                const int t = (fwd + 1) % slices;
                if ((conf[static_cast<size_t>(t)] & bit ? true : false) != spin0) break;
                if (chain.unit_real() >= bond_prob[static_cast<size_t>(i)]) break;
                members.push_back(t);
                fwd = t;
            }
            int bwd = t0;
            while (static_cast<int>(members.size()) < slices) {
                const int t = (bwd + slices - 1) % slices;
                if ((conf[static_cast<size_t>(t)] & bit ? true : false) != spin0) break;
                if (chain.unit_real() >= bond_prob[static_cast<size_t>(i)]) break;
                members.push_back(t);
                bwd = t;
            }
            double ds = 0.0;
            for (int t : members)
                ds += dtau * v.b * flip_cost(m, NodeSet{conf[static_cast<size_t>(t)]}, i);
            if (ds <= 0.0 || chain.unit_real() < std::exp(-ds))
                for (int t : members) conf[static_cast<size_t>(t)] ^= bit;
        }
    };

    for (int k = 0; k < cfg.burn_in; ++k) sweep();

    SampleSet set;
    set.s_point = s;
    set.seed = cfg.seed;
    set.kind = kind_name(SamplerConfig::Kind::qmc);
    set.total = cfg.r;

    std::map<uint64_t, int64_t> raw;
    for (int k = 0; k < cfg.r; ++k) {
        for (int sweeps = 0; sweeps < cfg.thin; ++sweeps) sweep();
        ++raw[conf[0]];
    }
    set.raw = sorted_counts(raw);
    fill_descended(m, set);
    return set;
}

SuccessVerdict evaluate_success(const SampleSet& samples, const ProblemInstance& inst,
                                const std::optional<AdiabaticTimeResult>& time,
                                const SuccessThresholds& thresholds) {
    SuccessVerdict out;
    if (time.has_value()) out.time_ok = time->t_a < thresholds.t_a_max;

    if (samples.global_basin_mass.has_value()) {
        out.basin_mass = *samples.global_basin_mass;
    } else if (samples.total > 0) {
        int64_t hits = 0;
        if (inst.known_mis.has_value()) {
            for (const auto& [state, count] : samples.descended)
                if (state == *inst.known_mis) hits += count;
        } else {
            double best = 0.0;
            bool first = true;
            for (const auto& [state, count] : samples.descended) {
                const double c = cost(inst, state);
                if (first || c < best - 1e-9) {
                    best = c;
                    hits = count;
                    first = false;
                } else if (c < best + 1e-9) {
                    hits += count;
                }
            }
        }
        out.basin_mass = static_cast<double>(hits) / static_cast<double>(samples.total);
    }

    out.mass_ok = out.basin_mass > thresholds.p_min;
    out.hit_probability =
        1.0 - std::pow(1.0 - out.basin_mass, static_cast<double>(samples.total));
    out.success = out.time_ok || out.mass_ok;
    return out;
}

nlohmann::json sample_set_json(const SampleSet& set, const SamplerConfig& cfg) {
    nlohmann::json j;
    j["kind"] = set.kind;
    j["s_point"] = set.s_point;
    j["seed"] = set.seed;
    j["total"] = set.total;
    auto states = [](const std::vector<std::pair<NodeSet, int64_t>>& counts) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [state, count] : counts)
            arr.push_back({{"state", hex_state(state)}, {"count", count}});
        return arr;
    };
    j["raw"] = states(set.raw);
    j["descended"] = states(set.descended);
    if (set.global_basin_mass.has_value())
        j["global_basin_mass"] = *set.global_basin_mass;
    j["config"] = {{"kind", kind_name(cfg.kind)},
                   {"r", cfg.r},
                   {"rule", cfg.rule == SamplerConfig::PointRule::gap_ratio
                                ? "gap_ratio"
                                : "fixed_offset"},
                   {"ratio", cfg.ratio},
                   {"offset", cfg.offset},
                   {"slices", cfg.slices},
                   {"burn_in", cfg.burn_in},
                   {"thin", cfg.thin},
                   {"beta", cfg.beta}};
    return j;
}

}  // namespace aqo
