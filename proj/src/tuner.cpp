#include "aqo/tuner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "aqo/errors.hpp"
#include "aqo/rng.hpp"

namespace aqo {

namespace {

bool maximal_independent(const std::vector<uint64_t>& adj, int n, uint64_t bits) {
    for (int b = 0; b < n; ++b) {
        const uint64_t overlap = adj[static_cast<size_t>(b)] & bits;
        if (bits >> b & 1) {
            if (overlap) return false;
        } else if (!overlap) {
            return false;
        }
    }
    return true;
}

double lowest_diagonal(const ProblemInstance& inst, const SampleSet& samples) {
    if (inst.known_mis.has_value()) return cost(inst, *inst.known_mis);
    double best = 0.0;
    bool first = true;
    for (const auto& [state, count] : samples.descended) {
        const double c = cost(inst, state);
        if (first || c < best) {
            best = c;
            first = false;
        }
    }
    return best;
}

}  // namespace

void TunerConfig::validate() const {
    if (r < 1) throw InputError("tuner: r must be at least 1");
    if (!(delta_min > 0.0) || !(delta_min < delta_max))
        throw InputError("tuner: need 0 < delta_min < delta_max");
    if (beta_rule == BetaRule::fixed && (beta_fixed <= 0.0 || beta_fixed > 1.0))
        throw InputError("tuner: fixed beta must lie in (0, 1]");
    if (p_min <= 0.0 || p_min >= 1.0) throw InputError("tuner: p_min must lie in (0, 1)");
    if (max_iterations < 0) throw InputError("tuner: negative iteration budget");
}

std::vector<double> compute_mu(const TransverseFieldModel& m, const SampleSet& samples,
                               double cluster_energy) {
    (void)cluster_energy;  // informational: routes resolve per sample, see header
    if (samples.descended.empty())
        throw InputError("compute_mu: empty sample set");

    std::vector<double> mu(static_cast<size_t>(m.n), 0.0);
    std::vector<double> flip_up(static_cast<size_t>(m.n), 0.0);
    double weight = 0.0;

    for (const auto& [state, count] : samples.descended) {
        // Energy denominators of the intermediate one-flip states. A sampled
        // minimum has strictly positive flip costs in every direction.
        for (int i = 0; i < m.n; ++i) {
            flip_up[static_cast<size_t>(i)] = flip_cost(m, state, i);
            if (flip_up[static_cast<size_t>(i)] <= 0.0)
                throw InputError("compute_mu: sample is not a local minimum");
        }

        const double w = static_cast<double>(count);
        weight += w;

        // Return pairs (i, i) exist for every qubit.
        for (int i = 0; i < m.n; ++i)
            mu[static_cast<size_t>(i)] +=
                w * m.delta[static_cast<size_t>(i)] / flip_up[static_cast<size_t>(i)];

        // Swap pairs: a state in the same energy class two flips away must
        // be M with one member p exchanged for an outside node q whose only
        // selected neighbor is p; both flip orders are distinct pairs.
        for (int q = 0; q < m.n; ++q) {
            if (state.test(q)) continue;
            const uint64_t inside = m.coupled[static_cast<size_t>(q)] & state.bits;
            if (std::popcount(inside) != 1) continue;
            const int p = std::countr_zero(inside);
            const uint64_t swapped =
                (state.bits | (uint64_t{1} << q)) & ~(uint64_t{1} << p);
            if (!maximal_independent(m.coupled, m.n, swapped)) continue;
            mu[static_cast<size_t>(p)] +=
                w * m.delta[static_cast<size_t>(q)] / flip_up[static_cast<size_t>(p)];
            mu[static_cast<size_t>(q)] +=
                w * m.delta[static_cast<size_t>(p)] / flip_up[static_cast<size_t>(q)];
        }
    }

    for (double& v : mu) v /= weight;
    return mu;
}

std::vector<double> geometric_update(const std::vector<double>& delta,
                                     const std::vector<double>& mu, double beta) {
    if (delta.size() != mu.size())
        throw InputError("geometric_update: size mismatch");
    std::vector<double> out(delta.size());
    for (size_t i = 0; i < delta.size(); ++i) {
        if (!(mu[i] > 0.0))
            throw NumericalError("geometric_update: nonpositive mu", {mu[i]});
        out[i] = std::pow(delta[i], 1.0 - beta) * std::pow(mu[i], -beta);
    }
    return out;
}

std::vector<double> update_delta(const std::vector<double>& delta,
                                 const std::vector<double>& mu, int kappa,
                                 const TunerConfig& cfg) {
    cfg.validate();
    if (kappa < 1) throw InputError("update_delta: kappa starts at 1");
    const double beta = cfg.beta_rule == TunerConfig::BetaRule::harmonic
                            ? 1.0 / (kappa + 1)
                            : cfg.beta_fixed;
    return rescale_delta(geometric_update(delta, mu, beta), cfg);
}

std::vector<double> rescale_delta(std::vector<double> delta, const TunerConfig& cfg) {
    if (delta.empty()) return delta;
    const double low = *std::min_element(delta.begin(), delta.end());
    if (!(low > 0.0)) throw InputError("rescale_delta: entries must be positive");
    const double scale = cfg.delta_min / low;
    // Assign the minimum directly: low * (delta_min / low) can land one ulp
    // off, and the anchor is part of the contract.
    for (double& d : delta)
        d = d == low ? cfg.delta_min : std::min(d * scale, cfg.delta_max);
    return delta;
}

TunerRun run_tuner(const ProblemInstance& inst, const Schedule& sch,
                   const TunerConfig& cfg, const SamplerConfig& sampler_cfg) {
    cfg.validate();
    SamplerConfig scfg = sampler_cfg;
    scfg.r = cfg.r;

    const int n = inst.graph.node_count();
    std::vector<double> delta(static_cast<size_t>(n), 1.0);
    const SuccessThresholds thresholds{cfg.t_a_max, cfg.p_min};

    TunerRun run;
    for (int kappa = 1;; ++kappa) {
        scfg.seed = Rng::derive(sampler_cfg.seed, "tuner-iteration",
                                static_cast<uint64_t>(kappa));

        // The loop only needs s_star, g_min and the sample point, so a
        // coarser grid and looser eigensolver tolerance than the defaults
        // suffice; golden-section refinement still pins the minimum itself.
        EigenOptions eig;
        eig.tol_rel = 1e-6;
        const auto model = build_model(inst, delta);
        const auto profile = gap_profile(model, sch, 41, 2, eig);
        const auto time = adiabatic_time(model, sch, profile, eig);
        const auto point = choose_sample_point(profile, scfg);
        const auto samples =
            scfg.kind == SamplerConfig::Kind::exact
                ? sample_exact(model, sch, point.s, scfg)
                : sample_qmc(model, sch, point.s, scfg);
        const auto verdict = evaluate_success(samples, inst, time, thresholds);

        TunerIteration it;
        it.kappa = kappa;
        it.delta_before = delta;
        it.delta_after = delta;
        it.s_star = profile.s_star;
        it.g_min = profile.g_min;
        it.t_a = time.t_a;
        it.matrix_element = time.matrix_element;
        it.gap_collapsed = time.gap_collapsed;
        it.s_sample = point.s;
        it.sample_fallback = point.used_fallback;
        it.samples_total = samples.total;
        it.distinct_raw = static_cast<int>(samples.raw.size());
        it.distinct_descended = static_cast<int>(samples.descended.size());
        it.basin_mass = verdict.basin_mass;
        it.hit_probability = verdict.hit_probability;
        it.time_ok = verdict.time_ok;
        it.mass_ok = verdict.mass_ok;
        it.success = verdict.success;

        if (verdict.success) {
            run.solved_at = kappa;
            run.iterations.push_back(std::move(it));
            break;
        }
        if (kappa > cfg.max_iterations) {
            run.iterations.push_back(std::move(it));
            break;
        }

        // Samples that already sit in the global minimum carry no
        // information about the competing cluster; drop them from the
        // statistic (they count toward success only).
        SampleSet filtered = samples;
        const double floor_energy = lowest_diagonal(inst, samples);
        std::erase_if(filtered.descended, [&](const auto& entry) {
            return cost(inst, entry.first) <= floor_energy + 1e-9;
        });
        if (filtered.descended.empty()) filtered.descended = samples.descended;

        double modal_energy = 0.0;
        int64_t modal_count = -1;
        for (const auto& [state, count] : filtered.descended)
            if (count > modal_count) {
                modal_count = count;
                modal_energy = cost(inst, state);
            }

        it.mu = compute_mu(model, filtered, modal_energy);
        it.delta_after = update_delta(delta, it.mu, kappa, cfg);
        delta = it.delta_after;
        run.iterations.push_back(std::move(it));
    }
    return run;
}

std::string run_log_jsonl(const TunerRun& run) {
    std::ostringstream os;
    for (const auto& it : run.iterations) {
        nlohmann::json j;
        j["kappa"] = it.kappa;
        j["delta_before"] = it.delta_before;
        j["mu"] = it.mu;
        j["delta_after"] = it.delta_after;
        j["s_star"] = it.s_star;
        j["g_min"] = it.g_min;
        j["t_a"] = it.t_a;
        j["matrix_element"] = it.matrix_element;
        j["gap_collapsed"] = it.gap_collapsed;
        j["s_sample"] = it.s_sample;
        j["sample_fallback"] = it.sample_fallback;
        j["samples_total"] = it.samples_total;
        j["distinct_raw"] = it.distinct_raw;
        j["distinct_descended"] = it.distinct_descended;
        j["basin_mass"] = it.basin_mass;
        j["hit_probability"] = it.hit_probability;
        j["time_ok"] = it.time_ok;
        j["mass_ok"] = it.mass_ok;
        j["success"] = it.success;
        os << j.dump() << "\n";
    }
    nlohmann::json summary;
    summary["iterations"] = run.iterations.size();
    if (run.solved_at.has_value())
        summary["solved_at"] = *run.solved_at;
    else
        summary["solved_at"] = nullptr;
    os << summary.dump() << "\n";
    return os.str();
}

std::string unsolved_histogram_csv(const std::vector<TunerRun>& runs) {
    int max_updates = 0;
    for (const auto& run : runs)
        max_updates =
            std::max(max_updates, static_cast<int>(run.iterations.size()) - 1);

    std::ostringstream os;
    os << "iteration,unsolved\n";
    for (int k = 0; k <= max_updates; ++k) {
        int unsolved = 0;
        for (const auto& run : runs)
            if (!run.solved_at.has_value() || *run.solved_at > k + 1) ++unsolved;
        os << k << "," << unsolved << "\n";
    }
    return os.str();
}

}  // namespace aqo
