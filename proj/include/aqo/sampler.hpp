#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aqo/instance.hpp"
#include "aqo/spectrum.hpp"

namespace aqo {

// Controls for drawing computation-basis samples from the ground state at a
// chosen point of the anneal. The exact sampler diagonalizes and draws from
// |amplitude|^2; the qmc sampler runs a discrete-time path-integral Monte
// Carlo chain and works beyond the eigensolver caps.
struct SamplerConfig {
    enum class Kind { exact, qmc };
    enum class PointRule { gap_ratio, fixed_offset };

    Kind kind = Kind::exact;
    int r = 500;  // samples per call

    // Sample-point selection: gap_ratio takes the last grid point before
    // s_star where the gap has recovered to `ratio` times the minimum gap;
    // fixed_offset backs off from s_star by `offset`.
    PointRule rule = PointRule::gap_ratio;
    double ratio = 10.0;    // > 1
    double offset = 0.05;   // in (0, 0.2]

    // Path-integral parameters. `beta` is the inverse temperature; the
    // default keeps thermal contamination e^(-beta*gap) below 1e-2 for gaps
    // of ~0.3 and far below that at typical sampling points. A sweep is one
    // Metropolis pass over every (slice, site) plus one temporal cluster
    // attempt per site; `thin` sweeps separate consecutive records.
    int slices = 64;
    int burn_in = 1000;
    int thin = 4;
    double beta = 16.0;

    uint64_t seed = 1;

    void validate() const;
};

// A batch of basis-state draws. `raw` holds the states as sampled, sorted by
// bit pattern; `descended` holds the same draws after steepest descent, so
// every entry there is a maximal independent set of the source instance.
// Counts in both views sum to `total`.
struct SampleSet {
    double s_point = 0.0;
    std::vector<std::pair<NodeSet, int64_t>> raw;
    std::vector<std::pair<NodeSet, int64_t>> descended;
    int64_t total = 0;

    // Exact sampler only: the exact ground-state probability mass of the
    // global-minimum descent basin, accumulated over every basis state with
    // probability at least 1e-12. The qmc sampler leaves it empty and
    // success checks fall back to the sampled fraction.
    std::optional<double> global_basin_mass;

    uint64_t seed = 0;
    std::string kind;  // "exact" or "qmc"
};

struct SamplePoint {
    double s = 0.0;
    // True when the gap_ratio rule found no qualifying grid point and the
    // fixed offset was used instead.
    bool used_fallback = false;
};

// Picks the sampling location "just before" the gap minimum. The gap_ratio
// rule scans the profile grid left of s_star for the last point whose gap is
// at least ratio * g_min; if the gap never recovers that far, it falls back
// to max(0, s_star - offset) and flags it.
SamplePoint choose_sample_point(const SpectrumProfile& profile,
                                const SamplerConfig& cfg);

// Draws cfg.r states from the exact ground state at s. Deterministic for a
// fixed seed. Eigensolver failures and caps propagate.
SampleSet sample_exact(const TransverseFieldModel& m, const Schedule& sch, double s,
                       const SamplerConfig& cfg);

// Path-integral sampler: cfg.slices imaginary-time slices at inverse
// temperature cfg.beta, updated by single-site Metropolis moves and
// per-site temporal cluster flips. Records the first slice of the
// configuration every cfg.thin sweeps after cfg.burn_in sweeps. A zero
// transverse coefficient makes the chain non-ergodic and is rejected; a
// vanishing driver envelope (s = 1) is fine because the cluster moves then
// flip whole time-columns at once.
SampleSet sample_qmc(const TransverseFieldModel& m, const Schedule& sch, double s,
                     const SamplerConfig& cfg);

struct SuccessThresholds {
    double t_a_max = 1.0;  // adiabatic-time gate, natural units
    double p_min = 0.005;  // global-basin mass gate
};

// The two-criterion success check: the run counts as solved when the
// adiabatic time is below t_a_max, or when the global-minimum basin holds
// more than p_min of the sampled mass.
struct SuccessVerdict {
    bool success = false;
    bool time_ok = false;
    bool mass_ok = false;
    double basin_mass = 0.0;       // the estimate the mass gate used
    double hit_probability = 0.0;  // 1 - (1 - basin_mass)^total
};

// Basin mass comes from the exact global_basin_mass when present, otherwise
// from the fraction of descended samples equal to the instance's known
// optimum (or, lacking one, equal to the best cost seen among the descended
// samples).
SuccessVerdict evaluate_success(const SampleSet& samples, const ProblemInstance& inst,
                                const std::optional<AdiabaticTimeResult>& time,
                                const SuccessThresholds& thresholds);

// JSON export with hex-encoded states, counts for both views, the sampler
// configuration echo, and the seed.
nlohmann::json sample_set_json(const SampleSet& set, const SamplerConfig& cfg);

}  // namespace aqo
