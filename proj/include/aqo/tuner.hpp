#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aqo/sampler.hpp"

namespace aqo {

// Controls for the transverse-term tuning loop. The loop samples the ground
// state just before the gap minimum, estimates how strongly each qubit
// couples the sampled local-minimum cluster to its degenerate partners, and
// shrinks the transverse coefficients of the worst offenders.
struct TunerConfig {
    enum class BetaRule { harmonic, fixed };

    int r = 500;  // samples per iteration, copied into the sampler config
    BetaRule beta_rule = BetaRule::harmonic;  // harmonic: beta = 1/(kappa+1)
    double beta_fixed = 0.5;                  // used by BetaRule::fixed
    double delta_min = 0.25;
    double delta_max = 8.0;
    int max_iterations = 15;  // update rounds; evaluations run one past this
    // Adiabatic-time success gate in natural units. Calibrated against the
    // hard-instance corpus: iteration-0 corpus members sit at t_a ~ 10^3 or
    // above while instances without a late anticrossing stay under ~150.
    double t_a_max = 300.0;
    double p_min = 0.005;     // basin-mass success gate
    double t_f = 0.08;        // reporting only: the fast anneal time assumed

    void validate() const;
};

// One evaluation of the loop, with the update that followed it (if any).
// `mu` stays empty and delta_after equals delta_before on the iteration that
// succeeded or exhausted the budget.
struct TunerIteration {
    int kappa = 0;
    std::vector<double> delta_before;
    std::vector<double> mu;
    std::vector<double> delta_after;

    double s_star = 0.0;
    double g_min = 0.0;
    double t_a = 0.0;
    double matrix_element = 0.0;
    bool gap_collapsed = false;
    double s_sample = 0.0;
    bool sample_fallback = false;

    int64_t samples_total = 0;
    int distinct_raw = 0;
    int distinct_descended = 0;
    double basin_mass = 0.0;
    double hit_probability = 0.0;
    bool time_ok = false;
    bool mass_ok = false;
    bool success = false;
};

struct TunerRun {
    std::vector<TunerIteration> iterations;
    // kappa of the successful evaluation; 1 means the untuned model already
    // passed. Empty when the budget ran out.
    std::optional<int> solved_at;
};

// Per-qubit coupling statistic over the descended samples: for each sampled
// minimum M (with multiplicity), qubit i receives sum(delta_j) / B_i over
// every flip pair (i, j) that leads from M through intermediate flip_i(M)
// (energy denominator B_i) to a maximal independent set in M's own
// degenerate energy class, including the return pair (i, i). The result is
// the sample-weighted mean. cluster_energy names the modal class for
// reporting; samples outside it still resolve against their own class.
std::vector<double> compute_mu(const TransverseFieldModel& m, const SampleSet& samples,
                               double cluster_energy);

// One geometric update step without rescaling: delta^(1-beta) * mu^(-beta).
// With the harmonic rule this makes delta after kappa updates the geometric
// mean of the initial delta and all mu reciprocals seen so far.
std::vector<double> geometric_update(const std::vector<double>& delta,
                                     const std::vector<double>& mu, double beta);

// Full update step: geometric_update with beta from the config rule at the
// given kappa (>= 1), then rescale_delta.
std::vector<double> update_delta(const std::vector<double>& delta,
                                 const std::vector<double>& mu, int kappa,
                                 const TunerConfig& cfg);

// Multiplies all entries by delta_min / min(entries), then clamps anything
// above delta_max down to it. The smallest entry lands exactly on delta_min.
std::vector<double> rescale_delta(std::vector<double> delta, const TunerConfig& cfg);

// The tuning loop: start from delta = 1, evaluate (spectrum, adiabatic time,
// sample, success check), stop on success, otherwise update delta and
// repeat. cfg.max_iterations bounds the number of updates, so at most
// max_iterations + 1 evaluations run; max_iterations = 0 means a single
// untuned evaluation. Deterministic: iteration k samples with the seed
// derived as Rng::derive(sampler_cfg.seed, "tuner-iteration", k).
TunerRun run_tuner(const ProblemInstance& inst, const Schedule& sch,
                   const TunerConfig& cfg, const SamplerConfig& sampler_cfg);

// One JSON object per iteration, then a summary line with solved_at.
std::string run_log_jsonl(const TunerRun& run);

// CSV "iteration,unsolved": row k counts the runs still unsolved after k
// update rounds. Row 0 is the count of instances whose untuned evaluation
// failed; the series is nonincreasing by construction.
std::string unsolved_histogram_csv(const std::vector<TunerRun>& runs);

}  // namespace aqo
