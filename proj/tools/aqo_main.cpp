// aqo: command-line front end for the adiabatic-optimization workbench.
//
// Subcommands: generate, spectrum, tune, batch, rerun. Every command writes
// its artifacts plus exactly one manifest.json into --out; the manifest
// records the effective configuration (flags merged over --config values),
// the root seed, and a host-independent digest of the artifacts, so any run
// can be reproduced from its manifest alone via `aqo rerun`.
//
// Exit codes: 0 success (including scientifically unsolved outcomes),
// 2 usage error, 3 input error, 4 resource-cap error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aqo/census.hpp"
#include "aqo/errors.hpp"
#include "aqo/instance.hpp"
#include "aqo/io.hpp"
#include "aqo/ising.hpp"
#include "aqo/rng.hpp"
#include "aqo/sampler.hpp"
#include "aqo/spectrum.hpp"
#include "aqo/tuner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Artifact directory: collects (name, content) pairs, writes each file
// atomically, and digests the set in name-sorted order. The manifest itself
// stays out of the digest so reruns can compare digests directly.

class ArtifactDir {
public:
    explicit ArtifactDir(std::string dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& content) {
        aqo::atomic_write_file((fs::path(dir_) / name).string(), content);
        files_.emplace_back(name, content);
    }

    std::string digest() const {
        auto sorted = files_;
        std::sort(sorted.begin(), sorted.end());
        return aqo::digest_files(sorted);
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [name, content] : files_) out.push_back(name);
        std::sort(out.begin(), out.end());
        return out;
    }

    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

void write_manifest(ArtifactDir& art, const std::string& command, const json& config,
                    uint64_t seed, const std::vector<std::string>& inputs,
                    double wall_clock_s) {
    json m;
    m["version"] = 1;
    m["tool"] = "aqo";
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["config"] = config;
    m["seed"] = seed;
    m["inputs"] = inputs;
    m["outputs"] = art.names();
    m["digest"] = art.digest();
    m["wall_clock_s"] = wall_clock_s;
    aqo::atomic_write_file((fs::path(art.dir()) / "manifest.json").string(),
                           m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Config file handling. --config names a JSON object whose keys match long
// flag names (without the dashes); values act as defaults and explicit flags
// override them. The merge happens before CLI11 parses, because CLI11 only
// writes bound variables for flags actually present on the command line.

json load_config_json(const std::string& path) {
    json j;
    try {
        j = json::parse(aqo::read_file(path));
    } catch (const json::parse_error& ex) {
        throw aqo::InputError(std::string("config file: ") + ex.what());
    }
    if (!j.is_object()) throw aqo::InputError("config file: expected a JSON object");
    return j;
}

// Pre-scan argv of one subcommand for --config before real parsing.
std::optional<std::string> find_config_arg(int argc, char** argv) {
    for (int i = 0; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
        if (a.rfind("--config=", 0) == 0) return a.substr(9);
    }
    return std::nullopt;
}

template <typename T>
void cfg_get(const json& j, const char* key, T& into) {
    if (j.contains(key)) into = j.at(key).get<T>();
}

// Environment-variable override for a cap default; the flag still wins.
int env_cap(const char* name, int fallback) {
    const char* v = std::getenv(name);
    if (!v || !*v) return fallback;
    char* end = nullptr;
    const long parsed = std::strtol(v, &end, 10);
    if (end == v || *end != '\0' || parsed <= 0)
        throw aqo::InputError(std::string(name) + ": expected a positive integer");
    return static_cast<int>(parsed);
}

// ---------------------------------------------------------------------------
// CSV exports reuse the library formatters, prefixed with a schema-version
// comment row so each file is self-identifying.

std::string versioned_profile_csv(const aqo::SpectrumProfile& p) {
    return "# aqo spectrum-profile 1\n" + aqo::profile_csv(p);
}

std::string versioned_tracks_csv(const aqo::TrackData& t) {
    return "# aqo sigma-z-tracks 1\n" + aqo::tracks_csv(t);
}

std::string instance_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "instance-%03d.json", index);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared eigensolver flags.

struct EigenFlags {
    std::string method = "automatic";
    int dense_cap = 0;      // resolved against the environment in resolve()
    int iterative_cap = 0;
    double tol = 1e-9;
    int block_extra = 4;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--method", method, "Eigensolver: automatic, dense, iterative")
            ->check(CLI::IsMember({"automatic", "dense", "iterative"}));
        cmd->add_option("--dense-cap", dense_cap,
                        "Max qubit count for the dense path (env AQO_DENSE_CAP)");
        cmd->add_option("--iterative-cap", iterative_cap,
                        "Max qubit count for the iterative path (env AQO_ITERATIVE_CAP)");
        cmd->add_option("--tol", tol, "Relative residual tolerance");
        cmd->add_option("--block-extra", block_extra, "Extra block columns");
    }

    void merge_config(const json& j) {
        cfg_get(j, "method", method);
        cfg_get(j, "dense-cap", dense_cap);
        cfg_get(j, "iterative-cap", iterative_cap);
        cfg_get(j, "tol", tol);
        cfg_get(j, "block-extra", block_extra);
    }

    aqo::EigenOptions resolve(int n) const {
        aqo::EigenOptions opt;
        opt.dense_cap = dense_cap > 0 ? dense_cap : env_cap("AQO_DENSE_CAP", opt.dense_cap);
        opt.iterative_cap =
            iterative_cap > 0 ? iterative_cap : env_cap("AQO_ITERATIVE_CAP", opt.iterative_cap);
        opt.tol_rel = tol;
        opt.block_extra = block_extra;
        if (method == "dense") opt.method = aqo::EigenOptions::Method::dense;
        if (method == "iterative") opt.method = aqo::EigenOptions::Method::iterative;
        // Fail fast with the responsible flag named, before any heavy work.
        if (opt.method == aqo::EigenOptions::Method::dense && n > opt.dense_cap)
            throw aqo::CapError("problem has " + std::to_string(n) +
                                " qubits but the dense path is capped at " +
                                std::to_string(opt.dense_cap) +
                                "; raise --dense-cap (or AQO_DENSE_CAP)");
        const int hard = std::max(opt.dense_cap, opt.iterative_cap);
        if (n > hard)
            throw aqo::CapError("problem has " + std::to_string(n) +
                                " qubits but the largest allowed size is " +
                                std::to_string(hard) +
                                "; raise --iterative-cap (or AQO_ITERATIVE_CAP)");
        return opt;
    }

    json snapshot() const {
        return json{{"method", method},
                    {"dense-cap", dense_cap},
                    {"iterative-cap", iterative_cap},
                    {"tol", tol},
                    {"block-extra", block_extra}};
    }
};

aqo::Schedule resolve_schedule(const std::string& schedule_file) {
    if (schedule_file.empty()) return aqo::Schedule::linear_schedule();
    return aqo::load_schedule(schedule_file);
}

// ---------------------------------------------------------------------------
// Tuner + sampler flag block shared by tune and batch.

struct TuneFlags {
    int r = 500;
    std::string beta_rule = "harmonic";
    double beta_fixed = 0.5;
    double delta_min = 0.25;
    double delta_max = 8.0;
    int max_iter = 15;
    double ta_max = aqo::TunerConfig{}.t_a_max;
    double p_min = 0.005;
    double t_f = 0.08;
    std::string sampler = "exact";
    std::string point_rule = "gap-ratio";
    double ratio = 10.0;
    double offset = 0.05;
    int slices = 64;
    int burn_in = 1000;
    int thin = 4;
    double qmc_beta = 16.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--r", r, "Samples per iteration");
        cmd->add_option("--beta-rule", beta_rule, "Update weight rule: harmonic or fixed")
            ->check(CLI::IsMember({"harmonic", "fixed"}));
        cmd->add_option("--beta-fixed", beta_fixed, "Weight for --beta-rule fixed");
        cmd->add_option("--delta-min", delta_min, "Lower edge of the feasible range");
        cmd->add_option("--delta-max", delta_max, "Upper edge of the feasible range");
        cmd->add_option("--max-iter", max_iter, "Update rounds before giving up");
        cmd->add_option("--ta-max", ta_max, "Adiabatic-time success gate");
        cmd->add_option("--p-min", p_min, "Basin-mass success gate");
        cmd->add_option("--t-f", t_f, "Reported fast-anneal time");
        cmd->add_option("--sampler", sampler, "Sampler kind: exact or qmc")
            ->check(CLI::IsMember({"exact", "qmc"}));
        cmd->add_option("--point-rule", point_rule,
                        "Sample-point rule: gap-ratio or fixed-offset")
            ->check(CLI::IsMember({"gap-ratio", "fixed-offset"}));
        cmd->add_option("--ratio", ratio, "Gap recovery ratio for gap-ratio");
        cmd->add_option("--offset", offset, "Backoff from s* for fixed-offset");
        cmd->add_option("--slices", slices, "Path-integral time slices");
        cmd->add_option("--burn-in", burn_in, "Path-integral burn-in sweeps");
        cmd->add_option("--thin", thin, "Sweeps between records");
        cmd->add_option("--qmc-beta", qmc_beta, "Path-integral inverse temperature");
    }

    void merge_config(const json& j) {
        cfg_get(j, "r", r);
        cfg_get(j, "beta-rule", beta_rule);
        cfg_get(j, "beta-fixed", beta_fixed);
        cfg_get(j, "delta-min", delta_min);
        cfg_get(j, "delta-max", delta_max);
        cfg_get(j, "max-iter", max_iter);
        cfg_get(j, "ta-max", ta_max);
        cfg_get(j, "p-min", p_min);
        cfg_get(j, "t-f", t_f);
        cfg_get(j, "sampler", sampler);
        cfg_get(j, "point-rule", point_rule);
        cfg_get(j, "ratio", ratio);
        cfg_get(j, "offset", offset);
        cfg_get(j, "slices", slices);
        cfg_get(j, "burn-in", burn_in);
        cfg_get(j, "thin", thin);
        cfg_get(j, "qmc-beta", qmc_beta);
    }

    aqo::TunerConfig tuner_config() const {
        aqo::TunerConfig cfg;
        cfg.r = r;
        cfg.beta_rule = beta_rule == "fixed" ? aqo::TunerConfig::BetaRule::fixed
                                             : aqo::TunerConfig::BetaRule::harmonic;
        cfg.beta_fixed = beta_fixed;
        cfg.delta_min = delta_min;
        cfg.delta_max = delta_max;
        cfg.max_iterations = max_iter;
        cfg.t_a_max = ta_max;
        cfg.p_min = p_min;
        cfg.t_f = t_f;
        cfg.validate();
        return cfg;
    }

    aqo::SamplerConfig sampler_config(uint64_t seed) const {
        aqo::SamplerConfig cfg;
        cfg.kind = sampler == "qmc" ? aqo::SamplerConfig::Kind::qmc
                                    : aqo::SamplerConfig::Kind::exact;
        cfg.r = r;
        cfg.rule = point_rule == "fixed-offset" ? aqo::SamplerConfig::PointRule::fixed_offset
                                                : aqo::SamplerConfig::PointRule::gap_ratio;
        cfg.ratio = ratio;
        cfg.offset = offset;
        cfg.slices = slices;
        cfg.burn_in = burn_in;
        cfg.thin = thin;
        cfg.beta = qmc_beta;
        cfg.seed = seed;
        cfg.validate();
        return cfg;
    }

    json snapshot() const {
        return json{{"r", r},
                    {"beta-rule", beta_rule},
                    {"beta-fixed", beta_fixed},
                    {"delta-min", delta_min},
                    {"delta-max", delta_max},
                    {"max-iter", max_iter},
                    {"ta-max", ta_max},
                    {"p-min", p_min},
                    {"t-f", t_f},
                    {"sampler", sampler},
                    {"point-rule", point_rule},
                    {"ratio", ratio},
                    {"offset", offset},
                    {"slices", slices},
                    {"burn-in", burn_in},
                    {"thin", thin},
                    {"qmc-beta", qmc_beta}};
    }
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
    int n = 16;
    int edges = 24;
    int mis = 5;
    int count = 20;
    uint64_t seed = 1;
    double c = 2.0;
    int max_attempts = 32;
    std::string out = "generated";

    json snapshot() const {
        return json{{"n", n},           {"edges", edges},
                    {"mis", mis},       {"count", count},
                    {"seed", seed},     {"c", c},
                    {"max-attempts", max_attempts}, {"out", out}};
    }
};

int cmd_generate(const GenerateArgs& a) {
    Timer timer;
    ArtifactDir art(a.out);
    json summary;
    summary["version"] = 1;
    summary["instances"] = json::array();
    int written = 0;
    int failed = 0;
    for (int k = 0; k < a.count; ++k) {
        const uint64_t child = aqo::Rng::derive(a.seed, "generate-instance",
                                                static_cast<uint64_t>(k));
        aqo::GenerateOptions opt;
        opt.c = a.c;
        opt.max_attempts = a.max_attempts;
        const auto outcome = aqo::generate_hard_instance(a.n, a.edges, a.mis, child, opt);
        json row;
        row["index"] = k;
        row["seed"] = child;
        if (!outcome.instance) {
            const char* why = outcome.status == aqo::GenerateStatus::no_seed_set
                                  ? "no independent set of the requested size"
                                  : "edge completion dead-ended";
            row["status"] = "failed";
            row["reason"] = why;
            std::cerr << "warning: instance " << k << " (seed " << child
                      << ") failed: " << why << "\n";
            ++failed;
            summary["instances"].push_back(row);
            continue;
        }
        const auto& inst = *outcome.instance;
        const auto cs = aqo::census(inst, {a.mis - 1, a.mis});
        row["status"] = "ok";
        row["file"] = instance_file_name(k);
        row["nodes"] = inst.graph.node_count();
        row["edges"] = inst.graph.edge_count();
        row["mis_size"] = a.mis;
        row["mis_unique"] = cs.mis_unique;
        row["minima_at_mis_size"] = cs.by_size.count(a.mis) ? cs.by_size.at(a.mis) : 0;
        row["minima_one_below"] =
            cs.by_size.count(a.mis - 1) ? cs.by_size.at(a.mis - 1) : 0;
        json cluster_sizes = json::array();
        for (const auto& cl : cs.clusters)
            if (!cl.empty() && cl.front().count() == a.mis - 1)
                cluster_sizes.push_back(cl.size());
        row["cluster_sizes_one_below"] = cluster_sizes;
        summary["instances"].push_back(row);
        art.write(instance_file_name(k), aqo::to_json(inst).dump(2) + "\n");
        ++written;
    }
    summary["written"] = written;
    summary["failed"] = failed;
    art.write("summary.json", summary.dump(2) + "\n");
    write_manifest(art, "generate", a.snapshot(), a.seed, {}, timer.seconds());
    std::cout << json{{"written", written}, {"failed", failed}, {"out", a.out}}.dump()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// spectrum

struct SpectrumArgs {
    std::string instance;
    std::string out = "spectrum";
    std::string schedule_file;
    std::string delta_file;
    int grid = 101;
    int levels = 2;
    int track_grid = 101;
    double detector_threshold = 0.5;
    bool no_tracks = false;
    EigenFlags eigen;

    json snapshot() const {
        json j{{"instance", instance},   {"out", out},
               {"schedule-file", schedule_file}, {"delta-file", delta_file},
               {"grid", grid},           {"levels", levels},
               {"track-grid", track_grid}, {"detector-threshold", detector_threshold},
               {"no-tracks", no_tracks}};
        j.update(eigen.snapshot());
        return j;
    }
};

std::vector<double> load_delta_file(const std::string& path) {
    if (path.empty()) return {};
    json j;
    try {
        j = json::parse(aqo::read_file(path));
    } catch (const json::parse_error& ex) {
        throw aqo::InputError(std::string("delta file: ") + ex.what());
    }
    if (j.is_object() && j.contains("delta")) j = j.at("delta");
    if (!j.is_array()) throw aqo::InputError("delta file: expected a JSON array");
    return j.get<std::vector<double>>();
}

int cmd_spectrum(const SpectrumArgs& a) {
    Timer timer;
    const auto inst = aqo::load_instance(a.instance);
    const auto sch = resolve_schedule(a.schedule_file);
    const auto opt = a.eigen.resolve(inst.graph.node_count());
    const auto model = aqo::build_model(inst, load_delta_file(a.delta_file));

    ArtifactDir art(a.out);
    const auto profile = aqo::gap_profile(model, sch, a.grid, a.levels, opt);
    art.write("profile.csv", versioned_profile_csv(profile));
    const auto time = aqo::adiabatic_time(model, sch, profile, opt);

    json line;
    line["s_star"] = profile.s_star;
    line["g_min"] = profile.g_min;
    line["t_a"] = time.t_a;
    if (!a.no_tracks) {
        const auto tracks = aqo::sigma_z_tracks(model, sch, a.track_grid, opt);
        art.write("tracks.csv", versioned_tracks_csv(tracks));
        const auto det = aqo::detect_discontinuity(tracks, a.detector_threshold);
        line["detector_found"] = det.found;
        if (det.s_jump) line["detector_s"] = *det.s_jump;
        line["detector_magnitude"] = det.magnitude;
    }
    write_manifest(art, "spectrum", a.snapshot(), 0, {a.instance}, timer.seconds());
    std::cout << line.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// tune

struct TuneArgs {
    std::string instance;
    std::string out = "tuned";
    std::string schedule_file;
    uint64_t seed = 1;
    bool tracks = false;
    int track_grid = 41;
    double detector_threshold = 0.5;
    TuneFlags tune;
    EigenFlags eigen;

    json snapshot() const {
        json j{{"instance", instance}, {"out", out},
               {"schedule-file", schedule_file}, {"seed", seed},
               {"tracks", tracks},     {"track-grid", track_grid},
               {"detector-threshold", detector_threshold}};
        j.update(tune.snapshot());
        j.update(eigen.snapshot());
        return j;
    }
};

int cmd_tune(const TuneArgs& a) {
    Timer timer;
    const auto inst = aqo::load_instance(a.instance);
    const auto sch = resolve_schedule(a.schedule_file);
    a.eigen.resolve(inst.graph.node_count());  // cap check; the tuner manages solves itself
    const auto cfg = a.tune.tuner_config();
    const auto scfg = a.tune.sampler_config(a.seed);

    ArtifactDir art(a.out);
    const auto run = aqo::run_tuner(inst, sch, cfg, scfg);
    art.write("run.jsonl", aqo::run_log_jsonl(run));

    if (a.tracks) {
        const auto opt = a.eigen.resolve(inst.graph.node_count());
        for (const auto& it : run.iterations) {
            const auto model = aqo::build_model(inst, it.delta_before);
            const auto tr = aqo::sigma_z_tracks(model, sch, a.track_grid, opt);
            char name[40];
            std::snprintf(name, sizeof(name), "tracks-%02d.csv", it.kappa);
            art.write(name, versioned_tracks_csv(tr));
        }
    }

    json line;
    line["solved"] = run.solved_at.has_value();
    line["solved_at"] = run.solved_at ? json(*run.solved_at) : json(nullptr);
    line["iterations"] = run.iterations.size();
    write_manifest(art, "tune", a.snapshot(), a.seed, {a.instance}, timer.seconds());
    std::cout << line.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// batch

struct BatchArgs {
    std::string corpus;
    std::string out = "batch";
    std::string schedule_file;
    uint64_t seed = 1;
    int workers = 1;
    TuneFlags tune;
    EigenFlags eigen;

    json snapshot() const {
        json j{{"corpus", corpus}, {"out", out}, {"schedule-file", schedule_file},
               {"seed", seed},     {"workers", workers}};
        j.update(tune.snapshot());
        j.update(eigen.snapshot());
        return j;
    }
};

int cmd_batch(const BatchArgs& a) {
    Timer timer;
    std::vector<std::string> files;
    if (!fs::is_directory(a.corpus))
        throw aqo::InputError("corpus: not a directory: " + a.corpus);
    for (const auto& entry : fs::directory_iterator(a.corpus)) {
        if (!entry.is_regular_file()) continue;
        const auto name = entry.path().filename().string();
        if (name.rfind("instance-", 0) == 0 && entry.path().extension() == ".json")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw aqo::InputError("corpus: no instance-*.json files in " + a.corpus);

    const auto sch = resolve_schedule(a.schedule_file);
    const auto cfg = a.tune.tuner_config();

    struct Slot {
        std::optional<aqo::TunerRun> run;
        std::string error;
    };
    std::vector<Slot> slots(files.size());

    // Static round-robin assignment keeps results identical for any worker
    // count; every instance derives its sampler seed from the root seed and
    // its position in the sorted file list.
    const int workers = std::max(1, a.workers);
    auto work = [&](int w) {
        for (size_t k = static_cast<size_t>(w); k < files.size();
             k += static_cast<size_t>(workers)) {
            try {
                const auto inst = aqo::load_instance(files[k]);
                a.eigen.resolve(inst.graph.node_count());
                const auto scfg = a.tune.sampler_config(
                    aqo::Rng::derive(a.seed, "batch-instance", k));
                slots[k].run = aqo::run_tuner(inst, sch, cfg, scfg);
            } catch (const std::exception& ex) {
                slots[k].error = ex.what();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    ArtifactDir art(a.out);
    std::vector<aqo::TunerRun> runs;
    json failures = json::array();
    int solved = 0;
    double iter_sum = 0.0;
    int iter_max = 0;
    for (size_t k = 0; k < files.size(); ++k) {
        const auto stem = fs::path(files[k]).stem().string();
        if (!slots[k].run) {
            failures.push_back({{"file", files[k]}, {"error", slots[k].error}});
            std::cerr << "warning: " << files[k] << " failed: " << slots[k].error << "\n";
            continue;
        }
        runs.push_back(*slots[k].run);
        art.write("run-" + stem + ".jsonl", aqo::run_log_jsonl(*slots[k].run));
        if (slots[k].run->solved_at) {
            ++solved;
            iter_sum += *slots[k].run->solved_at;
            iter_max = std::max(iter_max, *slots[k].run->solved_at);
        }
    }
    art.write("histogram.csv", aqo::unsolved_histogram_csv(runs));

    json stats;
    stats["version"] = 1;
    stats["instances"] = runs.size();
    stats["solved"] = solved;
    stats["unsolved"] = static_cast<int>(runs.size()) - solved;
    stats["max_solved_at"] = iter_max;
    stats["mean_solved_at"] = solved ? iter_sum / solved : 0.0;
    stats["failures"] = failures;
    art.write("stats.json", stats.dump(2) + "\n");
    write_manifest(art, "batch", a.snapshot(), a.seed, files, timer.seconds());
    std::cout << json{{"instances", runs.size()},
                      {"solved", solved},
                      {"failures", failures.size()}}
                     .dump()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// rerun: re-execute a command from its manifest into a fresh directory.

json manifest_config(const std::string& path) {
    json m;
    try {
        m = json::parse(aqo::read_file(path));
    } catch (const json::parse_error& ex) {
        throw aqo::InputError(std::string("manifest: ") + ex.what());
    }
    if (!m.is_object() || !m.contains("command") || !m.contains("config"))
        throw aqo::InputError("manifest: missing command or config");
    if (m.at("version").get<int>() != 1)
        throw aqo::InputError("manifest: unsupported version");
    return m;
}

int dispatch_rerun(const std::string& manifest_path, const std::string& out_override);

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
    CLI::App app{"Adiabatic-optimization workbench: hard-instance generation, "
                 "spectra, and transverse-field tuning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string config_path;  // shared binding; each subcommand registers it

    GenerateArgs gen;
    auto* cg = app.add_subcommand("generate", "Generate hard MIS instances");
    cg->add_option("--config", config_path, "JSON file with flag defaults");
    cg->add_option("--n", gen.n, "Node count");
    cg->add_option("--edges", gen.edges, "Initial edge count");
    cg->add_option("--mis", gen.mis, "Planted MIS size");
    cg->add_option("--count", gen.count, "Instances to generate");
    cg->add_option("--seed", gen.seed, "Root seed");
    cg->add_option("--c", gen.c, "Edge penalty weight (> 1)");
    cg->add_option("--max-attempts", gen.max_attempts, "Generator restarts");
    cg->add_option("--out", gen.out, "Artifact directory");

    SpectrumArgs spec;
    auto* cs = app.add_subcommand("spectrum", "Gap profile and spin tracks");
    cs->add_option("--config", config_path, "JSON file with flag defaults");
    cs->add_option("--instance", spec.instance, "Instance JSON file")->required();
    cs->add_option("--out", spec.out, "Artifact directory");
    cs->add_option("--schedule-file", spec.schedule_file, "Tabulated schedule JSON");
    cs->add_option("--delta-file", spec.delta_file, "Per-qubit driver weights JSON");
    cs->add_option("--grid", spec.grid, "Profile grid points");
    cs->add_option("--levels", spec.levels, "Energy levels to track");
    cs->add_option("--track-grid", spec.track_grid, "Track grid points");
    cs->add_option("--detector-threshold", spec.detector_threshold,
                   "Track jump that counts as a discontinuity");
    cs->add_flag("--no-tracks", spec.no_tracks, "Skip the track scan");
    spec.eigen.add_to(cs);

    TuneArgs tune;
    auto* ct = app.add_subcommand("tune", "Run the transverse-field tuner");
    ct->add_option("--config", config_path, "JSON file with flag defaults");
    ct->add_option("--instance", tune.instance, "Instance JSON file")->required();
    ct->add_option("--out", tune.out, "Artifact directory");
    ct->add_option("--schedule-file", tune.schedule_file, "Tabulated schedule JSON");
    ct->add_option("--seed", tune.seed, "Root seed");
    ct->add_flag("--tracks", tune.tracks, "Write per-iteration track CSVs");
    ct->add_option("--track-grid", tune.track_grid, "Track grid points");
    ct->add_option("--detector-threshold", tune.detector_threshold,
                   "Track jump that counts as a discontinuity");
    tune.tune.add_to(ct);
    tune.eigen.add_to(ct);

    BatchArgs batch;
    auto* cb = app.add_subcommand("batch", "Tune every instance in a corpus");
    cb->add_option("--config", config_path, "JSON file with flag defaults");
    cb->add_option("--corpus", batch.corpus, "Directory of instance-*.json")->required();
    cb->add_option("--out", batch.out, "Artifact directory");
    cb->add_option("--schedule-file", batch.schedule_file, "Tabulated schedule JSON");
    cb->add_option("--seed", batch.seed, "Root seed");
    cb->add_option("--workers", batch.workers, "Parallel workers");
    batch.tune.add_to(cb);
    batch.eigen.add_to(cb);

    std::string rerun_manifest;
    std::string rerun_out;
    auto* cr = app.add_subcommand("rerun", "Re-execute a command from its manifest");
    cr->add_option("manifest", rerun_manifest, "Path to manifest.json")->required();
    cr->add_option("--out", rerun_out, "Override the artifact directory")->required();

    // Apply config-file defaults before parsing so explicit flags override.
    if (const auto cfg_file = find_config_arg(argc, argv)) {
        const json j = load_config_json(*cfg_file);
        cfg_get(j, "n", gen.n);
        cfg_get(j, "edges", gen.edges);
        cfg_get(j, "mis", gen.mis);
        cfg_get(j, "count", gen.count);
        cfg_get(j, "seed", gen.seed);
        cfg_get(j, "c", gen.c);
        cfg_get(j, "max-attempts", gen.max_attempts);
        cfg_get(j, "out", gen.out);

        cfg_get(j, "instance", spec.instance);
        cfg_get(j, "out", spec.out);
        cfg_get(j, "schedule-file", spec.schedule_file);
        cfg_get(j, "delta-file", spec.delta_file);
        cfg_get(j, "grid", spec.grid);
        cfg_get(j, "levels", spec.levels);
        cfg_get(j, "track-grid", spec.track_grid);
        cfg_get(j, "detector-threshold", spec.detector_threshold);
        cfg_get(j, "no-tracks", spec.no_tracks);
        spec.eigen.merge_config(j);

        cfg_get(j, "instance", tune.instance);
        cfg_get(j, "out", tune.out);
        cfg_get(j, "schedule-file", tune.schedule_file);
        cfg_get(j, "seed", tune.seed);
        cfg_get(j, "tracks", tune.tracks);
        cfg_get(j, "track-grid", tune.track_grid);
        cfg_get(j, "detector-threshold", tune.detector_threshold);
        tune.tune.merge_config(j);
        tune.eigen.merge_config(j);

        cfg_get(j, "corpus", batch.corpus);
        cfg_get(j, "out", batch.out);
        cfg_get(j, "schedule-file", batch.schedule_file);
        cfg_get(j, "seed", batch.seed);
        cfg_get(j, "workers", batch.workers);
        batch.tune.merge_config(j);
        batch.eigen.merge_config(j);
    }

    app.parse(argc, argv);

    if (cg->parsed()) return cmd_generate(gen);
    if (cs->parsed()) return cmd_spectrum(spec);
    if (ct->parsed()) return cmd_tune(tune);
    if (cb->parsed()) return cmd_batch(batch);
    if (cr->parsed()) return dispatch_rerun(rerun_manifest, rerun_out);
    return 2;
}

// Rebuilds the arg struct of the recorded command from the manifest's
// effective config and runs it against the new output directory.
int dispatch_rerun(const std::string& manifest_path, const std::string& out_override) {
    const json m = manifest_config(manifest_path);
    const std::string command = m.at("command").get<std::string>();
    const json& j = m.at("config");

    if (command == "generate") {
        GenerateArgs a;
        cfg_get(j, "n", a.n);
        cfg_get(j, "edges", a.edges);
        cfg_get(j, "mis", a.mis);
        cfg_get(j, "count", a.count);
        cfg_get(j, "seed", a.seed);
        cfg_get(j, "c", a.c);
        cfg_get(j, "max-attempts", a.max_attempts);
        a.out = out_override;
        return cmd_generate(a);
    }
    if (command == "spectrum") {
        SpectrumArgs a;
        cfg_get(j, "instance", a.instance);
        cfg_get(j, "schedule-file", a.schedule_file);
        cfg_get(j, "delta-file", a.delta_file);
        cfg_get(j, "grid", a.grid);
        cfg_get(j, "levels", a.levels);
        cfg_get(j, "track-grid", a.track_grid);
        cfg_get(j, "detector-threshold", a.detector_threshold);
        cfg_get(j, "no-tracks", a.no_tracks);
        a.eigen.merge_config(j);
        a.out = out_override;
        return cmd_spectrum(a);
    }
    if (command == "tune") {
        TuneArgs a;
        cfg_get(j, "instance", a.instance);
        cfg_get(j, "schedule-file", a.schedule_file);
        cfg_get(j, "seed", a.seed);
        cfg_get(j, "tracks", a.tracks);
        cfg_get(j, "track-grid", a.track_grid);
        cfg_get(j, "detector-threshold", a.detector_threshold);
        a.tune.merge_config(j);
        a.eigen.merge_config(j);
        a.out = out_override;
        return cmd_tune(a);
    }
    if (command == "batch") {
        BatchArgs a;
        cfg_get(j, "corpus", a.corpus);
        cfg_get(j, "schedule-file", a.schedule_file);
        cfg_get(j, "seed", a.seed);
        cfg_get(j, "workers", a.workers);
        a.tune.merge_config(j);
        a.eigen.merge_config(j);
        a.out = out_override;
        return cmd_batch(a);
    }
    throw aqo::InputError("manifest: unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::ParseError& ex) {
        if (ex.get_exit_code() == 0) return 0;  // --help, --version
        std::cerr << ex.what() << "\n";
        return 2;
    } catch (const aqo::CapError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 4;
    } catch (const aqo::InputError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
