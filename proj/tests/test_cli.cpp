// End-to-end checks of the aqo command-line tool: exit codes, artifact
// layout, manifest-driven reruns, config merging and the eigensolver caps.
// The binary path arrives as the first positional argument (CMake passes
// $<TARGET_FILE:aqo>); everything runs in throwaway temp directories.

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_aqo;  // path to the aqo binary under test

struct RunResult {
    int exit_code = -1;
    std::string out;  // stdout and stderr combined
};

RunResult run(const std::string& args) {
    const std::string cmd = g_aqo + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (size_t got = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

json first_json_line(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '{') return json::parse(line);
    }
    FAIL("no JSON line in output: ", text);
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("aqo-cli-test-" + std::to_string(rand()) + "-" +
                std::to_string(rand()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
};

// One small generated instance shared by the spectrum/tune tests.
std::string make_instance(const TempDir& tmp) {
    const std::string out = tmp.sub("gen");
    const auto r = run("generate --n 8 --edges 12 --mis 3 --count 1 --seed 5 --out " + out);
    REQUIRE(r.exit_code == 0);
    return out + "/instance-000.json";
}

}  // namespace

TEST_CASE("generate writes instances, census summary and manifest") {
    TempDir tmp;
    const auto r = run("generate --n 8 --edges 12 --mis 3 --count 2 --seed 5 --out " + tmp.sub("g"));
    CHECK(r.exit_code == 0);
    const json top = first_json_line(r.out);
    CHECK(top.at("written").get<int>() == 2);
    CHECK(fs::exists(tmp.path / "g" / "instance-000.json"));
    CHECK(fs::exists(tmp.path / "g" / "instance-001.json"));
    CHECK(fs::exists(tmp.path / "g" / "summary.json"));

    const json manifest = json::parse(slurp(tmp.path / "g" / "manifest.json"));
    CHECK(manifest.at("command") == "generate");
    CHECK(manifest.at("digest").get<std::string>().rfind("fnv1a64:", 0) == 0);
    CHECK(manifest.at("config").at("seed").get<uint64_t>() == 5);

    const std::string summary = slurp(tmp.path / "g" / "summary.json");
    CHECK(summary.find("mis_unique") != std::string::npos);
}

TEST_CASE("generate output is a pure function of the seed") {
    TempDir tmp;
    REQUIRE(run("generate --n 8 --edges 12 --mis 3 --count 1 --seed 9 --out " + tmp.sub("a")).exit_code == 0);
    REQUIRE(run("generate --n 8 --edges 12 --mis 3 --count 1 --seed 9 --out " + tmp.sub("b")).exit_code == 0);
    REQUIRE(run("generate --n 8 --edges 12 --mis 3 --count 1 --seed 10 --out " + tmp.sub("c")).exit_code == 0);
    CHECK(slurp(tmp.path / "a" / "instance-000.json") == slurp(tmp.path / "b" / "instance-000.json"));
    CHECK(slurp(tmp.path / "a" / "instance-000.json") != slurp(tmp.path / "c" / "instance-000.json"));
}

TEST_CASE("spectrum emits versioned CSVs and a summary line") {
    TempDir tmp;
    const std::string inst = make_instance(tmp);

    const auto r = run("spectrum --instance " + inst + " --out " + tmp.sub("s") + " --grid 41");
    CHECK(r.exit_code == 0);
    const json top = first_json_line(r.out);
    CHECK(top.contains("s_star"));
    CHECK(top.contains("g_min"));
    CHECK(top.contains("t_a"));
    CHECK(top.contains("detector_found"));
    CHECK(top.at("g_min").get<double>() > 0.0);

    const std::string profile = slurp(tmp.path / "s" / "profile.csv");
    CHECK(profile.rfind("# aqo spectrum-profile 1\n", 0) == 0);
    const std::string tracks = slurp(tmp.path / "s" / "tracks.csv");
    CHECK(tracks.rfind("# aqo sigma-z-tracks 1\n", 0) == 0);

    const auto r2 = run("spectrum --instance " + inst + " --out " + tmp.sub("s2") + " --grid 41 --no-tracks");
    CHECK(r2.exit_code == 0);
    CHECK_FALSE(fs::exists(tmp.path / "s2" / "tracks.csv"));
    CHECK_FALSE(first_json_line(r2.out).contains("detector_found"));
}

TEST_CASE("tune solves an easy instance at the first check and logs it") {
    TempDir tmp;
    const std::string inst = make_instance(tmp);

    const auto r = run("tune --instance " + inst + " --out " + tmp.sub("t") + " --seed 3");
    CHECK(r.exit_code == 0);
    const json top = first_json_line(r.out);
    CHECK(top.at("solved").get<bool>());
    CHECK(top.at("solved_at").get<int>() == 1);

    std::ifstream log(tmp.path / "t" / "run.jsonl");
    std::string line;
    REQUIRE(std::getline(log, line));
    const json it = json::parse(line);
    CHECK(it.at("kappa").get<int>() == 1);
    CHECK(it.at("delta_before").size() == 8);
    CHECK(it.at("success").get<bool>());
}

TEST_CASE("batch aggregates runs into stats and a histogram") {
    TempDir tmp;
    REQUIRE(run("generate --n 8 --edges 12 --mis 3 --count 2 --seed 5 --out " + tmp.sub("c")).exit_code == 0);

    const auto r = run("batch --corpus " + tmp.sub("c") + " --out " + tmp.sub("b") + " --seed 1");
    CHECK(r.exit_code == 0);
    const json stats = json::parse(slurp(tmp.path / "b" / "stats.json"));
    CHECK(stats.at("instances").get<int>() == 2);
    CHECK(stats.at("solved").get<int>() == 2);
    CHECK(fs::exists(tmp.path / "b" / "run-instance-000.jsonl"));
    CHECK(fs::exists(tmp.path / "b" / "run-instance-001.jsonl"));

    const std::string hist = slurp(tmp.path / "b" / "histogram.csv");
    CHECK(hist.rfind("iteration,unsolved\n", 0) == 0);

    // Worker count must not affect any artifact byte.
    const auto r2 = run("batch --corpus " + tmp.sub("c") + " --out " + tmp.sub("b2") + " --seed 1 --workers 2");
    CHECK(r2.exit_code == 0);
    const json m1 = json::parse(slurp(tmp.path / "b" / "manifest.json"));
    const json m2 = json::parse(slurp(tmp.path / "b2" / "manifest.json"));
    CHECK(m1.at("digest") == m2.at("digest"));
}

TEST_CASE("rerun reproduces artifacts byte for byte") {
    TempDir tmp;
    const std::string inst = make_instance(tmp);
    REQUIRE(run("spectrum --instance " + inst + " --out " + tmp.sub("s") + " --grid 31").exit_code == 0);

    const auto r = run("rerun " + tmp.sub("s") + "/manifest.json --out " + tmp.sub("r"));
    CHECK(r.exit_code == 0);
    for (const char* name : {"profile.csv", "tracks.csv"})
        CHECK(slurp(tmp.path / "s" / name) == slurp(tmp.path / "r" / name));
    const json m1 = json::parse(slurp(tmp.path / "s" / "manifest.json"));
    const json m2 = json::parse(slurp(tmp.path / "r" / "manifest.json"));
    CHECK(m1.at("digest") == m2.at("digest"));
}

TEST_CASE("config file supplies defaults, flags override it") {
    TempDir tmp;
    const std::string inst = make_instance(tmp);
    {
        std::ofstream cfg(tmp.path / "cfg.json");
        cfg << R"({"grid": 21, "levels": 2})";
    }
    const std::string base = "spectrum --instance " + inst + " --config " + tmp.sub("cfg.json") + " --no-tracks";

    REQUIRE(run(base + " --out " + tmp.sub("a")).exit_code == 0);
    const json ma = json::parse(slurp(tmp.path / "a" / "manifest.json"));
    CHECK(ma.at("config").at("grid").get<int>() == 21);

    REQUIRE(run(base + " --out " + tmp.sub("b") + " --grid 31").exit_code == 0);
    const json mb = json::parse(slurp(tmp.path / "b" / "manifest.json"));
    CHECK(mb.at("config").at("grid").get<int>() == 31);
}

TEST_CASE("eigensolver caps fail fast and name their source") {
    TempDir tmp;
    const std::string inst = make_instance(tmp);
    const std::string base = "spectrum --instance " + inst + " --out " + tmp.sub("x") + " --method dense --no-tracks";

    setenv("AQO_DENSE_CAP", "4", 1);
    const auto r = run(base);
    unsetenv("AQO_DENSE_CAP");
    CHECK(r.exit_code == 4);
    CHECK(r.out.find("AQO_DENSE_CAP") != std::string::npos);

    // A flag outranks the environment.
    setenv("AQO_DENSE_CAP", "4", 1);
    const auto r2 = run("spectrum --instance " + inst + " --out " + tmp.sub("y") +
                        " --method dense --dense-cap 16 --grid 21 --no-tracks");
    unsetenv("AQO_DENSE_CAP");
    CHECK(r2.exit_code == 0);

    setenv("AQO_DENSE_CAP", "banana", 1);
    const auto r3 = run(base);
    unsetenv("AQO_DENSE_CAP");
    CHECK(r3.exit_code == 3);
}

TEST_CASE("input errors exit with code 3") {
    TempDir tmp;
    CHECK(run("spectrum --instance " + tmp.sub("missing.json") + " --out " + tmp.sub("o")).exit_code == 3);

    {
        std::ofstream bad(tmp.path / "bad.json");
        bad << "{ not json";
    }
    CHECK(run("spectrum --instance " + tmp.sub("bad.json") + " --out " + tmp.sub("o2")).exit_code == 3);
}

TEST_CASE("help and version exit cleanly") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("--version").exit_code == 0);
    CHECK(run("spectrum --help").exit_code == 0);
}

int main(int argc, char** argv) {
    std::vector<char*> pass{argv[0]};
    for (int i = 1; i < argc; ++i) {
        if (g_aqo.empty() && argv[i][0] != '-')
            g_aqo = argv[i];
        else
            pass.push_back(argv[i]);
    }
    if (g_aqo.empty()) {
        std::fprintf(stderr, "usage: test_cli <path-to-aqo-binary> [doctest options]\n");
        return 1;
    }
    doctest::Context ctx(static_cast<int>(pass.size()), pass.data());
    return ctx.run();
}
