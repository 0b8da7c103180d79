#include <cmath>
#include <numbers>
#include <sstream>

#include "aqo/errors.hpp"
#include "aqo/instance.hpp"
#include "aqo/ising.hpp"
#include "aqo/spectrum.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aqo;

namespace {

TransverseFieldModel single_qubit() {
    TransverseFieldModel m;
    m.n = 1;
    m.h = {-1.0};
    m.delta = {1.0};
    m.rebuild_adjacency();
    return m;
}

TransverseFieldModel model_from(const ProblemInstance& inst) {
    return build_model(inst);
}

ProblemInstance handmade(int n, std::vector<std::pair<int, int>> edges, double c = 2.0) {
    Graph g(n);
    for (auto [i, j] : edges) g.add_edge(i, j);
    return ProblemInstance(std::move(g), c);
}

}  // namespace

TEST_CASE("single qubit matches the closed form") {
    const auto m = single_qubit();
    const auto sch = Schedule::linear_schedule();

    for (double s : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        const auto pairs = lowest_eigenpairs(m, sch, s, 2);
        const double r = std::sqrt(s * s + (1 - s) * (1 - s));
        CHECK(std::abs(pairs.values[0] - (-r)) < 1e-12);
        CHECK(std::abs(pairs.values[1] - r) < 1e-12);
    }

    const auto profile = gap_profile(m, sch);
    CHECK(profile.s_grid.size() == 101);
    CHECK(std::abs(profile.s_star - 0.5) < 2e-5);
    CHECK(std::abs(profile.g_min - std::sqrt(2.0)) < 1e-12);
    CHECK_FALSE(profile.degenerate_at_end);
    for (size_t k = 0; k < profile.gap.size(); ++k) {
        const double s = profile.s_grid[k];
        CHECK(std::abs(profile.gap[k] - 2 * std::sqrt(s * s + (1 - s) * (1 - s))) <
              1e-12);
    }

    const auto ta = adiabatic_time(m, sch, profile);
    CHECK_FALSE(ta.gap_collapsed);
    CHECK(std::abs(ta.g_min - std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(ta.matrix_element - std::sqrt(2.0)) < 1e-9);
    CHECK(std::abs(ta.t_a - 2 * std::sqrt(2.0) / std::numbers::pi) < 1e-9);
}

TEST_CASE("independent qubits add their single-qubit levels") {
    TransverseFieldModel m;
    m.n = 2;
    m.h = {-1.0, -1.0};
    m.delta = {1.0, 1.0};
    m.rebuild_adjacency();
    const auto sch = Schedule::linear_schedule();

    const double s = 0.3;
    const double r = std::sqrt(s * s + (1 - s) * (1 - s));
    const auto pairs = lowest_eigenpairs(m, sch, s, 4);
    CHECK(std::abs(pairs.values[0] - (-2 * r)) < 1e-12);
    CHECK(std::abs(pairs.values[1]) < 1e-12);
    CHECK(std::abs(pairs.values[2]) < 1e-12);
    CHECK(std::abs(pairs.values[3] - 2 * r) < 1e-12);
}

TEST_CASE("dense path agrees with an independently built matrix") {
    const auto out = generate_hard_instance(8, 10, 3, 21);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto sch = Schedule::linear_schedule();

    for (double s : {0.2, 0.6}) {
        const auto v = schedule_values(sch, s);
        const auto dense = testsupport::dense_hamiltonian(m, v.a, v.b);
        const auto reference = testsupport::dense_eigenvalues(dense);
        const auto pairs = lowest_eigenpairs(m, sch, s, 5);
        for (int c = 0; c < 5; ++c)
            CHECK(std::abs(pairs.values[static_cast<size_t>(c)] - reference(c)) <
                  1e-10);
    }
}

TEST_CASE("matrix-free solver matches the dense solver") {
    const auto out = generate_hard_instance(10, 15, 4, 5);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto sch = Schedule::linear_schedule();

    EigenOptions dense_opt;
    dense_opt.method = EigenOptions::Method::dense;
    EigenOptions iter_opt;
    iter_opt.method = EigenOptions::Method::iterative;

    for (double s : {0.2, 0.5, 0.8}) {
        const auto dense = lowest_eigenpairs(m, sch, s, 4, dense_opt);
        const auto iter = lowest_eigenpairs(m, sch, s, 4, iter_opt);
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(dense.values[static_cast<size_t>(c)] -
                           iter.values[static_cast<size_t>(c)]) < 1e-8);

        const Eigen::MatrixXd gram =
            iter.vectors.transpose() * iter.vectors -
            Eigen::MatrixXd::Identity(4, 4);
        CHECK(gram.cwiseAbs().maxCoeff() < 1e-8);

        const auto v = schedule_values(sch, s);
        const auto full = testsupport::dense_hamiltonian(m, v.a, v.b);
        for (int c = 0; c < 4; ++c) {
            const Eigen::VectorXd resid =
                full * iter.vectors.col(c) -
                iter.values[static_cast<size_t>(c)] * iter.vectors.col(c);
            CHECK(resid.norm() < 1e-7);
        }
    }
}

TEST_CASE("warm starts change the work, not the answer") {
    const auto out = generate_hard_instance(10, 15, 4, 9);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto sch = Schedule::linear_schedule();

    EigenOptions iter_opt;
    iter_opt.method = EigenOptions::Method::iterative;

    const auto cold = lowest_eigenpairs(m, sch, 0.5, 3, iter_opt);
    const auto warm = lowest_eigenpairs(m, sch, 0.52, 3, iter_opt, &cold.vectors);
    const auto cold2 = lowest_eigenpairs(m, sch, 0.52, 3, iter_opt);
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(warm.values[static_cast<size_t>(c)] -
                       cold2.values[static_cast<size_t>(c)]) < 1e-8);

    // A warm start with the wrong shape is ignored rather than applied.
    const Eigen::MatrixXd junk = Eigen::MatrixXd::Ones(4, 2);
    const auto ignored = lowest_eigenpairs(m, sch, 0.52, 3, iter_opt, &junk);
    for (int c = 0; c < 3; ++c)
        CHECK(std::abs(ignored.values[static_cast<size_t>(c)] -
                       cold2.values[static_cast<size_t>(c)]) < 1e-8);
}

TEST_CASE("warm starts into a nearly degenerate band still converge") {
    // Just past s = 0 the first excited level sits in a band of single-flip
    // states split only at second order in the problem weight. Warm-started
    // solves here stress the block solver's basis hygiene: if the X block
    // drifts off orthonormality the residuals bottom out just above
    // tolerance and the iteration stalls.
    const auto out = generate_hard_instance(12, 16, 4, 2);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto sch = Schedule::linear_schedule();

    EigenOptions opt;
    opt.method = EigenOptions::Method::iterative;
    const auto base = lowest_eigenpairs(m, sch, 0.0, 2, opt);
    const auto warm = lowest_eigenpairs(m, sch, 0.025, 2, opt, &base.vectors);
    const auto cold = lowest_eigenpairs(m, sch, 0.025, 2, opt);
    for (int c = 0; c < 2; ++c)
        CHECK(std::abs(warm.values[static_cast<size_t>(c)] -
                       cold.values[static_cast<size_t>(c)]) < 1e-8);
}

TEST_CASE("gap profile refinement and invariants") {
    const auto out = generate_hard_instance(9, 12, 3, 3);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto sch = Schedule::linear_schedule();

    EigenOptions dense_opt;
    dense_opt.method = EigenOptions::Method::dense;
    EigenOptions iter_opt;
    iter_opt.method = EigenOptions::Method::iterative;

    const auto dense = gap_profile(m, sch, 21, 3, dense_opt);
    const auto iter = gap_profile(m, sch, 21, 3, iter_opt);

    CHECK(std::abs(dense.g_min - iter.g_min) < 1e-7);
    CHECK(std::abs(dense.s_star - iter.s_star) < 2e-2);

    for (const auto& profile : {dense, iter}) {
        CHECK(profile.s_grid.size() == 21);
        CHECK(profile.energies.size() == 21);
        CHECK(profile.gap.size() == 21);
        CHECK(profile.s_star >= 0.0);
        CHECK(profile.s_star <= 1.0);
        double grid_min = profile.gap[0];
        for (size_t k = 0; k < profile.gap.size(); ++k) {
            CHECK(profile.gap[k] >= -1e-12);
            grid_min = std::min(grid_min, profile.gap[k]);
            CHECK(profile.energies[k].size() == 3);
            CHECK(profile.energies[k][0] <= profile.energies[k][1] + 1e-12);
            CHECK(profile.energies[k][1] <= profile.energies[k][2] + 1e-12);
        }
        CHECK(profile.g_min <= grid_min + 1e-12);
    }
}

TEST_CASE("doubling the transverse terms while halving their envelope is neutral") {
    const auto out = generate_hard_instance(10, 14, 4, 13);
    REQUIRE(out.instance.has_value());
    const auto base = model_from(*out.instance);

    auto doubled = base;
    for (double& d : doubled.delta) d *= 2.0;

    const auto linear = Schedule::linear_schedule();
    const auto halved = Schedule::tabulated(
        {{0.0, 0.5, 0.0}, {0.5, 0.25, 0.5}, {1.0, 0.0, 1.0}});

    EigenOptions iter_opt;
    iter_opt.method = EigenOptions::Method::iterative;
    for (double s : {0.3, 0.7}) {
        const auto a = lowest_eigenpairs(base, linear, s, 3, iter_opt);
        const auto b = lowest_eigenpairs(doubled, halved, s, 3, iter_opt);
        for (int c = 0; c < 3; ++c)
            CHECK(std::abs(a.values[static_cast<size_t>(c)] -
                           b.values[static_cast<size_t>(c)]) < 1e-8);
    }
}

TEST_CASE("degenerate problem endpoints are flagged") {
    const auto tied = handmade(2, {{0, 1}});
    const auto m = model_from(tied);
    const auto sch = Schedule::linear_schedule();

    const auto profile = gap_profile(m, sch, 11);
    CHECK(profile.degenerate_at_end);

    const auto tracks = sigma_z_tracks(m, sch, 11);
    CHECK(tracks.ground_degenerate.back());
    CHECK_FALSE(tracks.ground_degenerate.front());
}

TEST_CASE("tracks interpolate between the uniform state and the planted set") {
    const auto out = generate_hard_instance(8, 10, 3, 7);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);
    const auto planted = out.instance->known_mis;
    REQUIRE(planted.has_value());

    const auto tracks = sigma_z_tracks(m, Schedule::linear_schedule(), 11);
    CHECK(tracks.s_grid.size() == 11);
    CHECK(tracks.z_expect.rows() == 8);
    CHECK(tracks.z_expect.cols() == 11);

    for (int i = 0; i < 8; ++i) {
        CHECK(std::abs(tracks.z_expect(i, 0)) < 1e-9);
        const double planted_sign = planted->test(i) ? 1.0 : -1.0;
        CHECK(std::abs(tracks.z_expect(i, 10) - planted_sign) < 1e-9);
        for (int k = 0; k < 11; ++k) {
            CHECK(tracks.z_expect(i, k) <= 1.0 + 1e-9);
            CHECK(tracks.z_expect(i, k) >= -1.0 - 1e-9);
        }
    }
    for (bool flag : tracks.ground_degenerate) CHECK_FALSE(flag);
}

TEST_CASE("tracks commute with node relabeling") {
    const std::vector<std::pair<int, int>> edges = {
        {0, 1}, {0, 2}, {0, 3}, {2, 4}, {3, 4}};
    const std::vector<int> perm = {4, 0, 1, 2, 3};

    std::vector<std::pair<int, int>> mapped;
    for (auto [i, j] : edges)
        mapped.emplace_back(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);

    const auto a = sigma_z_tracks(model_from(handmade(5, edges)),
                                  Schedule::linear_schedule(), 9);
    const auto b = sigma_z_tracks(model_from(handmade(5, mapped)),
                                  Schedule::linear_schedule(), 9);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 9; ++k)
            CHECK(std::abs(a.z_expect(i, k) - b.z_expect(perm[static_cast<size_t>(i)], k)) <
                  1e-9);
}

TEST_CASE("discontinuity detector fires on a step and stays quiet on smooth data") {
    TrackData t;
    const int grid = 51;
    t.z_expect.resize(2, grid);
    for (int k = 0; k < grid; ++k) {
        const double s = k / 50.0;
        t.s_grid.push_back(s);
        t.z_expect(0, k) = 0.3 * std::sin(3.0 * s);
        t.z_expect(1, k) = s < 0.705 ? -0.4 : 1.1;
    }
    t.ground_degenerate.assign(grid, false);

    const auto hit = detect_discontinuity(t, 0.8);
    CHECK(hit.found);
    REQUIRE(hit.s_jump.has_value());
    CHECK(std::abs(*hit.s_jump - 0.72) < 1e-12);
    CHECK(std::abs(hit.magnitude - 1.5) < 1e-12);

    for (int k = 0; k < grid; ++k) t.z_expect(1, k) = std::tanh(2.0 * (k / 50.0 - 0.5));
    const auto quiet = detect_discontinuity(t, 0.8);
    CHECK_FALSE(quiet.found);
    CHECK_FALSE(quiet.s_jump.has_value());
    CHECK(quiet.magnitude < 0.1);
    CHECK(quiet.magnitude > 0.0);
}

TEST_CASE("argument validation and cap enforcement") {
    const auto m = single_qubit();
    const auto sch = Schedule::linear_schedule();
    CHECK_THROWS_AS(lowest_eigenpairs(m, sch, 0.5, 0), InputError);
    CHECK_THROWS_AS(lowest_eigenpairs(m, sch, 0.5, 3), InputError);
    CHECK_THROWS_AS(gap_profile(m, sch, 1), InputError);
    CHECK_THROWS_AS(gap_profile(m, sch, 11, 1), InputError);
    CHECK_THROWS_AS(sigma_z_tracks(m, sch, 0), InputError);

    const auto big = model_from(handmade(13, {}));
    EigenOptions dense_opt;
    dense_opt.method = EigenOptions::Method::dense;
    CHECK_THROWS_AS(lowest_eigenpairs(big, sch, 0.5, 2, dense_opt), CapError);

    EigenOptions tight;
    tight.dense_cap = 12;
    tight.iterative_cap = 12;
    CHECK_THROWS_AS(lowest_eigenpairs(big, sch, 0.5, 2, tight), CapError);

    EigenOptions capped_iter;
    capped_iter.method = EigenOptions::Method::iterative;
    capped_iter.iterative_cap = 12;
    CHECK_THROWS_AS(lowest_eigenpairs(big, sch, 0.5, 2, capped_iter), CapError);
}

TEST_CASE("an exhausted iteration budget reports residuals") {
    const auto out = generate_hard_instance(10, 15, 4, 5);
    REQUIRE(out.instance.has_value());
    const auto m = model_from(*out.instance);

    EigenOptions iter_opt;
    iter_opt.method = EigenOptions::Method::iterative;
    iter_opt.max_iterations = 2;
    try {
        lowest_eigenpairs(m, Schedule::linear_schedule(), 0.5, 4, iter_opt);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.residuals.size() == 4);
        CHECK(e.residuals[0] > 0.0);
    }
}

TEST_CASE("csv writers emit one labeled row per grid point") {
    const auto m = model_from(handmade(4, {{0, 1}, {1, 2}}));
    const auto sch = Schedule::linear_schedule();

    const auto profile = gap_profile(m, sch, 6);
    const auto csv = profile_csv(profile);
    std::istringstream ps(csv);
    std::string line;
    std::getline(ps, line);
    CHECK(line == "s,E0,E1,gap");
    int rows = 0;
    while (std::getline(ps, line)) ++rows;
    CHECK(rows == 6);

    const auto tracks = sigma_z_tracks(m, sch, 6);
    const auto tcsv = tracks_csv(tracks);
    std::istringstream ts(tcsv);
    std::getline(ts, line);
    CHECK(line == "s,z0,z1,z2,z3");
    std::getline(ts, line);
    CHECK(line.substr(0, 2) == "0,");
    rows = 1;
    while (std::getline(ts, line)) ++rows;
    CHECK(rows == 6);
}
