#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "aqo/ising.hpp"

namespace aqo {

// Eigensolver controls. The dense path diagonalizes the full 2^n matrix and
// is exact but cubic in the dimension; the iterative path is a matrix-free
// block solver (LOBPCG) that applies H as a bit-flip stencil and never
// materializes it. method automatic picks dense for small n, iterative
// otherwise. Caps are separate from the choice so callers can forbid
// accidentally huge requests.
struct EigenOptions {
    enum class Method { automatic, dense, iterative };

    Method method = Method::automatic;
    int dense_cap = 12;
    int iterative_cap = 24;
    // Extra block columns beyond the requested count; keeps convergence
    // healthy when the excited manifold is nearly degenerate.
    int block_extra = 4;
    int max_iterations = 6000;
    double tol_rel = 1e-9;  // residual per pair, relative to a bound on |H|
    uint64_t seed = 0x5eed;  // deterministic start vectors
};

struct EigenPairs {
    std::vector<double> values;  // ascending, length count
    Eigen::MatrixXd vectors;     // 2^n x count, orthonormal columns
};

// Lowest `count` eigenpairs of A(s) H_driver + B(s) H_problem. warm_start
// may carry eigenvectors from a nearby s to cut iteration counts during
// grid scans; it is ignored if its shape does not match.
EigenPairs lowest_eigenpairs(const TransverseFieldModel& m, const Schedule& sch,
                             double s, int count, const EigenOptions& opt = {},
                             const Eigen::MatrixXd* warm_start = nullptr);

struct SpectrumProfile {
    std::vector<double> s_grid;
    std::vector<std::vector<double>> energies;  // per grid point, lowest L ascending
    std::vector<double> gap;                    // E1 - E0 per grid point
    double s_star = 0.0;                        // refined argmin of the gap
    double g_min = 0.0;                         // gap at s_star
    bool degenerate_at_end = false;             // E1(1) - E0(1) below 1e-9
};

// Uniform grid scan of the lowest `levels` eigenvalues, followed by
// golden-section refinement of the gap minimum between the bracketing grid
// points down to |ds| < 1e-5. The refined minimum is never worse than the
// best grid value.
SpectrumProfile gap_profile(const TransverseFieldModel& m, const Schedule& sch,
                            int grid_size = 101, int levels = 2,
                            const EigenOptions& opt = {});

struct AdiabaticTimeResult {
    double t_a = 0.0;            // (4/pi) * matrix_element / g_min^2, hbar = 1
    double matrix_element = 0.0; // |<0| dH/ds |1>| at s_star
    double g_min = 0.0;
    bool gap_collapsed = false;  // gap below 1e-12: t_a reported as infinity
};

AdiabaticTimeResult adiabatic_time(const TransverseFieldModel& m, const Schedule& sch,
                                   const SpectrumProfile& profile,
                                   const EigenOptions& opt = {});

struct TrackData {
    std::vector<double> s_grid;
    Eigen::MatrixXd z_expect;  // n rows, one column per grid point, entries in [-1, 1]
    std::vector<bool> ground_degenerate;  // per column: E1 - E0 below 1e-9
};

// Ground-state expectation of each sigma^z_i along the schedule. On exact
// ground-state degeneracy the expectation is taken in the eigenvector the
// solver returned and the column is flagged.
TrackData sigma_z_tracks(const TransverseFieldModel& m, const Schedule& sch,
                         int grid_size = 101, const EigenOptions& opt = {});

struct Discontinuity {
    bool found = false;
    std::optional<double> s_jump;  // right edge of the largest jump
    double magnitude = 0.0;        // max_i |z_i(k) - z_i(k-1)| at that edge
};

// Flags the largest adjacent-column single-qubit jump when it exceeds the
// threshold; a fired detector marks an abrupt ground-state rearrangement of
// the kind an anticrossing produces.
Discontinuity detect_discontinuity(const TrackData& t, double threshold);

// CSV with a header row; first column s, then one column per level and a
// trailing gap column.
std::string profile_csv(const SpectrumProfile& profile);

// CSV with a header row; first column s, then one column per qubit.
std::string tracks_csv(const TrackData& tracks);

}  // namespace aqo
