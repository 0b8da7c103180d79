#pragma once

#include <array>
#include <string>
#include <vector>

#include "aqo/instance.hpp"

namespace aqo {

// Transverse-field Ising encoding of an instance:
//
//   H(s) = A(s) * H_driver + B(s) * H_problem
//   H_driver  = -sum_i delta_i sigma^x_i
//   H_problem = sum_i h_i sigma^z_i + sum_(i,j) J_ij sigma^z_i sigma^z_j + shift
//
// with the convention sigma^z = +1 for a selected node (bit set). Matching
// the cost function -|x| + c * (internal edges) under x_i = (1 + sigma_i)/2
// fixes the coefficients:
//
//   h_i = (c * degree(i) - 2) / 4,  J_ij = c / 4 on edges,
//   shift = c * |E| / 4 - n / 2
//
// so the diagonal of H_problem in the computational basis reproduces the
// cost of every configuration exactly, not just up to a constant.
struct TransverseFieldModel {
    int n = 0;
    std::vector<double> h;
    std::vector<std::pair<std::pair<int, int>, double>> j;  // (i, j) with i < j
    std::vector<double> delta;
    double constant_shift = 0.0;

    // Derived adjacency for O(degree) flip arithmetic.
    std::vector<uint64_t> coupled;                          // mask of J-partners
    std::vector<std::vector<std::pair<int, double>>> coupling_row;

    void rebuild_adjacency();
};

// delta empty means all transverse coefficients start at 1.
TransverseFieldModel build_model(const ProblemInstance& inst,
                                 std::vector<double> delta = {});

// <x| H_problem |x> including the constant shift.
double diagonal_energy(const TransverseFieldModel& m, NodeSet x);

// diagonal_energy(flip_i(x)) - diagonal_energy(x), computed incrementally.
double flip_cost(const TransverseFieldModel& m, NodeSet x, int i);

// Steepest single-bit-flip descent: repeatedly applies the most negative
// flip (lowest index on ties) until no flip lowers the diagonal energy.
// Deterministic and idempotent; every maximal independent set is a fixed
// point of the models produced by build_model.
NodeSet gradient_descent(const TransverseFieldModel& m, NodeSet x);

// Annealing envelopes A(s), B(s) on s in [0, 1]. The linear kind is
// A = 1 - s, B = s. Tabulated schedules interpolate each envelope with a
// monotone cubic (Fritsch-Carlson slopes), so values stay within the table's
// range and derivatives are available everywhere.
struct Schedule {
    enum class Kind { linear, tabulated };

    Kind kind = Kind::linear;
    std::vector<std::array<double, 3>> table;  // rows (s, A, B), s strictly increasing
    std::string energy_unit = "dimensionless";

    static Schedule linear_schedule();
    static Schedule tabulated(std::vector<std::array<double, 3>> rows,
                              std::string energy_unit = "dimensionless");

    // Enforces driver dominance at the start (A(0) > 10 B(0)), problem
    // dominance at the end (B(1) > 10 A(1)), nonnegative envelopes, and a
    // strictly increasing s column spanning [0, 1].
    void validate() const;
};

struct ScheduleValues {
    double a = 0.0;
    double b = 0.0;
    double da = 0.0;
    double db = 0.0;
};

// Envelope values and derivatives at s; s outside [0, 1] is an input error.
ScheduleValues schedule_values(const Schedule& sch, double s);

nlohmann::json to_json(const Schedule& sch);
Schedule schedule_from_json(const nlohmann::json& j);
Schedule load_schedule(const std::string& path);

}  // namespace aqo
