#include "aqo/ising.hpp"

#include <algorithm>
#include <cmath>

#include "aqo/errors.hpp"
#include "aqo/io.hpp"

namespace aqo {

void TransverseFieldModel::rebuild_adjacency() {
    coupled.assign(static_cast<size_t>(n), 0);
    coupling_row.assign(static_cast<size_t>(n), {});
    for (const auto& [pair, value] : j) {
        auto [a, b] = pair;
        coupled[a] |= uint64_t{1} << b;
        coupled[b] |= uint64_t{1} << a;
        coupling_row[a].emplace_back(b, value);
        coupling_row[b].emplace_back(a, value);
    }
}

TransverseFieldModel build_model(const ProblemInstance& inst, std::vector<double> delta) {
    const int n = inst.graph.node_count();
    if (delta.empty()) delta.assign(static_cast<size_t>(n), 1.0);
    if (static_cast<int>(delta.size()) != n)
        throw InputError("build_model: delta length does not match node count");
    for (double d : delta)
        if (!(d > 0.0)) throw InputError("build_model: delta entries must be positive");

    TransverseFieldModel m;
    m.n = n;
    m.h.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        m.h[i] = (inst.c * inst.graph.degree(i) - 2.0) / 4.0;
    for (auto [a, b] : inst.graph.edges())
        m.j.push_back({{a, b}, inst.c / 4.0});
    m.delta = std::move(delta);
    m.constant_shift = inst.c * inst.graph.edge_count() / 4.0 - n / 2.0;
    m.rebuild_adjacency();
    return m;
}

double diagonal_energy(const TransverseFieldModel& m, NodeSet x) {
    double e = m.constant_shift;
    for (int i = 0; i < m.n; ++i) e += m.h[i] * (x.test(i) ? 1.0 : -1.0);
    for (const auto& [pair, value] : m.j) {
        const double si = x.test(pair.first) ? 1.0 : -1.0;
        const double sj = x.test(pair.second) ? 1.0 : -1.0;
        e += value * si * sj;
    }
    return e;
}

double flip_cost(const TransverseFieldModel& m, NodeSet x, int i) {
    if (i < 0 || i >= m.n) throw InputError("flip_cost: node index out of range");
    double field = m.h[i];
    for (auto [j, value] : m.coupling_row[i])
        field += value * (x.test(j) ? 1.0 : -1.0);
    return -2.0 * (x.test(i) ? 1.0 : -1.0) * field;
}

NodeSet gradient_descent(const TransverseFieldModel& m, NodeSet x) {
    while (true) {
        double best = 0.0;
        int pick = -1;
        for (int i = 0; i < m.n; ++i) {
            const double d = flip_cost(m, x, i);
            if (d < best) {
                best = d;
                pick = i;
            }
        }
        if (pick < 0) return x;
        x.flip(pick);
    }
}

namespace {

// Fritsch-Carlson slopes for a shape-preserving cubic through (t, y).
std::vector<double> pchip_slopes(const std::vector<double>& t, const std::vector<double>& y) {
    const size_t k = t.size();
    std::vector<double> d(k - 1), slope(k);
    for (size_t i = 0; i + 1 < k; ++i) d[i] = (y[i + 1] - y[i]) / (t[i + 1] - t[i]);
    slope[0] = d[0];
    slope[k - 1] = d[k - 2];
    for (size_t i = 1; i + 1 < k; ++i)
        slope[i] = (d[i - 1] * d[i] > 0.0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
    for (size_t i = 0; i + 1 < k; ++i) {
        if (d[i] == 0.0) {
            slope[i] = slope[i + 1] = 0.0;
            continue;
        }
        const double alpha = slope[i] / d[i];
        const double beta = slope[i + 1] / d[i];
        const double norm2 = alpha * alpha + beta * beta;
        if (norm2 > 9.0) {
            const double tau = 3.0 / std::sqrt(norm2);
            slope[i] = tau * alpha * d[i];
            slope[i + 1] = tau * beta * d[i];
        }
    }
    return slope;
}

// Cubic Hermite value and derivative on the interval containing s.
std::pair<double, double> pchip_eval(const std::vector<double>& t,
                                     const std::vector<double>& y,
                                     const std::vector<double>& slope, double s) {
    size_t i = 0;
    while (i + 2 < t.size() && s > t[i + 1]) ++i;
    const double w = t[i + 1] - t[i];
    const double u = (s - t[i]) / w;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    const double value =
        h00 * y[i] + h10 * w * slope[i] + h01 * y[i + 1] + h11 * w * slope[i + 1];
    const double dh00 = (6 * u * u - 6 * u) / w;
    const double dh10 = 3 * u * u - 4 * u + 1;
    const double dh01 = (6 * u - 6 * u * u) / w;
    const double dh11 = 3 * u * u - 2 * u;
    const double deriv =
        dh00 * y[i] + dh10 * slope[i] + dh01 * y[i + 1] + dh11 * slope[i + 1];
    return {value, deriv};
}

}  // namespace

Schedule Schedule::linear_schedule() {
    Schedule sch;
    sch.kind = Kind::linear;
    sch.table = {{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}};
    return sch;
}

Schedule Schedule::tabulated(std::vector<std::array<double, 3>> rows, std::string energy_unit) {
    Schedule sch;
    sch.kind = Kind::tabulated;
    sch.table = std::move(rows);
    sch.energy_unit = std::move(energy_unit);
    sch.validate();
    return sch;
}

void Schedule::validate() const {
    if (kind == Kind::linear) return;
    if (table.size() < 2) throw InputError("schedule: table needs at least two rows");
    for (size_t i = 0; i < table.size(); ++i) {
        if (i > 0 && !(table[i][0] > table[i - 1][0]))
            throw InputError("schedule: s column must be strictly increasing");
        if (table[i][1] < 0.0 || table[i][2] < 0.0)
            throw InputError("schedule: envelopes must be nonnegative");
    }
    if (std::abs(table.front()[0]) > 1e-12 || std::abs(table.back()[0] - 1.0) > 1e-12)
        throw InputError("schedule: s column must span [0, 1]");
    // Driver must dominate at the start and the problem term at the end;
    // required so the initial ground state is the uniform superposition and
    // the final one encodes the optimum.
    if (!(table.front()[1] > 10.0 * table.front()[2]))
        throw InputError("schedule: A(0) must exceed 10 B(0)");
    if (!(table.back()[2] > 10.0 * table.back()[1]))
        throw InputError("schedule: B(1) must exceed 10 A(1)");
}

ScheduleValues schedule_values(const Schedule& sch, double s) {
    if (!(s >= 0.0 && s <= 1.0))
        throw InputError("schedule_values: s must lie in [0, 1], got " + format_double(s));
    if (sch.kind == Schedule::Kind::linear) return {1.0 - s, s, -1.0, 1.0};

    std::vector<double> t, a, b;
    t.reserve(sch.table.size());
    a.reserve(sch.table.size());
    b.reserve(sch.table.size());
    for (const auto& row : sch.table) {
        t.push_back(row[0]);
        a.push_back(row[1]);
        b.push_back(row[2]);
    }
    const auto sa = pchip_slopes(t, a);
    const auto sb = pchip_slopes(t, b);
    const auto [av, ad] = pchip_eval(t, a, sa, s);
    const auto [bv, bd] = pchip_eval(t, b, sb, s);
    return {av, bv, ad, bd};
}

nlohmann::json to_json(const Schedule& sch) {
    nlohmann::json j;
    j["kind"] = sch.kind == Schedule::Kind::linear ? "linear" : "tabulated";
    j["table"] = nlohmann::json::array();
    for (const auto& row : sch.table) j["table"].push_back({row[0], row[1], row[2]});
    j["energy_unit"] = sch.energy_unit;
    return j;
}

Schedule schedule_from_json(const nlohmann::json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "linear") return Schedule::linear_schedule();
        if (kind != "tabulated") throw InputError("schedule: unknown kind " + kind);
        std::vector<std::array<double, 3>> rows;
        for (const auto& row : j.at("table"))
            rows.push_back({row.at(0).get<double>(), row.at(1).get<double>(),
                            row.at(2).get<double>()});
        return Schedule::tabulated(std::move(rows),
                                   j.value("energy_unit", std::string("dimensionless")));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("schedule file: ") + e.what());
    }
}

Schedule load_schedule(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    return schedule_from_json(j);
}

}  // namespace aqo
