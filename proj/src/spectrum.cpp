#include "aqo/spectrum.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "aqo/errors.hpp"
#include "aqo/io.hpp"
#include "aqo/rng.hpp"

namespace aqo {

namespace {

// Diagonal of H_problem over all 2^n states, built incrementally: each state
// extends the state without its lowest set bit by one flip.
std::vector<double> diagonal_table(const TransverseFieldModel& m) {
    const uint64_t dim = uint64_t{1} << m.n;
    std::vector<double> diag(dim);
    diag[0] = diagonal_energy(m, NodeSet{0});
    for (uint64_t x = 1; x < dim; ++x) {
        const uint64_t rest = x & (x - 1);
        diag[x] = diag[rest] + flip_cost(m, NodeSet{rest}, std::countr_zero(x));
    }
    return diag;
}

// Matrix-free application of a * H_driver + b * H_problem. The driver term
// couples states differing in one bit, walked as contiguous half-blocks per
// qubit for cache locality.
class HamiltonianApply {
public:
    HamiltonianApply(const TransverseFieldModel& m, double a, double b)
        : m_(&m), diag_(diagonal_table(m)), a_(a), b_(b) {}

    void set_envelopes(double a, double b) {
        a_ = a;
        b_ = b;
    }

    uint64_t dim() const { return uint64_t{1} << m_->n; }

    // Upper bound on the operator norm: triangle inequality over terms.
    double norm_bound() const {
        double sum_delta = 0.0;
        for (double d : m_->delta) sum_delta += d;
        double max_diag = 0.0;
        for (double d : diag_) max_diag = std::max(max_diag, std::abs(d));
        return std::abs(a_) * sum_delta + std::abs(b_) * max_diag;
    }

    void apply(const double* in, double* out) const {
        const uint64_t n = dim();
        for (uint64_t x = 0; x < n; ++x) out[x] = b_ * diag_[x] * in[x];
        for (int i = 0; i < m_->n; ++i) {
            const double w = a_ * m_->delta[i];
            if (w == 0.0) continue;
            const uint64_t bit = uint64_t{1} << i;
            for (uint64_t base = 0; base < n; base += 2 * bit) {
                for (uint64_t off = 0; off < bit; ++off) {
                    const uint64_t lo = base + off;
                    const uint64_t hi = lo + bit;
                    out[lo] -= w * in[hi];
                    out[hi] -= w * in[lo];
                }
            }
        }
    }

    void apply_block(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const {
        out.resize(in.rows(), in.cols());
        for (int c = 0; c < in.cols(); ++c) apply(in.col(c).data(), out.col(c).data());
    }

    const std::vector<double>& diagonal() const { return diag_; }
    double a() const { return a_; }
    double b() const { return b_; }

private:
    const TransverseFieldModel* m_;
    std::vector<double> diag_;
    double a_;
    double b_;
};

EigenPairs dense_solve(const HamiltonianApply& h, const TransverseFieldModel& m,
                       int count) {
    const int dim = static_cast<int>(h.dim());
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(dim, dim);
    for (int x = 0; x < dim; ++x) full(x, x) = h.b() * h.diagonal()[x];
    for (int i = 0; i < m.n; ++i) {
        const double w = h.a() * m.delta[i];
        const int bit = 1 << i;
        for (int x = 0; x < dim; ++x)
            if (!(x & bit)) {
                full(x, x | bit) -= w;
                full(x | bit, x) -= w;
            }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full);
    EigenPairs out;
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
    out.vectors = es.eigenvectors().leftCols(count);
    return out;
}

// Orthonormalizes the columns of v against the fixed orthonormal blocks in
// `against` and then among themselves (modified Gram-Schmidt, two passes).
// Columns whose norm collapses are dropped. When hv is non-null it receives
// the identical column operations, preserving hv = H v for inputs that
// already satisfy it.
void orthonormalize(Eigen::MatrixXd& v, Eigen::MatrixXd* hv,
                    const std::vector<std::pair<const Eigen::MatrixXd*,
                                                const Eigen::MatrixXd*>>& against) {
    const double drop_tol = 1e-8;
    std::vector<int> keep;
    for (int c = 0; c < v.cols(); ++c) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& [q, hq] : against) {
                for (int k = 0; k < q->cols(); ++k) {
                    const double d = q->col(k).dot(v.col(c));
                    v.col(c) -= d * q->col(k);
                    if (hv) hv->col(c) -= d * hq->col(k);
                }
            }
            for (int prev : keep) {
                const double d = v.col(prev).dot(v.col(c));
                v.col(c) -= d * v.col(prev);
                if (hv) hv->col(c) -= d * hv->col(prev);
            }
        }
        const double norm = v.col(c).norm();
        if (norm < drop_tol) continue;
        v.col(c) /= norm;
        if (hv) hv->col(c) /= norm;
        keep.push_back(c);
    }
    if (static_cast<int>(keep.size()) != v.cols()) {
        Eigen::MatrixXd vk(v.rows(), keep.size());
        Eigen::MatrixXd hk;
        if (hv) hk.resize(v.rows(), keep.size());
        for (size_t k = 0; k < keep.size(); ++k) {
            vk.col(static_cast<int>(k)) = v.col(keep[k]);
            if (hv) hk.col(static_cast<int>(k)) = hv->col(keep[k]);
        }
        v = std::move(vk);
        if (hv) *hv = std::move(hk);
    }
}

void seeded_random_block(Eigen::MatrixXd& v, uint64_t seed) {
    Rng rng(seed);
    for (int c = 0; c < v.cols(); ++c)
        for (Eigen::Index r = 0; r < v.rows(); ++r)
            v(r, c) = rng.unit_real() - 0.5;
}

// Block LOBPCG over the matrix-free operator: the search basis is
// [X | W | P] with X the current Ritz block, W the orthonormalized
// residuals (the only columns that cost fresh operator applications), and P
// the previous step's non-X component. The full basis is orthonormalized
// every iteration, so near-degenerate levels reduce the basis rank instead
// of corrupting the small eigenproblem.
EigenPairs lobpcg_solve(const HamiltonianApply& h, int count, const EigenOptions& opt,
                        const Eigen::MatrixXd* warm_start) {
    const uint64_t dim = h.dim();
    const int nb = static_cast<int>(
        std::min<uint64_t>(dim, static_cast<uint64_t>(count + opt.block_extra)));
    const double tol = opt.tol_rel * std::max(h.norm_bound(), 1e-30);

    Eigen::MatrixXd x(dim, nb);
    seeded_random_block(x, opt.seed);
    if (warm_start && warm_start->rows() == static_cast<Eigen::Index>(dim))
        x.leftCols(std::min<int>(nb, static_cast<int>(warm_start->cols()))) =
            warm_start->leftCols(std::min<int>(nb, static_cast<int>(warm_start->cols())));
    orthonormalize(x, nullptr, {});
    while (static_cast<int>(x.cols()) < nb) {
        Eigen::MatrixXd extra(dim, nb - x.cols());
        seeded_random_block(extra, opt.seed + 1000 + static_cast<uint64_t>(x.cols()));
        orthonormalize(extra, nullptr, {{&x, nullptr}});
        if (extra.cols() == 0) break;
        Eigen::MatrixXd merged(dim, x.cols() + extra.cols());
        merged << x, extra;
        x = std::move(merged);
    }

    Eigen::MatrixXd hx;
    h.apply_block(x, hx);

    // Initial Ritz rotation so residuals are meaningful from the start.
    {
        Eigen::MatrixXd g = x.transpose() * hx;
        g = 0.5 * (g + g.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        x = (x * es.eigenvectors()).eval();
        hx = (hx * es.eigenvectors()).eval();
    }

    Eigen::MatrixXd p(dim, 0), hp(dim, 0);
    Eigen::VectorXd theta(x.cols());
    for (int c = 0; c < x.cols(); ++c) theta(c) = x.col(c).dot(hx.col(c));
    if (x.cols() < count)
        throw NumericalError("lowest_eigenpairs: start basis is rank deficient",
                             {});

    std::vector<double> residuals(static_cast<size_t>(count), 0.0);
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        // The tracked image hx = H x is maintained through column
        // combinations; refresh it periodically so round-off cannot pile up
        // over long runs.
        if (iter % 64 == 63) h.apply_block(x, hx);
        Eigen::MatrixXd r = hx - x * theta.asDiagonal();
        bool converged = true;
        for (int c = 0; c < count; ++c) {
            residuals[static_cast<size_t>(c)] = r.col(c).norm();
            if (residuals[static_cast<size_t>(c)] > tol) converged = false;
        }
        if (converged) {
            EigenPairs out;
            out.values.assign(theta.data(), theta.data() + count);
            out.vectors = x.leftCols(count);
            return out;
        }

        Eigen::MatrixXd w = r;
        for (int c = 0; c < w.cols(); ++c) {
            const double norm = w.col(c).norm();
            if (norm > 0.0) w.col(c) /= norm;
        }
        orthonormalize(w, nullptr, {{&x, nullptr}, {&p, nullptr}});
        if (w.cols() == 0) {
            // Residual directions already live in the basis span; push a
            // fresh seeded direction to break the stall.
            w.resize(dim, 1);
            seeded_random_block(w, opt.seed + static_cast<uint64_t>(iter) + 1);
            orthonormalize(w, nullptr, {{&x, nullptr}, {&p, nullptr}});
            if (w.cols() == 0) break;
        }
        Eigen::MatrixXd hw;
        h.apply_block(w, hw);

        // Re-orthonormalize the whole basis, X block included, with the
        // tracked images mirrored through the same column operations. X
        // alone drifts off orthonormality over hundreds of steps, and once
        // that drift reaches the residual scale the residuals stop meaning
        // anything and the iteration stalls just above tolerance.
        const int old_x_cols = static_cast<int>(x.cols());
        const int nw = static_cast<int>(w.cols());
        const int np = static_cast<int>(p.cols());
        Eigen::MatrixXd basis(dim, old_x_cols + nw + np);
        Eigen::MatrixXd hbasis(dim, old_x_cols + nw + np);
        basis << x, w, p;
        hbasis << hx, hw, hp;
        orthonormalize(basis, &hbasis, {});
        const int nbas = static_cast<int>(basis.cols());
        if (nbas < count) break;

        Eigen::MatrixXd g = basis.transpose() * hbasis;
        g = 0.5 * (g + g.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        const int nx = std::min(nb, nbas);
        const Eigen::MatrixXd u = es.eigenvectors().leftCols(nx);

        Eigen::MatrixXd xn = basis * u;
        Eigen::MatrixXd hxn = hbasis * u;

        // Next P: the part of the step beyond the old X span, expressed
        // without extra operator applications.
        const int tail_cols = nbas - old_x_cols;
        if (tail_cols > 0) {
            const Eigen::MatrixXd u_tail = u.bottomRows(tail_cols);
            p = basis.rightCols(tail_cols) * u_tail;
            hp = hbasis.rightCols(tail_cols) * u_tail;
        } else {
            p.resize(dim, 0);
            hp.resize(dim, 0);
        }

        x = std::move(xn);
        hx = std::move(hxn);
        theta = es.eigenvalues().head(nx);
    }

    throw NumericalError("lowest_eigenpairs: block solver did not reach tolerance",
                         residuals);
}

void grid_or_die(int grid_size) {
    if (grid_size < 2) throw InputError("grid size must be at least 2");
}

struct Solver {
    HamiltonianApply h;
    const Schedule* sch;
    EigenOptions opt;
    bool dense;
    int count;
    Eigen::MatrixXd warm;

    Solver(const TransverseFieldModel& m, const Schedule& schedule, int count,
           const EigenOptions& options)
        : h(m, 0.0, 1.0), sch(&schedule), opt(options), dense(false), count(count) {
        const uint64_t dim = uint64_t{1} << m.n;
        if (count < 1 || static_cast<uint64_t>(count) > dim)
            throw InputError("lowest_eigenpairs: count out of range");
        switch (opt.method) {
            case EigenOptions::Method::dense:
                if (m.n > opt.dense_cap)
                    throw CapError("lowest_eigenpairs: n exceeds the dense cap (" +
                                   std::to_string(opt.dense_cap) +
                                   "); raise it or use the iterative method");
                dense = true;
                break;
            case EigenOptions::Method::iterative:
                if (m.n > opt.iterative_cap)
                    throw CapError("lowest_eigenpairs: n exceeds the iterative cap (" +
                                   std::to_string(opt.iterative_cap) + ")");
                dense = false;
                break;
            case EigenOptions::Method::automatic:
                // Dense is exact and fast up to a few hundred states; the
                // block solver wins beyond that.
                if (m.n <= 9) {
                    if (m.n > opt.dense_cap && m.n > opt.iterative_cap)
                        throw CapError("lowest_eigenpairs: n exceeds both caps");
                    dense = m.n <= opt.dense_cap;
                } else if (m.n <= opt.iterative_cap) {
                    dense = false;
                } else if (m.n <= opt.dense_cap) {
                    dense = true;
                } else {
                    throw CapError("lowest_eigenpairs: n exceeds both the dense cap (" +
                                   std::to_string(opt.dense_cap) +
                                   ") and the iterative cap (" +
                                   std::to_string(opt.iterative_cap) + ")");
                }
                break;
        }
    }

    EigenPairs solve(const TransverseFieldModel& m, double s) {
        const auto v = schedule_values(*sch, s);
        h.set_envelopes(v.a, v.b);
        EigenPairs pairs;
        if (dense) {
            pairs = dense_solve(h, m, count);
        } else if (v.a == 0.0) {
            pairs = diagonal_solve();
            warm = pairs.vectors;
        } else {
            pairs = lobpcg_solve(h, count, opt, warm.size() ? &warm : nullptr);
            warm = pairs.vectors;
        }
        return pairs;
    }

    // With the driver envelope off the Hamiltonian is diagonal in the
    // computational basis, so the eigenpairs are a partial sort away. This
    // also reports exactly degenerate endpoints as exactly degenerate.
    EigenPairs diagonal_solve() const {
        const auto& d = h.diagonal();
        const uint64_t dim = h.dim();
        std::vector<uint64_t> idx(dim);
        std::iota(idx.begin(), idx.end(), uint64_t{0});
        std::partial_sort(idx.begin(), idx.begin() + count, idx.end(),
                          [&](uint64_t l, uint64_t r) {
                              return h.b() * d[l] < h.b() * d[r];
                          });
        EigenPairs out;
        out.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), count);
        for (int c = 0; c < count; ++c) {
            out.values.push_back(h.b() * d[idx[static_cast<size_t>(c)]]);
            out.vectors(static_cast<Eigen::Index>(idx[static_cast<size_t>(c)]), c) = 1.0;
        }
        return out;
    }
};

}  // namespace

EigenPairs lowest_eigenpairs(const TransverseFieldModel& m, const Schedule& sch,
                             double s, int count, const EigenOptions& opt,
                             const Eigen::MatrixXd* warm_start) {
    Solver solver(m, sch, count, opt);
    if (warm_start) solver.warm = *warm_start;
    return solver.solve(m, s);
}

SpectrumProfile gap_profile(const TransverseFieldModel& m, const Schedule& sch,
                            int grid_size, int levels, const EigenOptions& opt) {
    grid_or_die(grid_size);
    if (levels < 2) throw InputError("gap_profile: needs at least two levels");

    Solver solver(m, sch, levels, opt);
    SpectrumProfile profile;
    profile.s_grid.resize(static_cast<size_t>(grid_size));
    profile.energies.resize(static_cast<size_t>(grid_size));
    profile.gap.resize(static_cast<size_t>(grid_size));

    int best_idx = 0;
    for (int k = 0; k < grid_size; ++k) {
        const double s = static_cast<double>(k) / (grid_size - 1);
        auto pairs = solver.solve(m, s);
        profile.s_grid[static_cast<size_t>(k)] = s;
        profile.energies[static_cast<size_t>(k)] = pairs.values;
        profile.gap[static_cast<size_t>(k)] = pairs.values[1] - pairs.values[0];
        if (profile.gap[static_cast<size_t>(k)] < profile.gap[static_cast<size_t>(best_idx)])
            best_idx = k;
    }
    profile.degenerate_at_end = profile.gap.back() < 1e-9;

    double best_s = profile.s_grid[static_cast<size_t>(best_idx)];
    double best_gap = profile.gap[static_cast<size_t>(best_idx)];

    // Golden-section sweep between the neighbors of the best grid point;
    // warm starts keep each extra point cheap. The tracked minimum can only
    // improve on the grid value.
    double lo = profile.s_grid[static_cast<size_t>(std::max(0, best_idx - 1))];
    double hi = profile.s_grid[static_cast<size_t>(
        std::min(grid_size - 1, best_idx + 1))];
    auto eval = [&](double s) {
        auto pairs = solver.solve(m, s);
        const double gap = pairs.values[1] - pairs.values[0];
        if (gap < best_gap) {
            best_gap = gap;
            best_s = s;
        }
        return gap;
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (hi - lo > 1e-5) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }

    profile.s_star = best_s;
    profile.g_min = best_gap;
    return profile;
}

AdiabaticTimeResult adiabatic_time(const TransverseFieldModel& m, const Schedule& sch,
                                   const SpectrumProfile& profile,
                                   const EigenOptions& opt) {
    Solver solver(m, sch, 2, opt);
    auto pairs = solver.solve(m, profile.s_star);

    AdiabaticTimeResult out;
    out.g_min = pairs.values[1] - pairs.values[0];

    const auto v = schedule_values(sch, profile.s_star);
    HamiltonianApply dh(m, v.da, v.db);
    Eigen::VectorXd image(dh.dim());
    dh.apply(pairs.vectors.col(1).data(), image.data());
    out.matrix_element = std::abs(pairs.vectors.col(0).dot(image));

    if (out.g_min < 1e-12) {
        out.gap_collapsed = true;
        out.t_a = std::numeric_limits<double>::infinity();
        return out;
    }
    out.t_a = (4.0 / std::numbers::pi) * out.matrix_element / (out.g_min * out.g_min);
    return out;
}

TrackData sigma_z_tracks(const TransverseFieldModel& m, const Schedule& sch,
                         int grid_size, const EigenOptions& opt) {
    grid_or_die(grid_size);
    Solver solver(m, sch, 2, opt);

    TrackData tracks;
    tracks.s_grid.resize(static_cast<size_t>(grid_size));
    tracks.z_expect.resize(m.n, grid_size);
    tracks.ground_degenerate.resize(static_cast<size_t>(grid_size));

    const uint64_t dim = uint64_t{1} << m.n;
    for (int k = 0; k < grid_size; ++k) {
        const double s = static_cast<double>(k) / (grid_size - 1);
        auto pairs = solver.solve(m, s);
        tracks.s_grid[static_cast<size_t>(k)] = s;
        tracks.ground_degenerate[static_cast<size_t>(k)] =
            pairs.values[1] - pairs.values[0] < 1e-9;

        Eigen::VectorXd mass = Eigen::VectorXd::Zero(m.n);
        for (uint64_t x = 0; x < dim; ++x) {
            const double pxx = pairs.vectors(static_cast<Eigen::Index>(x), 0) *
                               pairs.vectors(static_cast<Eigen::Index>(x), 0);
            uint64_t bits = x;
            while (bits) {
                mass(std::countr_zero(bits)) += pxx;
                bits &= bits - 1;
            }
        }
        for (int i = 0; i < m.n; ++i) tracks.z_expect(i, k) = 2.0 * mass(i) - 1.0;
    }
    return tracks;
}

Discontinuity detect_discontinuity(const TrackData& t, double threshold) {
    Discontinuity out;
    for (size_t k = 1; k < t.s_grid.size(); ++k) {
        double jump = 0.0;
        for (int i = 0; i < t.z_expect.rows(); ++i)
            jump = std::max(jump, std::abs(t.z_expect(i, static_cast<int>(k)) -
                                           t.z_expect(i, static_cast<int>(k - 1))));
        if (jump > out.magnitude) {
            out.magnitude = jump;
            if (jump > threshold) {
                out.found = true;
                out.s_jump = t.s_grid[k];
            }
        }
    }
    if (!out.found) out.s_jump.reset();
    return out;
}

std::string profile_csv(const SpectrumProfile& profile) {
    std::ostringstream os;
    os << "s";
    for (size_t l = 0; l < profile.energies.front().size(); ++l) os << ",E" << l;
    os << ",gap\n";
    for (size_t k = 0; k < profile.s_grid.size(); ++k) {
        os << format_double(profile.s_grid[k]);
        for (double e : profile.energies[k]) os << "," << format_double(e);
        os << "," << format_double(profile.gap[k]) << "\n";
    }
    return os.str();
}

std::string tracks_csv(const TrackData& tracks) {
    std::ostringstream os;
    os << "s";
    for (int i = 0; i < tracks.z_expect.rows(); ++i) os << ",z" << i;
    os << "\n";
    for (size_t k = 0; k < tracks.s_grid.size(); ++k) {
        os << format_double(tracks.s_grid[k]);
        for (int i = 0; i < tracks.z_expect.rows(); ++i)
            os << "," << format_double(tracks.z_expect(i, static_cast<int>(k)));
        os << "\n";
    }
    return os.str();
}

}  // namespace aqo
