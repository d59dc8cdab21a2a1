#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/forward_solver.hpp"
#include "dnspectral/fractional_ops.hpp"
#include "dnspectral/parallel.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace dnspectral {

struct Tolerances {
    double pde = 5e-3;      // scaled by 1 + max|f|
    double boundary = 1e-4; // scaled by max|u|
    double initial = 2e-2;  // relative L²
    double oracle = 1e-3;   // L∞ against the heat oracle
    double roundtrip = 1e-3;

    bool operator==(const Tolerances&) const = default;
};

struct ResidualReport {
    double pde_linf = 0.0;
    double pde_l2 = 0.0;
    double boundary_max = 0.0;
    double initial_l2 = 0.0;
    int nx = 0;
    int nt = 0;
    int steps = 0;
    double t_min = 0.0; // earliest time included in the PDE residual
    double max_f = 0.0;
    double max_u = 0.0;
    bool pde_ok = true;
    bool boundary_ok = true;
    bool initial_ok = true;

    void judge(const Tolerances& tol) {
        pde_ok = pde_linf <= tol.pde * (1.0 + max_f);
        boundary_ok = boundary_max <= tol.boundary * max_u;
        initial_ok = initial_l2 <= tol.initial;
    }
    [[nodiscard]] bool passed() const { return pde_ok && boundary_ok && initial_ok; }
};

namespace detail {

inline TimeFunction mode_time_function(const ModalSolution& modal, BasisId id) {
    return [&modal, id](double t) { return modal.mode(id, t); };
}

inline std::vector<BasisId> all_modes(int N) {
    std::vector<BasisId> ids{BasisId::root()};
    for (int k = 1; k <= N; ++k) {
        ids.push_back({Family::cosine, k});
        ids.push_back({Family::sine, k});
    }
    return ids;
}

/// A mode is identically zero when none of the data feeding it is nonzero.
inline bool mode_is_zero(const ModalSolution& m, BasisId id) {
    if (id.family == Family::root) return m.phi().c0 == 0.0 && m.f().c0 == 0.0;
    const auto i = static_cast<std::size_t>(id.k) - 1;
    const bool first = m.phi().c1[i] == 0.0 && m.f().c1[i] == 0.0;
    if (id.family == Family::cosine) return first;
    return first && m.phi().c2[i] == 0.0 && m.f().c2[i] == 0.0;
}

} // namespace detail

/// DN u − u_xx − f at grid points with t ≥ T/10 and interior x. DN acts on the
/// time trace through each x: for fields that carry their modal form the
/// traces are the closed-form mode factors (combined linearly), otherwise the
/// stored samples. u_xx uses centered second differences of the field.
inline ResidualReport pde_residual(const SolutionField& field, const SpatialFunction& f, const DNMultiOrder& order,
                                   int steps = 2048) {
    order.validate();
    const int nt = field.nt(), nx = field.nx();
    if (nt < 64) fail(ErrorKind::configuration, "pde_residual: need at least 64 time levels");
    if (nx < 5) fail(ErrorKind::configuration, "pde_residual: need at least 5 spatial points");
    ResidualReport rep;
    rep.nx = nx;
    rep.nt = nt;
    const int per_level = std::max(1, (steps + nt - 1) / nt);
    const int fine = per_level * nt;
    rep.steps = fine;
    const double T = field.T;

    // dn[i][j]: DN u at time level i, point j.
    std::vector<double> dn(static_cast<std::size_t>(nt) * nx, 0.0);
    if (field.modal) {
        const auto& modal = *field.modal;
        const auto ids = detail::all_modes(modal.N());
        std::vector<std::vector<double>> traces(ids.size());
        parallel_for(ids.size(), [&](std::size_t m) {
            if (detail::mode_is_zero(modal, ids[m])) return;
            traces[m] = dn_apply_trace(order, detail::mode_time_function(modal, ids[m]), T, fine);
        });
        for (std::size_t m = 0; m < ids.size(); ++m) {
            if (traces[m].empty()) continue;
            for (int j = 0; j < nx; ++j) {
                const double X = eval_eigenfunction(ids[m], field.x_grid[static_cast<std::size_t>(j)]);
                for (int i = 0; i < nt; ++i)
                    dn[static_cast<std::size_t>(i) * nx + j] += X * traces[m][static_cast<std::size_t>((i + 1) * per_level)];
            }
        }
    } else {
        parallel_for(static_cast<std::size_t>(nx), [&](std::size_t j) {
            std::vector<double> ts(field.t_grid), vs(static_cast<std::size_t>(nt));
            for (int i = 0; i < nt; ++i) vs[static_cast<std::size_t>(i)] = field.at(i, static_cast<int>(j));
            const TimeFunction trace(SampledFunction(std::move(ts), std::move(vs)));
            const auto d = dn_apply_trace(order, trace, T, fine);
            for (int i = 0; i < nt; ++i) dn[static_cast<std::size_t>(i) * nx + j] = d[static_cast<std::size_t>((i + 1) * per_level)];
        });
    }

    const double dx = field.x_grid[1] - field.x_grid[0];
    rep.t_min = T / 10.0;
    for (int j = 0; j < nx; ++j)
        rep.max_f = std::max(rep.max_f, f ? std::abs(f(field.x_grid[static_cast<std::size_t>(j)])) : 0.0);
    rep.max_u = field.max_abs();
    double sum_sq = 0.0;
    long count = 0;
    for (int i = 0; i < nt; ++i) {
        if (field.t_grid[static_cast<std::size_t>(i)] < rep.t_min * (1.0 - 1e-12)) continue;
        for (int j = 1; j + 1 < nx; ++j) {
            const double uxx = (field.at(i, j + 1) - 2.0 * field.at(i, j) + field.at(i, j - 1)) / (dx * dx);
            const double fx = f ? f(field.x_grid[static_cast<std::size_t>(j)]) : 0.0;
            const double r = std::abs(dn[static_cast<std::size_t>(i) * nx + j] - uxx - fx);
            rep.pde_linf = std::max(rep.pde_linf, r);
            sum_sq += r * r;
            ++count;
        }
    }
    rep.pde_l2 = count ? std::sqrt(sum_sq / count) : 0.0;
    return rep;
}

/// max over t of |u(t,1)| + |u_x(t,0) − u_x(t,1)|, fourth-order one-sided differences.
inline double boundary_residual(const SolutionField& field) {
    const int nx = field.nx();
    if (nx < 5) fail(ErrorKind::configuration, "boundary_residual: need at least 5 spatial points");
    const double dx = field.x_grid[1] - field.x_grid[0];
    double worst = 0.0;
    for (int i = 0; i < field.nt(); ++i) {
        auto u = [&](int j) { return field.at(i, j); };
        const double left = (-25.0 * u(0) + 48.0 * u(1) - 36.0 * u(2) + 16.0 * u(3) - 3.0 * u(4)) / (12.0 * dx);
        const int e = nx - 1;
        const double right = (25.0 * u(e) - 48.0 * u(e - 1) + 36.0 * u(e - 2) - 16.0 * u(e - 3) + 3.0 * u(e - 4)) / (12.0 * dx);
        worst = std::max(worst, std::abs(u(e)) + std::abs(left - right));
    }
    return worst;
}

/// Relative L² distance (absolute when φ ≡ 0) between lim_{t→0⁺} J^{1−α}u(t,·)
/// and φ on the field's x grid. Modal fields take the limit of each mode
/// factor; sampled fields extrapolate linearly from the two earliest times.
inline double initial_residual(const SolutionField& field, const SpatialFunction& phi, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "initial_residual: alpha must lie in (0,1]");
    const int nx = field.nx();
    std::vector<double> limit(static_cast<std::size_t>(nx), 0.0);
    const double beta = 1.0 - alpha;
    if (field.modal) {
        const auto& modal = *field.modal;
        const auto ids = detail::all_modes(modal.N());
        std::vector<double> lim(ids.size(), 0.0);
        parallel_for(ids.size(), [&](std::size_t m) {
            if (detail::mode_is_zero(modal, ids[m])) return;
            lim[m] = detail::rl_integral_at_zero(beta, detail::mode_time_function(modal, ids[m]), field.t_grid.front());
        });
        for (std::size_t m = 0; m < ids.size(); ++m)
            for (int j = 0; j < nx; ++j)
                limit[static_cast<std::size_t>(j)] += lim[m] * eval_eigenfunction(ids[m], field.x_grid[static_cast<std::size_t>(j)]);
    } else {
        const double t1 = field.t_grid[0], t2 = field.t_grid[1];
        for (int j = 0; j < nx; ++j) {
            std::vector<double> ts(field.t_grid), vs(static_cast<std::size_t>(field.nt()));
            for (int i = 0; i < field.nt(); ++i) vs[static_cast<std::size_t>(i)] = field.at(i, j);
            const TimeFunction trace(SampledFunction(std::move(ts), std::move(vs)));
            const double j1 = rl_integral(beta, trace, t1, 64);
            const double j2 = rl_integral(beta, trace, t2, 128);
            limit[static_cast<std::size_t>(j)] = (t2 * j1 - t1 * j2) / (t2 - t1);
        }
    }
    const double dx = 1.0 / (nx - 1);
    double diff = 0.0, norm = 0.0;
    for (int j = 0; j < nx; ++j) {
        const double w = (j == 0 || j == nx - 1 ? 0.5 : 1.0) * dx;
        const double p = phi(field.x_grid[static_cast<std::size_t>(j)]);
        diff += w * (limit[static_cast<std::size_t>(j)] - p) * (limit[static_cast<std::size_t>(j)] - p);
        norm += w * p * p;
    }
    return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

/// Full residual suite for a forward solution.
inline ResidualReport verify_forward(const SolutionField& field, const SpatialFunction& phi, const SpatialFunction& f,
                                     const Tolerances& tol, int steps = 2048) {
    const DNMultiOrder order(field.alpha0, field.alpha1);
    ResidualReport rep = pde_residual(field, f, order, steps);
    rep.boundary_max = boundary_residual(field);
    rep.initial_l2 = initial_residual(field, phi, field.alpha0);
    rep.judge(tol);
    return rep;
}

/// Crank-Nicolson solution of u_t = u_xx + f(x) on [0,1] with u(t,1) = 0 and
/// u_x(t,0) = u_x(t,1). The ghost value left of x = 0 follows from equal end
/// slopes, with u_x(t,1) taken from the equation at x = 1 (where u_t = 0).
/// Each output interval T/nt is split into `substeps` time steps.
inline SolutionField heat_oracle(const SpatialFunction& phi, const SpatialFunction& f, double T, int nx, int nt,
                                 int substeps = 16) {
    if (!(T > 0.0) || nx < 5 || nt < 1 || substeps < 1) fail(ErrorKind::configuration, "heat_oracle: invalid grid");
    const int n = nx - 1; // unknowns u_0 .. u_{nx-2}; u_{nx-1} = 0
    const double dx = 1.0 / (nx - 1);
    const double dt = T / (static_cast<double>(nt) * substeps);
    const double c = 1.0 / (dx * dx);

    std::vector<Eigen::Triplet<double>> lap;
    lap.reserve(static_cast<std::size_t>(3 * n + 2));
    lap.emplace_back(0, 0, -2.0 * c);
    lap.emplace_back(0, 1, 2.0 * c);
    lap.emplace_back(0, n - 1, 2.0 * c);
    for (int i = 1; i < n; ++i) {
        lap.emplace_back(i, i - 1, c);
        lap.emplace_back(i, i, -2.0 * c);
        if (i + 1 < n) lap.emplace_back(i, i + 1, c);
    }
    Eigen::SparseMatrix<double> L(n, n), I(n, n);
    L.setFromTriplets(lap.begin(), lap.end());
    I.setIdentity();
    const Eigen::SparseMatrix<double> A = I - 0.5 * dt * L;
    const Eigen::SparseMatrix<double> B = I + 0.5 * dt * L;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) fail(ErrorKind::oracle, "heat_oracle: factorization failed");

    Eigen::VectorXd u(n), s(n);
    for (int i = 0; i < n; ++i) {
        u[i] = phi(i * dx);
        s[i] = f ? f(i * dx) : 0.0;
    }
    if (f) s[0] += f(1.0);

    SolutionField field;
    field.T = T;
    field.t_grid = uniform_t_grid(T, nt);
    field.x_grid = uniform_x_grid(nx);
    field.values.assign(static_cast<std::size_t>(nt) * nx, 0.0);
    const double start = u.norm();
    for (int level = 0; level < nt; ++level) {
        for (int step = 0; step < substeps; ++step) {
            Eigen::VectorXd rhs = B * u + dt * s;
            u = lu.solve(rhs);
        }
        const double norm = u.norm();
        if (!std::isfinite(norm) || (!f && norm > 1e3 * (start + 1e-300))) {
            std::ostringstream os;
            os << "heat_oracle: unstable growth at t = " << field.t_grid[static_cast<std::size_t>(level)];
            fail(ErrorKind::oracle, os.str());
        }
        for (int i = 0; i < n; ++i) field.values[static_cast<std::size_t>(level) * nx + i] = u[i];
    }
    field.weighted = field.values;
    for (int level = 0; level < nt; ++level)
        for (int j = 0; j < nx; ++j) field.weighted[static_cast<std::size_t>(level) * nx + j] *= field.t_grid[static_cast<std::size_t>(level)];
    return field;
}

/// L∞ distance between two fields on identical grids.
inline double field_linf(const SolutionField& a, const SolutionField& b) {
    if (a.values.size() != b.values.size()) fail(ErrorKind::configuration, "field_linf: grids differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

} // namespace dnspectral
