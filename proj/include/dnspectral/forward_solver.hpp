#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/fde_core.hpp"
#include "dnspectral/parallel.hpp"
#include "dnspectral/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace dnspectral {

using SpatialFunction = std::function<double(double)>;

namespace detail {

/// n-th derivative of f at the end x0 ∈ {0, 1} of [0, 1] by fourth-order
/// one-sided differences. The step grows with n to contain roundoff.
inline double one_sided_derivative(const SpatialFunction& f, double x0, int n) {
    static constexpr double steps[] = {0.0, 1e-3, 2e-3, 5e-3, 1e-2};
    const double h = steps[std::clamp(n, 1, 4)];
    const double s = x0 < 0.5 ? h : -h;
    auto v = [&](int i) { return f(x0 + i * s); };
    switch (n) {
    case 1: return (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4)) / (12.0 * s);
    case 2:
        return (45.0 * v(0) - 154.0 * v(1) + 214.0 * v(2) - 156.0 * v(3) + 61.0 * v(4) - 10.0 * v(5)) / (12.0 * h * h);
    case 3:
        return (-49.0 * v(0) + 232.0 * v(1) - 461.0 * v(2) + 496.0 * v(3) - 307.0 * v(4) + 104.0 * v(5) -
                15.0 * v(6)) /
               (8.0 * s * s * s);
    case 4:
        return (56.0 * v(0) - 333.0 * v(1) + 852.0 * v(2) - 1219.0 * v(3) + 1056.0 * v(4) - 555.0 * v(5) +
                164.0 * v(6) - 21.0 * v(7)) /
               (6.0 * h * h * h * h);
    default: fail(ErrorKind::domain, "one_sided_derivative: order must be 1..4");
    }
}

/// ‖g''‖ in L²(0,1) from centered differences on a uniform grid.
inline double second_derivative_l2(const SpatialFunction& g, int n = 2048) {
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 1; i < n; ++i) {
        const double d = (g((i + 1) * h) - 2.0 * g(i * h) + g((i - 1) * h)) / (h * h);
        acc += d * d * h;
    }
    return std::sqrt(acc);
}

} // namespace detail

/// Outcome of a compatibility check: each condition with its measured residual.
struct Condition {
    std::string name;
    double residual = 0.0;
    bool passed = false;
};

struct CompatibilityReport {
    std::vector<Condition> conditions;

    [[nodiscard]] bool passed() const {
        for (const auto& c : conditions)
            if (!c.passed) return false;
        return true;
    }
};

/// φ(1) = 0 and, for level ≥ 1, φ'(0) = φ'(1); tolerance 1e-6.
inline CompatibilityReport check_compatibility(const SpatialFunction& phi, int level = 1, double tol = 1e-6) {
    CompatibilityReport r;
    const double v1 = std::abs(phi(1.0));
    r.conditions.push_back({"phi(1)=0", v1, v1 <= tol});
    if (level >= 1) {
        const double d = std::abs(detail::one_sided_derivative(phi, 0.0, 1) - detail::one_sided_derivative(phi, 1.0, 1));
        r.conditions.push_back({"phi'(0)=phi'(1)", d, d <= tol});
    }
    return r;
}

struct ForwardProblem {
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double T = 1.0;
    SpatialFunction phi;
    SpatialFunction source; // empty means f ≡ 0
    int N = 32;
    int nx = 257;
    int nt = 128;
    int panels = 0; // 0: 10·N
    bool allow_incompatible = false;

    void validate() const {
        ModeParams::make(alpha0, alpha1, 0.0);
        if (!(T > 0.0)) fail(ErrorKind::configuration, "horizon T must be positive");
        if (N < 1) fail(ErrorKind::configuration, "truncation N must be at least 1");
        if (nx < 8 || nt < 8) fail(ErrorKind::configuration, "nx and nt must be at least 8");
        if (nx < 4 * N) {
            std::ostringstream os;
            os << "grid too coarse: nx = " << nx << " cannot resolve N = " << N << " modes (need nx >= " << 4 * N << ")";
            fail(ErrorKind::configuration, os.str());
        }
        if (!phi) fail(ErrorKind::configuration, "initial data phi is missing");
    }
};

/// Series solution in closed form: the mode coefficients of φ and f together
/// with per-eigenvalue kernels, so u can be evaluated at any t > 0.
class ModalSolution {
public:
    ModalSolution(double alpha0, double alpha1, SpectralCoeffs phi, SpectralCoeffs f)
        : alpha0_(alpha0), alpha1_(alpha1), phi_(std::move(phi)), f_(std::move(f)) {
        kernels_.reserve(static_cast<std::size_t>(phi_.N()) + 1);
        for (int k = 0; k <= phi_.N(); ++k) kernels_.emplace_back(alpha0, alpha1, eigenvalue(k));
    }

    [[nodiscard]] int N() const { return phi_.N(); }
    [[nodiscard]] double alpha0() const { return alpha0_; }
    [[nodiscard]] double alpha1() const { return alpha1_; }
    [[nodiscard]] const SpectralCoeffs& phi() const { return phi_; }
    [[nodiscard]] const SpectralCoeffs& f() const { return f_; }
    [[nodiscard]] const ModeKernel& kernel(int k) const { return kernels_[static_cast<std::size_t>(k)]; }

    /// Time factor of basis function `id` at t.
    [[nodiscard]] double mode(BasisId id, double t) const {
        const auto& ker = kernel(id.k);
        switch (id.family) {
        case Family::root: return ker.first(t, phi_.c0, f_.c0);
        case Family::cosine: {
            const auto i = static_cast<std::size_t>(id.k) - 1;
            return ker.first(t, phi_.c1[i], f_.c1[i]);
        }
        case Family::sine: {
            const auto i = static_cast<std::size_t>(id.k) - 1;
            return ker.second(t, phi_.c1[i], f_.c1[i], phi_.c2[i], f_.c2[i]);
        }
        }
        return 0.0;
    }

    [[nodiscard]] SpectralCoeffs coeffs(double t) const {
        SpectralCoeffs c(N());
        c.c0 = mode(BasisId::root(), t);
        for (int k = 1; k <= N(); ++k) {
            c.c1[static_cast<std::size_t>(k) - 1] = mode({Family::cosine, k}, t);
            c.c2[static_cast<std::size_t>(k) - 1] = mode({Family::sine, k}, t);
        }
        return c;
    }

    [[nodiscard]] double value(double t, double x) const { return reconstruct(coeffs(t), x); }

private:
    double alpha0_;
    double alpha1_;
    SpectralCoeffs phi_;
    SpectralCoeffs f_;
    std::vector<ModeKernel> kernels_;
};

/// u(t, x) on the tensor grid t_grid × x_grid (row-major in t), with the
/// weighted values t^{α₁}·u. Times exclude 0: t_i = (i+1)·T/nt.
struct SolutionField {
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double T = 1.0;
    std::vector<double> t_grid;
    std::vector<double> x_grid;
    std::vector<double> values;
    std::vector<double> weighted;
    std::shared_ptr<const ModalSolution> modal; // absent for fields built by other means

    [[nodiscard]] int nt() const { return static_cast<int>(t_grid.size()); }
    [[nodiscard]] int nx() const { return static_cast<int>(x_grid.size()); }
    [[nodiscard]] double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * x_grid.size() + static_cast<std::size_t>(j)];
    }
    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
};

inline std::vector<double> uniform_x_grid(int nx) {
    std::vector<double> x(static_cast<std::size_t>(nx));
    for (int j = 0; j < nx; ++j) x[static_cast<std::size_t>(j)] = static_cast<double>(j) / (nx - 1);
    return x;
}

inline std::vector<double> uniform_t_grid(double T, int nt) {
    std::vector<double> t(static_cast<std::size_t>(nt));
    for (int i = 0; i < nt; ++i) t[static_cast<std::size_t>(i)] = T * (i + 1) / nt;
    return t;
}

/// Evaluates a modal solution on a grid. Per point the basis sum runs in the
/// fixed order root, then k = 1..N, independent of threading.
inline SolutionField assemble_field(std::shared_ptr<const ModalSolution> modal, double T, int nx, int nt,
                                    std::vector<SpectralCoeffs>* coeffs_out = nullptr) {
    SolutionField field;
    field.alpha0 = modal->alpha0();
    field.alpha1 = modal->alpha1();
    field.T = T;
    field.t_grid = uniform_t_grid(T, nt);
    field.x_grid = uniform_x_grid(nx);
    const int N = modal->N();
    // Basis table: row b holds X_b at every x, b = 0 (root), 2k-1 (cosine k), 2k (sine k).
    std::vector<double> table(static_cast<std::size_t>(2 * N + 1) * static_cast<std::size_t>(nx));
    for (int j = 0; j < nx; ++j) {
        const double x = field.x_grid[static_cast<std::size_t>(j)];
        table[static_cast<std::size_t>(j)] = eval_eigenfunction(BasisId::root(), x);
        for (int k = 1; k <= N; ++k) {
            table[static_cast<std::size_t>(2 * k - 1) * nx + j] = eval_eigenfunction({Family::cosine, k}, x);
            table[static_cast<std::size_t>(2 * k) * nx + j] = eval_eigenfunction({Family::sine, k}, x);
        }
    }
    std::vector<SpectralCoeffs> coeffs(static_cast<std::size_t>(nt));
    parallel_for(static_cast<std::size_t>(nt), [&](std::size_t i) { coeffs[i] = modal->coeffs(field.t_grid[i]); });
    field.values.assign(static_cast<std::size_t>(nt) * nx, 0.0);
    field.weighted.assign(field.values.size(), 0.0);
    for (int i = 0; i < nt; ++i) {
        const auto& c = coeffs[static_cast<std::size_t>(i)];
        const double w = std::pow(field.t_grid[static_cast<std::size_t>(i)], field.alpha1);
        for (int j = 0; j < nx; ++j) {
            double v = c.c0 * table[static_cast<std::size_t>(j)];
            for (int k = 1; k <= N; ++k) {
                v += c.c1[static_cast<std::size_t>(k) - 1] * table[static_cast<std::size_t>(2 * k - 1) * nx + j];
                v += c.c2[static_cast<std::size_t>(k) - 1] * table[static_cast<std::size_t>(2 * k) * nx + j];
            }
            const auto idx = static_cast<std::size_t>(i) * nx + j;
            field.values[idx] = v;
            field.weighted[idx] = w * v;
        }
    }
    field.modal = std::move(modal);
    if (coeffs_out) *coeffs_out = std::move(coeffs);
    return field;
}

struct ForwardSolution {
    SolutionField field;
    std::vector<SpectralCoeffs> u_coeffs; // u(t_i) for every grid time
    SpectralCoeffs phi_coeffs;
    SpectralCoeffs f_coeffs;
    CompatibilityReport compatibility;
    double tail_estimate = 0.0; // sup-norm bound on the discarded modes at T
    std::vector<std::string> warnings;
};

/// Bound on the sup norm of the modes k > N of u(T), from the coefficient
/// decay |g₁ₖ| ≤ ‖g''‖/k², |g₂ₖ| ≤ 3‖g''‖/k², sup|X| ≤ 4 and Σ_{k>N} k⁻² < 1/N.
/// The time factors are bounded by their λ = 0 values; the coupling term
/// adds at most 1/(πN) relative.
inline double truncation_tail(const ForwardProblem& p) {
    const double rho = p.alpha0 + p.alpha1 - 1.0;
    const double phi_norm = detail::second_derivative_l2(p.phi);
    const double f_norm = p.source ? detail::second_derivative_l2(p.source) : 0.0;
    const double per_mode = 4.0 * (1.0 + 3.0) / p.N;
    const double a = std::pow(p.T, p.alpha0 - 1.0) * rgamma(p.alpha0);
    const double b = std::pow(p.T, rho) * rgamma(rho + 1.0);
    return per_mode * (phi_norm * a + f_norm * b) * (1.0 + 1.0 / (std::numbers::pi * p.N));
}

inline ForwardSolution solve_forward(const ForwardProblem& p) {
    p.validate();
    ForwardSolution out;
    out.compatibility = check_compatibility(p.phi);
    if (!out.compatibility.passed()) {
        if (!p.allow_incompatible)
            fail(ErrorKind::configuration, "initial data violate the boundary conditions (phi(1)=0, phi'(0)=phi'(1))");
        out.warnings.emplace_back("initial data violate the boundary conditions; series converges slowly");
    }
    out.phi_coeffs = project(p.phi, p.N, p.panels);
    out.f_coeffs = p.source ? project(p.source, p.N, p.panels) : SpectralCoeffs(p.N);
    auto modal = std::make_shared<const ModalSolution>(p.alpha0, p.alpha1, out.phi_coeffs, out.f_coeffs);
    out.field = assemble_field(std::move(modal), p.T, p.nx, p.nt, &out.u_coeffs);
    out.tail_estimate = truncation_tail(p);
    return out;
}

/// Bilinear interpolation of the stored grid.
inline double evaluate(const SolutionField& field, double t, double x) {
    const auto& tg = field.t_grid;
    const auto& xg = field.x_grid;
    if (tg.empty() || xg.empty()) fail(ErrorKind::domain, "evaluate: empty field");
    if (!(t >= tg.front() && t <= tg.back() && x >= xg.front() && x <= xg.back())) {
        std::ostringstream os;
        os << "evaluate: (t, x) = (" << t << ", " << x << ") lies outside the grid";
        fail(ErrorKind::domain, os.str());
    }
    auto locate = [](const std::vector<double>& g, double v) {
        if (g.size() < 2) return std::pair<std::size_t, double>{0, 0.0};
        auto it = std::upper_bound(g.begin(), g.end(), v);
        std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it));
        i = std::min(std::max<std::size_t>(i, 1), g.size() - 1) - 1;
        return std::pair<std::size_t, double>{i, (v - g[i]) / (g[i + 1] - g[i])};
    };
    const auto [i, a] = locate(tg, t);
    const auto [j, b] = locate(xg, x);
    auto val = [&](std::size_t ii, std::size_t jj) {
        ii = std::min(ii, tg.size() - 1);
        jj = std::min(jj, xg.size() - 1);
        return field.values[ii * xg.size() + jj];
    };
    return (1 - a) * ((1 - b) * val(i, j) + b * val(i, j + 1)) + a * ((1 - b) * val(i + 1, j) + b * val(i + 1, j + 1));
}

} // namespace dnspectral
