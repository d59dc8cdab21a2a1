#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dnspectral {

/// Conditions on the terminal data ψ: ψ(1) = 0, ψ'(0) = ψ'(1), ψ''(1) = 0,
/// ψ'''(0) = ψ'''(1), plus bounded fourth differences as a C⁴ proxy.
/// Derivative conditions are judged relative to the size of the derivatives.
inline CompatibilityReport check_psi_compatibility(const SpatialFunction& psi, double tol = 1e-6) {
    using detail::one_sided_derivative;
    CompatibilityReport r;
    const double v1 = std::abs(psi(1.0));
    r.conditions.push_back({"psi(1)=0", v1, v1 <= tol});

    const double d1a = one_sided_derivative(psi, 0.0, 1), d1b = one_sided_derivative(psi, 1.0, 1);
    const double r1 = std::abs(d1a - d1b);
    r.conditions.push_back({"psi'(0)=psi'(1)", r1, r1 <= tol * (1.0 + std::abs(d1a) + std::abs(d1b))});

    const double d2a = one_sided_derivative(psi, 0.0, 2), d2b = one_sided_derivative(psi, 1.0, 2);
    const double r2 = std::abs(d2b);
    r.conditions.push_back({"psi''(1)=0", r2, r2 <= tol * (1.0 + std::abs(d2a))});

    const double d3a = one_sided_derivative(psi, 0.0, 3), d3b = one_sided_derivative(psi, 1.0, 3);
    const double r3 = std::abs(d3a - d3b);
    r.conditions.push_back({"psi'''(0)=psi'''(1)", r3, r3 <= 10.0 * tol * (1.0 + std::abs(d3a) + std::abs(d3b))});

    // Fourth differences stay O(1) for C⁴ data and blow up like h⁻ᵏ at a kink.
    constexpr int n = 200;
    const double h = 1.0 / n;
    double peak = 0.0, size = 0.0;
    for (int i = 0; i <= n; ++i) size = std::max(size, std::abs(psi(i * h)));
    for (int i = 2; i + 2 <= n; ++i) {
        const double d4 = (psi((i - 2) * h) - 4.0 * psi((i - 1) * h) + 6.0 * psi(i * h) - 4.0 * psi((i + 1) * h) +
                           psi((i + 2) * h)) /
                          (h * h * h * h);
        peak = std::max(peak, std::abs(d4));
    }
    r.conditions.push_back({"psi in C4 (max fourth difference)", peak, std::isfinite(peak) && peak <= 1e6 * (1.0 + size)});
    return r;
}

struct BackwardProblem {
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double T = 1.0;
    SpatialFunction phi;
    SpatialFunction psi;
    int N = 32;
    int nx = 257;
    int nt = 128;
    int panels = 0;
    /// Modes whose amplification exceeds this are dropped (regularizing
    /// extension; off by default).
    std::optional<double> cutoff_amplification;

    void validate() const {
        ForwardProblem fp;
        fp.alpha0 = alpha0;
        fp.alpha1 = alpha1;
        fp.T = T;
        fp.phi = phi;
        fp.N = N;
        fp.nx = nx;
        fp.nt = nt;
        fp.validate();
        if (!psi) fail(ErrorKind::configuration, "terminal data psi is missing");
        if (cutoff_amplification && !(*cutoff_amplification > 0.0))
            fail(ErrorKind::configuration, "cutoff_amplification must be positive");
    }
};

struct SourceRecovery {
    SpectralCoeffs f_coeffs;
    SpectralCoeffs phi_coeffs;
    SpectralCoeffs psi_coeffs;
    std::vector<double> x_grid;
    std::vector<double> f_grid;
    SolutionField u_field;
    std::vector<double> amplification; // entry k-1 for mode k
    std::vector<int> suppressed_modes;
    CompatibilityReport psi_report;
    CompatibilityReport phi_report;
    double roundtrip_l2 = 0.0; // ‖u(T,·) − ψ‖ in L²(0,1)
    std::vector<std::string> warnings;
};

namespace detail {

inline double checked_denominator(const ModeKernel& kernel, double T, int k) {
    const double d = kernel.source_factor(T);
    if (!(d > 1e-300)) {
        std::ostringstream os;
        os << "source recovery: vanishing denominator e(T, lambda_" << k << ") = " << d;
        fail(ErrorKind::degenerate_horizon, os.str());
    }
    return d;
}

} // namespace detail

/// 1/e_{ρ,α₀+α₁}(T, λₖ): magnification of terminal-data errors in mode k.
inline double amplification_factor(const BackwardProblem& p, int k) {
    if (k < 1) fail(ErrorKind::domain, "amplification_factor: k must be positive");
    if (!(p.T > 0.0)) fail(ErrorKind::configuration, "horizon T must be positive");
    const ModeKernel kernel(p.alpha0, p.alpha1, eigenvalue(k));
    return 1.0 / detail::checked_denominator(kernel, p.T, k);
}

/// Source coefficients from the projected data, mode by mode. Within each k,
/// f₁ₖ is recovered first and then enters the coupling term of f₂ₖ.
inline SpectralCoeffs recover_coefficients(double alpha0, double alpha1, double T, const SpectralCoeffs& phi,
                                           const SpectralCoeffs& psi, std::optional<double> cutoff,
                                           std::vector<double>* amplification = nullptr,
                                           std::vector<int>* suppressed = nullptr) {
    const int N = phi.N();
    SpectralCoeffs f(N);
    const ModeKernel root(alpha0, alpha1, 0.0);
    f.c0 = (psi.c0 - phi.c0 * root.initial_factor(T)) / detail::checked_denominator(root, T, 0);
    if (amplification) amplification->assign(static_cast<std::size_t>(N), 0.0);
    for (int k = 1; k <= N; ++k) {
        const auto i = static_cast<std::size_t>(k) - 1;
        const ModeKernel ker(alpha0, alpha1, eigenvalue(k));
        const double den = detail::checked_denominator(ker, T, k);
        if (amplification) (*amplification)[i] = 1.0 / den;
        if (cutoff && 1.0 / den > *cutoff) {
            if (suppressed) suppressed->push_back(k);
            continue;
        }
        const double a = ker.initial_factor(T);
        f.c1[i] = (psi.c1[i] - phi.c1[i] * a) / den;
        f.c2[i] = (psi.c2[i] - ker.coupling(T, phi.c1[i], f.c1[i]) - phi.c2[i] * a) / den;
    }
    return f;
}

inline SourceRecovery recover_source(const BackwardProblem& p) {
    p.validate();
    SourceRecovery out;
    out.psi_report = check_psi_compatibility(p.psi);
    out.phi_report = check_compatibility(p.phi);
    if (!out.psi_report.passed()) out.warnings.emplace_back("terminal data fail the compatibility conditions");
    if (!out.phi_report.passed()) out.warnings.emplace_back("initial data fail the compatibility conditions");
    out.phi_coeffs = project(p.phi, p.N, p.panels);
    out.psi_coeffs = project(p.psi, p.N, p.panels);
    out.f_coeffs = recover_coefficients(p.alpha0, p.alpha1, p.T, out.phi_coeffs, out.psi_coeffs,
                                        p.cutoff_amplification, &out.amplification, &out.suppressed_modes);
    out.x_grid = uniform_x_grid(p.nx);
    out.f_grid.resize(out.x_grid.size());
    for (std::size_t j = 0; j < out.x_grid.size(); ++j) out.f_grid[j] = reconstruct(out.f_coeffs, out.x_grid[j]);
    auto modal = std::make_shared<const ModalSolution>(p.alpha0, p.alpha1, out.phi_coeffs, out.f_coeffs);
    out.u_field = assemble_field(std::move(modal), p.T, p.nx, p.nt);
    // Trapezoid L² norm of u(T,·) − ψ on the x grid (last time row is T).
    const int last = out.u_field.nt() - 1;
    const double h = 1.0 / (p.nx - 1);
    double acc = 0.0;
    for (int j = 0; j < p.nx; ++j) {
        const double d = out.u_field.at(last, j) - p.psi(out.x_grid[static_cast<std::size_t>(j)]);
        acc += (j == 0 || j == p.nx - 1 ? 0.5 : 1.0) * d * d * h;
    }
    out.roundtrip_l2 = std::sqrt(acc);
    return out;
}

} // namespace dnspectral
