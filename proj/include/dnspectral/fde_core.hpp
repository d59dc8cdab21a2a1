#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/fractional_ops.hpp"
#include "dnspectral/special_functions.hpp"

#include <cmath>
#include <sstream>

namespace dnspectral {

/// Data of one spectral mode of DN u = u_xx + f with orders (α₀, α₁).
struct ModeParams {
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double rho = 1.0;
    double lambda = 0.0;
    double phi_coeff = 0.0;
    double f_coeff = 0.0;

    static ModeParams make(double alpha0, double alpha1, double lambda, double phi = 0.0, double f = 0.0) {
        ModeParams p{alpha0, alpha1, alpha0 + alpha1 - 1.0, lambda, phi, f};
        p.validate();
        return p;
    }

    void validate() const {
        if (!(alpha0 > 0.0 && alpha0 <= 1.0 && alpha1 > 0.0 && alpha1 <= 1.0)) {
            std::ostringstream os;
            os << "mode orders must lie in (0,1] (alpha0=" << alpha0 << ", alpha1=" << alpha1 << ")";
            fail(ErrorKind::domain, os.str());
        }
        if (!(rho > 0.0)) fail(ErrorKind::domain, "mode orders must satisfy alpha0 + alpha1 > 1");
        if (std::abs(rho - (alpha0 + alpha1 - 1.0)) > 1e-15) fail(ErrorKind::domain, "ModeParams: rho != alpha0 + alpha1 - 1");
        if (!(lambda >= 0.0)) fail(ErrorKind::domain, "ModeParams: lambda must be nonnegative");
    }

    [[nodiscard]] DNMultiOrder order() const { return DNMultiOrder(alpha0, alpha1); }
};

/// Time factors of one eigenvalue λ for fixed orders, all in closed form:
///   a(t) = e_{ρ,α₀}(t,λ), b(t) = e_{ρ,α₀+α₁}(t,λ),
///   (e_{ρ,ρ} * a)(t) and (e_{ρ,ρ} * b)(t) via the γ = 2 Prabhakar function.
/// For λ = 0 the same expressions reduce to the power laws of the root mode.
class ModeKernel {
public:
    ModeKernel(double alpha0, double alpha1, double lambda)
        : alpha0_(alpha0), alpha1_(alpha1), rho_(alpha0 + alpha1 - 1.0), lambda_(lambda),
          sqrt_lambda_(std::sqrt(lambda)), a_({rho_, alpha0, lambda}), b_({rho_, alpha0 + alpha1, lambda}),
          conv_a_(rho_, rho_, alpha0, lambda), conv_b_(rho_, rho_, alpha0 + alpha1, lambda) {
        ModeParams::make(alpha0, alpha1, lambda);
    }

    [[nodiscard]] double lambda() const { return lambda_; }
    [[nodiscard]] double alpha0() const { return alpha0_; }
    [[nodiscard]] double alpha1() const { return alpha1_; }

    [[nodiscard]] double initial_factor(double t) const { return a_(t); }
    [[nodiscard]] double source_factor(double t) const { return b_(t); }

    /// Root and first-family modes: a(t)φ + b(t)f.
    [[nodiscard]] double first(double t, double phi, double f) const {
        double v = 0.0;
        if (phi != 0.0) v += a_(t) * phi;
        if (f != 0.0) v += b_(t) * f;
        return v;
    }

    /// 2√λ (e_{ρ,ρ} * u₁)(t) for u₁ = a·φ₁ + b·f₁.
    [[nodiscard]] double coupling(double t, double phi1, double f1) const {
        double v = 0.0;
        if (phi1 != 0.0) v += conv_a_(t) * phi1;
        if (f1 != 0.0) v += conv_b_(t) * f1;
        return 2.0 * sqrt_lambda_ * v;
    }

    /// Second-family mode driven by its companion (φ₁, f₁).
    [[nodiscard]] double second(double t, double phi1, double f1, double phi2, double f2) const {
        return first(t, phi2, f2) + coupling(t, phi1, f1);
    }

private:
    double alpha0_;
    double alpha1_;
    double rho_;
    double lambda_;
    double sqrt_lambda_;
    MLTF a_;
    MLTF b_;
    MLTFPairConvolution conv_a_;
    MLTFPairConvolution conv_b_;
};

inline double u0_mode(const ModeParams& p, double t) {
    p.validate();
    if (p.lambda != 0.0) fail(ErrorKind::domain, "u0_mode: the root mode has lambda = 0");
    if (!(t > 0.0)) fail(ErrorKind::domain, "u0_mode: t must be positive");
    return std::pow(t, p.alpha0 - 1.0) * rgamma(p.alpha0) * p.phi_coeff +
           std::pow(t, p.rho) * rgamma(p.rho + 1.0) * p.f_coeff;
}

inline double u1_mode(const ModeParams& p, double t) {
    p.validate();
    if (!(p.lambda > 0.0)) fail(ErrorKind::domain, "u1_mode: lambda must be positive");
    return mltf_eval({p.rho, p.alpha0, p.lambda}, t) * p.phi_coeff +
           mltf_eval({p.rho, p.alpha0 + p.alpha1, p.lambda}, t) * p.f_coeff;
}

/// Second-family mode with the coupling convolution evaluated by quadrature
/// (`mltf_convolve`), term by term over the two parts of u₁.
inline double u2_mode(const ModeParams& p, double phi1, double f1, double t, double tol = 1e-8) {
    p.validate();
    if (!(p.lambda > 0.0)) fail(ErrorKind::domain, "u2_mode: lambda must be positive");
    const MLTFSpec kernel{p.rho, p.rho, p.lambda};
    double conv = 0.0;
    if (phi1 != 0.0) conv += phi1 * mltf_convolve(kernel, {p.rho, p.alpha0, p.lambda}, t, tol);
    if (f1 != 0.0) conv += f1 * mltf_convolve(kernel, {p.rho, p.alpha0 + p.alpha1, p.lambda}, t, tol);
    return mltf_eval({p.rho, p.alpha0, p.lambda}, t) * p.phi_coeff + 2.0 * std::sqrt(p.lambda) * conv +
           mltf_eval({p.rho, p.alpha0 + p.alpha1, p.lambda}, t) * p.f_coeff;
}

/// Companion first-family data (φ₁ₖ, f₁ₖ) of a second-family mode.
struct Companion {
    double phi1 = 0.0;
    double f1 = 0.0;
};

/// |DN u + λu − f − g| at t for mode 0, 1 or 2, with DN applied numerically
/// to the closed-form mode solution; g = 2√λ·u₁ₖ(t) for mode 2 and 0 otherwise.
inline double mode_residual(const ModeParams& p, int mode, Companion companion, double t, int steps) {
    p.validate();
    if (mode < 0 || mode > 2) fail(ErrorKind::domain, "mode_residual: mode must be 0, 1 or 2");
    if (mode == 0 && p.lambda != 0.0) fail(ErrorKind::domain, "mode_residual: mode 0 requires lambda = 0");
    if (mode > 0 && !(p.lambda > 0.0)) fail(ErrorKind::domain, "mode_residual: modes 1 and 2 require lambda > 0");
    const ModeKernel kernel(p.alpha0, p.alpha1, p.lambda);
    TimeFunction u = [&](double s) { return kernel.first(s, p.phi_coeff, p.f_coeff); };
    double forcing = p.f_coeff;
    if (mode == 2) {
        u = [&](double s) { return kernel.second(s, companion.phi1, companion.f1, p.phi_coeff, p.f_coeff); };
        forcing += 2.0 * std::sqrt(p.lambda) * kernel.first(t, companion.phi1, companion.f1);
    }
    const double dn = dn_apply(p.order(), u, t, steps);
    return std::abs(dn + p.lambda * u(t) - forcing);
}

} // namespace dnspectral
