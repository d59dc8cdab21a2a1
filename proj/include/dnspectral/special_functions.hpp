#pragma once

#include "dnspectral/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace dnspectral {

// ---------------------------------------------------------------------------
// Gamma
// ---------------------------------------------------------------------------

namespace detail {
inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }
} // namespace detail

/// Euler Gamma function. Throws a domain error at the poles 0, -1, -2, ...
inline double gamma(double x) {
    if (std::isnan(x)) fail(ErrorKind::domain, "gamma: NaN argument");
    if (detail::is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "gamma: pole at x = " << x;
        fail(ErrorKind::domain, os.str());
    }
    return std::tgamma(x);
}

/// Reciprocal Gamma 1/Γ(x); entire, so it returns 0 at the poles of Γ.
inline double rgamma(double x) {
    if (detail::is_nonpositive_integer(x)) return 0.0;
    if (x > 171.6) return 0.0;
    return 1.0 / std::tgamma(x);
}

// ---------------------------------------------------------------------------
// Mittag-Leffler function
// ---------------------------------------------------------------------------

/// Parameters (α, β) of the two-parameter Mittag-Leffler function E_{α,β}.
/// The evaluator accepts α ∈ (0, 2] and any real β (E_{α,β} is entire in z
/// for every β); the solver modules only issue α ∈ (0, 1] and β > -1.
struct MLIndex {
    double alpha = 1.0;
    double beta = 1.0;
};

/// Largest positive argument accepted by the evaluator.
inline constexpr double ml_z_max = 10.0;

namespace detail {

/// Neumaier compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    [[nodiscard]] double value() const { return sum + comp; }
};

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule(15);
    return rule;
}

} // namespace detail

/// Evaluator of E_{α,β}(z) = Σ z^k / Γ(αk + β) on the real line, z ≤ 10.
///
/// The constructor caches the series and asymptotic coefficients, so one
/// instance should be reused for repeated evaluations with the same (α, β).
///
/// Regions, with r = |z|^{1/α}:
///  - r ≤ 6: the power series with compensated summation.
///  - z < 0, α < 1, r large: the algebraic asymptotic expansion
///    -Σ_{k≥1} z^{-k}/Γ(β-αk), used only when its truncation error and the
///    exponentially small remainder are both below double precision.
///  - otherwise: the Hankel-contour representation collapsed onto the branch
///    cut, plus the residues of the poles of s^{α-β}/(s^α - z) that lie on the
///    principal sheet.
///  - α = 1 is handled with closed forms / an Euler-type integral, since the
///    pole then sits on the branch cut.
class MittagLeffler {
public:
    static constexpr double series_radius = 6.0;

    explicit MittagLeffler(MLIndex idx) : idx_(idx) {
        if (!(idx.alpha > 0.0 && idx.alpha <= 2.0) || !std::isfinite(idx.beta)) {
            std::ostringstream os;
            os << "MittagLeffler: alpha must lie in (0,2] and beta be finite (alpha=" << idx.alpha
               << ", beta=" << idx.beta << ")";
            fail(ErrorKind::domain, os.str());
        }
        const double zr = std::pow(series_radius, idx_.alpha);
        // Enough terms that zr^k / Γ(αk+β) has dropped below 1e-18 of the leading scale.
        const double log_zr = std::log(zr);
        for (int k = 0;; ++k) {
            const double arg = idx_.alpha * k + idx_.beta;
            series_coeffs_.push_back(rgamma(arg));
            if (k > 4 && arg > 2.0 && k * log_zr - std::lgamma(arg) < std::log(1e-18)) break;
            if (k > 20000) break;
        }
        if (idx_.alpha < 1.0) {
            for (int k = 1; k <= asymptotic_terms_max; ++k) {
                const double arg = idx_.beta - idx_.alpha * k;
                asymptotic_coeffs_.push_back(rgamma(arg));
                // 1/|Γ(x)| ≤ Γ(1-x)/π for x < 1: a smooth bound that is not
                // fooled by coefficients that happen to sit next to a pole.
                asymptotic_log_bound_.push_back(arg < 1.0 ? std::lgamma(1.0 - arg) - std::log(std::numbers::pi)
                                                          : -std::lgamma(arg));
            }
        }
    }

    [[nodiscard]] MLIndex index() const { return idx_; }

    double operator()(double z) const {
        if (std::isnan(z)) fail(ErrorKind::domain, "ml_eval: NaN argument");
        if (z > ml_z_max) {
            std::ostringstream os;
            os << "ml_eval: z = " << z << " exceeds the supported maximum " << ml_z_max;
            fail(ErrorKind::unsupported_range, os.str());
        }
        if (z == 0.0) return series_coeffs_[0];
        if (z == -std::numeric_limits<double>::infinity()) return 0.0;
        const double r = std::pow(std::abs(z), 1.0 / idx_.alpha);
        if (r <= series_radius) return series(z);
        if (idx_.alpha == 1.0) return unit_alpha(z);
        if (z < 0.0 && idx_.alpha < 1.0) {
            double value = 0.0;
            if (asymptotic(z, value)) return value;
        }
        return integral(z);
    }

    /// Power series branch (valid for any z; accurate while |z|^{1/α} is moderate).
    [[nodiscard]] double series(double z) const {
        detail::CompensatedSum acc;
        double zk = 1.0;
        for (double c : series_coeffs_) {
            acc.add(zk * c);
            zk *= z;
        }
        return acc.value();
    }

    /// Asymptotic branch for z < 0, α < 1. Returns false when the expansion
    /// cannot deliver double precision at this z.
    bool asymptotic(double z, double& value) const {
        if (!(z < 0.0) || idx_.alpha >= 1.0) return false;
        const double x = -z;
        const double r = std::pow(x, 1.0 / idx_.alpha);
        const double c = std::cos(std::numbers::pi / idx_.alpha);
        detail::CompensatedSum acc;
        const double inv = 1.0 / z;
        const double log_x = std::log(x);
        double zk = 1.0;
        double prev_bound = std::numeric_limits<double>::infinity();
        double bound = prev_bound;
        for (std::size_t k = 0; k < asymptotic_coeffs_.size(); ++k) {
            zk *= inv;
            bound = std::exp(asymptotic_log_bound_[k] - (k + 1.0) * log_x);
            if (bound > prev_bound) return false; // diverging before reaching double precision
            prev_bound = bound;
            acc.add(-zk * asymptotic_coeffs_[k]);
            if (k >= 1 && bound <= 1e-17 * std::abs(acc.value())) break;
        }
        const bool converged = bound <= 1e-17 * std::abs(acc.value());
        const double v = acc.value();
        if (!converged || v == 0.0) return false;
        // Exponentially small remainder: for α ≥ 2/3 it behaves like
        // exp(r cos(π/α)); below that it is far smaller once r is large.
        if (idx_.alpha >= 2.0 / 3.0) {
            const double scale = std::pow(r, 1.0 - idx_.beta) / idx_.alpha;
            if (!(std::exp(r * c) * std::max(1.0, scale) < 1e-17 * std::abs(v))) return false;
        } else if (r < 40.0) {
            return false;
        }
        value = v;
        return true;
    }

    /// Branch-cut integral plus principal-sheet residues (α ≠ 1).
    [[nodiscard]] double integral(double z) const {
        const double alpha = idx_.alpha;
        double beta = idx_.beta;
        if (alpha == 1.0) return unit_alpha(z);
        // The cut integral converges at r = 0 only for β < 1 + α; reduce β with
        // E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z.
        if (beta >= 1.0 + alpha) {
            const MittagLeffler lower(MLIndex{alpha, beta - alpha});
            return (lower.integral(z) - rgamma(beta - alpha)) / z;
        }
        const double pi = std::numbers::pi;
        const double sa = std::sin(pi * alpha);
        const double ca = std::cos(pi * alpha);
        const double sb = std::sin(pi * beta);
        const double sab = std::sin(pi * (alpha - beta));
        auto kernel = [=](double rr) -> double {
            if (rr <= 0.0) return 0.0;
            const double ra = std::pow(rr, alpha);
            const double d1 = ra - z * ca;
            const double d2 = z * sa;
            const double den = d1 * d1 + d2 * d2;
            const double e = std::exp(-rr);
            if (e == 0.0) return 0.0;
            return e * std::pow(rr, alpha - beta) * (ra * sb + z * sab) / den;
        };
        const double r0 = std::pow(std::abs(z), 1.0 / alpha);
        double part = 0.0;
        if (r0 < 700.0) {
            part += detail::tanh_sinh_rule().integrate(kernel, 0.0, r0, 1e-15);
            part += detail::exp_sinh_rule().integrate(kernel, r0, std::numeric_limits<double>::infinity(),
                                                      1e-15);
        } else {
            // Integrand is negligible beyond r ≈ 745; the peak at r0 cannot contribute.
            part += detail::tanh_sinh_rule().integrate(kernel, 0.0, 745.0, 1e-15);
        }
        double value = part / pi;
        value += residues(z);
        return value;
    }

private:
    static constexpr int asymptotic_terms_max = 60;

    [[nodiscard]] double residues(double z) const {
        const double alpha = idx_.alpha;
        const double beta = idx_.beta;
        if (z > 0.0) {
            const double s = std::pow(z, 1.0 / alpha);
            return std::pow(s, 1.0 - beta) * std::exp(s) / alpha;
        }
        if (alpha > 1.0) {
            const std::complex<double> s = std::polar(std::pow(-z, 1.0 / alpha), std::numbers::pi / alpha);
            const std::complex<double> term = std::pow(s, 1.0 - beta) * std::exp(s);
            return 2.0 * term.real() / alpha;
        }
        return 0.0;
    }

    [[nodiscard]] double unit_alpha(double z) const {
        const double beta = idx_.beta;
        if (beta == 1.0) return std::exp(z);
        if (beta == std::floor(beta) && beta > 1.0 && beta < 40.0) {
            // E_{1,n}(z) = (e^z - Σ_{k<n-1} z^k/k!) / z^{n-1}
            const int n = static_cast<int>(beta);
            detail::CompensatedSum acc;
            acc.add(std::exp(z));
            double term = 1.0;
            for (int k = 0; k < n - 1; ++k) {
                acc.add(-term);
                term *= z / (k + 1);
            }
            return acc.value() / std::pow(z, n - 1);
        }
        if (beta > 1.0) {
            // E_{1,β}(z) = (1/Γ(β-1)) ∫_0^1 e^{zs} (1-s)^{β-2} ds
            auto f = [&](double s, double dist) {
                const double one_minus = s > 0.5 ? dist : 1.0 - s;
                return std::exp(z * s) * std::pow(one_minus, beta - 2.0);
            };
            return detail::tanh_sinh_rule().integrate(f, 0.0, 1.0, 1e-15) * rgamma(beta - 1.0);
        }
        const MittagLeffler upper(MLIndex{1.0, beta + 1.0});
        return rgamma(beta) + z * upper(z);
    }

    MLIndex idx_;
    std::vector<double> series_coeffs_;
    std::vector<double> asymptotic_coeffs_;
    std::vector<double> asymptotic_log_bound_;
};

/// E_{α,β}(z) for real z ≤ 10.
inline double ml_eval(MLIndex idx, double z) { return MittagLeffler(idx)(z); }

/// Three-parameter (Prabhakar) function with γ = 2,
/// E²_{α,β}(z) = Σ (k+1) z^k / Γ(αk+β) = [E_{α,β-1}(z) + (1+α-β) E_{α,β}(z)] / α.
class MittagLefflerSquared {
public:
    explicit MittagLefflerSquared(MLIndex idx)
        : idx_(idx), lower_(MLIndex{idx.alpha, idx.beta - 1.0}), same_(idx) {}

    double operator()(double z) const {
        return (lower_(z) + (1.0 + idx_.alpha - idx_.beta) * same_(z)) / idx_.alpha;
    }

private:
    MLIndex idx_;
    MittagLeffler lower_;
    MittagLeffler same_;
};

// ---------------------------------------------------------------------------
// Mittag-Leffler type functions e_{α,β}(t, λ) = t^{β-1} E_{α,β}(-λ t^α)
// ---------------------------------------------------------------------------

struct MLTFSpec {
    double alpha = 1.0;
    double beta = 1.0;
    double lambda = 0.0;
};

/// Reusable evaluator of e_{α,β}(·, λ).
class MLTF {
public:
    explicit MLTF(MLTFSpec spec) : spec_(spec), ml_(MLIndex{spec.alpha, spec.beta}) {
        if (!(spec.lambda >= 0.0)) fail(ErrorKind::domain, "MLTF: lambda must be nonnegative");
    }

    [[nodiscard]] const MLTFSpec& spec() const { return spec_; }

    double operator()(double t) const {
        if (!(t > 0.0)) {
            std::ostringstream os;
            os << "mltf_eval: t must be positive (t = " << t << ")";
            fail(ErrorKind::domain, os.str());
        }
        return std::pow(t, spec_.beta - 1.0) * ml_(-spec_.lambda * std::pow(t, spec_.alpha));
    }

    /// t^{1-β} e_{α,β}(t, λ) = E_{α,β}(-λ t^α); finite as t → 0⁺.
    [[nodiscard]] double weighted(double t) const { return ml_(-spec_.lambda * std::pow(t, spec_.alpha)); }

private:
    MLTFSpec spec_;
    MittagLeffler ml_;
};

inline double mltf_eval(const MLTFSpec& spec, double t) { return MLTF(spec)(t); }

/// Closed form of the convolution of two MLTFs sharing α and λ:
/// (e_{α,β₁} * e_{α,β₂})(t) = t^{β₁+β₂-1} E²_{α,β₁+β₂}(-λ t^α).
class MLTFPairConvolution {
public:
    MLTFPairConvolution(double alpha, double beta1, double beta2, double lambda)
        : alpha_(alpha), beta_(beta1 + beta2), lambda_(lambda), e2_(MLIndex{alpha, beta1 + beta2}) {}

    double operator()(double t) const {
        if (!(t > 0.0)) fail(ErrorKind::domain, "MLTF convolution: t must be positive");
        return std::pow(t, beta_ - 1.0) * e2_(-lambda_ * std::pow(t, alpha_));
    }

private:
    double alpha_;
    double beta_;
    double lambda_;
    MittagLefflerSquared e2_;
};

// ---------------------------------------------------------------------------
// Laplace convolution of two MLTFs by quadrature
// ---------------------------------------------------------------------------

namespace detail {

/// ∫_0^{1/2} σ^{β-1} g(σ) dσ with the weight absorbed by v = σ^β and
/// geometric panels graded towards σ = 0. `level` controls resolution.
template <class G>
double weighted_half_integral(const G& g, double beta, int level) {
    using rule = boost::math::quadrature::gauss<double, 15>;
    const double vmax = std::pow(0.5, beta);
    const int depth = 10 + 4 * level;
    const int sub = 1 + level;
    auto integrand = [&](double v) { return g(std::pow(v, 1.0 / beta)); };
    double total = 0.0;
    double hi = vmax;
    for (int j = 0; j < depth; ++j) {
        const double lo = hi * 0.5;
        const double w = (hi - lo) / sub;
        for (int s = 0; s < sub; ++s) total += rule::integrate(integrand, lo + s * w, lo + (s + 1) * w);
        hi = lo;
    }
    total += rule::integrate(integrand, 0.0, hi);
    return total / beta;
}

} // namespace detail

/// ∫_0^t e_a(t-s) e_b(s) ds.
///
/// Substitutes s = tσ, splits at σ = 1/2 and absorbs the endpoint singularities
/// σ^{β_b-1} and (1-σ)^{β_a-1} into the change of variables of each half.
/// Panels are refined until two successive levels agree to
/// tol·(1+|result|); at most 20 refinement levels.
inline double mltf_convolve(const MLTFSpec& a, const MLTFSpec& b, double t, double tol = 1e-8) {
    if (!(t > 0.0)) fail(ErrorKind::domain, "mltf_convolve: t must be positive");
    if (!(a.beta > 0.0 && b.beta > 0.0)) fail(ErrorKind::domain, "mltf_convolve: beta must be positive");
    tol = std::max(tol, 1e-12);
    const MLTF ea(a);
    const MLTF eb(b);
    // σ^{β_b-1} (left) and (1-σ)^{β_a-1} (right) are factored out analytically.
    const double scale_left = std::pow(t, b.beta - 1.0);
    const double scale_right = std::pow(t, a.beta - 1.0);
    auto left = [&](double sigma) { return ea(t * (1.0 - sigma)) * scale_left * eb.weighted(t * sigma); };
    auto right = [&](double u) { return eb(t * (1.0 - u)) * scale_right * ea.weighted(t * u); };
    double previous = std::numeric_limits<double>::quiet_NaN();
    double estimate = 0.0;
    for (int level = 0; level <= 20; ++level) {
        estimate = t * (detail::weighted_half_integral(left, b.beta, level) +
                        detail::weighted_half_integral(right, a.beta, level));
        if (level > 0 && std::abs(estimate - previous) <= tol * (1.0 + std::abs(estimate))) return estimate;
        previous = estimate;
    }
    std::ostringstream os;
    os << "mltf_convolve: no convergence after 20 levels (estimate " << estimate << ", last change "
       << std::abs(estimate - previous) << ")";
    fail(ErrorKind::accuracy, os.str());
}

} // namespace dnspectral
