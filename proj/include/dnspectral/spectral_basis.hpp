#pragma once

#include "dnspectral/errors.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

namespace dnspectral {

// Eigenfunctions of X'' = -λX on (0,1) with X(1) = 0, X'(0) = X'(1):
//   X₀ = 2(1-x),  X₁ₖ = 4(1-x)cos(2πkx),  X₂ₖ = 4sin(2πkx)
// and the adjoint family Y₀ = 1, Y₁ₖ = cos(2πkx), Y₂ₖ = x sin(2πkx), with
// ⟨X_i, Y_j⟩ = δ_ij. X₁ₖ is an associated function: X₁ₖ'' = -λₖX₁ₖ + 2√λₖ X₂ₖ.

enum class Family { root, cosine, sine };

inline const char* to_string(Family f) {
    switch (f) {
    case Family::root: return "root";
    case Family::cosine: return "cosine";
    case Family::sine: return "sine";
    }
    return "?";
}

struct BasisId {
    Family family = Family::root;
    int k = 0;

    static BasisId root() { return {Family::root, 0}; }
    static BasisId cosine(int k) { return checked({Family::cosine, k}); }
    static BasisId sine(int k) { return checked({Family::sine, k}); }

    static BasisId checked(BasisId id) {
        if (id.family == Family::root ? id.k != 0 : id.k < 1) {
            std::ostringstream os;
            os << "BasisId: invalid index k=" << id.k << " for family " << to_string(id.family);
            fail(ErrorKind::domain, os.str());
        }
        return id;
    }
};

/// λₖ = (2πk)².
inline double eigenvalue(int k) {
    if (k < 0) fail(ErrorKind::domain, "eigenvalue: k must be nonnegative");
    const double w = 2.0 * std::numbers::pi * k;
    return w * w;
}

inline double eval_eigenfunction(BasisId id, double x) {
    const double w = 2.0 * std::numbers::pi * id.k;
    switch (id.family) {
    case Family::root: return 2.0 * (1.0 - x);
    case Family::cosine: return 4.0 * (1.0 - x) * std::cos(w * x);
    case Family::sine: return 4.0 * std::sin(w * x);
    }
    return 0.0;
}

/// Second derivative in x, exact.
inline double eval_eigenfunction_xx(BasisId id, double x) {
    const double w = 2.0 * std::numbers::pi * id.k;
    switch (id.family) {
    case Family::root: return 0.0;
    case Family::cosine: return 8.0 * w * std::sin(w * x) - w * w * eval_eigenfunction(id, x);
    case Family::sine: return -w * w * eval_eigenfunction(id, x);
    }
    return 0.0;
}

inline double eval_adjoint(BasisId id, double x) {
    const double w = 2.0 * std::numbers::pi * id.k;
    switch (id.family) {
    case Family::root: return 1.0;
    case Family::cosine: return std::cos(w * x);
    case Family::sine: return x * std::sin(w * x);
    }
    return 0.0;
}

/// Coefficients in the X basis: c0·X₀ + Σₖ c1[k-1]·X₁ₖ + c2[k-1]·X₂ₖ.
struct SpectralCoeffs {
    double c0 = 0.0;
    std::vector<double> c1;
    std::vector<double> c2;

    SpectralCoeffs() = default;
    explicit SpectralCoeffs(int N) : c1(static_cast<std::size_t>(N), 0.0), c2(static_cast<std::size_t>(N), 0.0) {
        if (N < 1) fail(ErrorKind::domain, "SpectralCoeffs: N must be at least 1");
    }

    [[nodiscard]] int N() const { return static_cast<int>(c1.size()); }

    void validate() const {
        if (c1.size() != c2.size() || c1.empty())
            fail(ErrorKind::domain, "SpectralCoeffs: c1 and c2 must have equal positive length");
    }
};

namespace detail {

/// 16-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre16 {
    std::array<double, 16> x{};
    std::array<double, 16> w{};

    GaussLegendre16() {
        const auto zeros = boost::math::legendre_p_zeros<double>(16);
        std::size_t i = 0;
        for (double z : zeros) {
            const double dp = boost::math::legendre_p_prime(16, z);
            const double wt = 2.0 / ((1.0 - z * z) * dp * dp);
            x[i] = -z;
            w[i] = wt;
            ++i;
            x[i] = z;
            w[i] = wt;
            ++i;
        }
    }

    static const GaussLegendre16& instance() {
        static const GaussLegendre16 rule;
        return rule;
    }
};

/// Composite nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> composite_gauss(int panels) {
    const auto& g = GaussLegendre16::instance();
    std::vector<double> xs, ws;
    xs.reserve(static_cast<std::size_t>(panels) * 16);
    ws.reserve(xs.capacity());
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (std::size_t i = 0; i < 16; ++i) {
            xs.push_back(mid + 0.5 * h * g.x[i]);
            ws.push_back(0.5 * h * g.w[i]);
        }
    }
    return {std::move(xs), std::move(ws)};
}

} // namespace detail

inline int default_panels(int N) { return 10 * std::max(N, 1); }

/// c_i = ∫₀¹ f·Y_i dx by composite 16-point Gauss-Legendre on `panels` panels.
inline SpectralCoeffs project(const std::function<double(double)>& f, int N, int panels = 0) {
    if (panels == 0) panels = default_panels(N);
    if (panels < 10 * N) {
        std::ostringstream os;
        os << "project: " << panels << " panels cannot resolve N = " << N << " (need at least " << 10 * N << ")";
        fail(ErrorKind::configuration, os.str());
    }
    SpectralCoeffs c(N);
    const auto [xs, ws] = detail::composite_gauss(panels);
    std::vector<double> fw(xs.size());
    for (std::size_t q = 0; q < xs.size(); ++q) fw[q] = f(xs[q]) * ws[q];
    for (std::size_t q = 0; q < xs.size(); ++q) c.c0 += fw[q];
    for (int k = 1; k <= N; ++k) {
        const double w = 2.0 * std::numbers::pi * k;
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t q = 0; q < xs.size(); ++q) {
            s1 += fw[q] * std::cos(w * xs[q]);
            s2 += fw[q] * xs[q] * std::sin(w * xs[q]);
        }
        c.c1[static_cast<std::size_t>(k) - 1] = s1;
        c.c2[static_cast<std::size_t>(k) - 1] = s2;
    }
    return c;
}

inline double reconstruct(const SpectralCoeffs& c, double x) {
    double v = c.c0 * 2.0 * (1.0 - x);
    for (int k = 1; k <= c.N(); ++k) {
        const double w = 2.0 * std::numbers::pi * k;
        v += 4.0 * (1.0 - x) * std::cos(w * x) * c.c1[static_cast<std::size_t>(k) - 1];
        v += 4.0 * std::sin(w * x) * c.c2[static_cast<std::size_t>(k) - 1];
    }
    return v;
}

struct DecayBound {
    double first;  // bound on |g₁ₖ|
    double second; // bound on |g₂ₖ|
};

/// Coefficient decay for g with ‖g⁽ⁿ⁾‖_{L²} = norm: |g₁ₖ| ≤ norm/kⁿ and
/// |g₂ₖ| ≤ (n+1)·norm/kⁿ.
inline DecayBound decay_bound(int nderiv, double norm, int k) {
    if (nderiv < 1 || nderiv > 4) fail(ErrorKind::domain, "decay_bound: nderiv must be in 1..4");
    if (!(norm >= 0.0)) fail(ErrorKind::domain, "decay_bound: norm must be nonnegative");
    if (k < 1) fail(ErrorKind::domain, "decay_bound: k must be positive");
    const double kn = std::pow(static_cast<double>(k), nderiv);
    return {norm / kn, (nderiv + 1) * norm / kn};
}

} // namespace dnspectral
