#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/special_functions.hpp"

#include <boost/math/interpolators/cubic_hermite.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace dnspectral {

/// Orders (α₀, …, α_m) of the Dzherbashian-Nersesian operator
/// J^{1-α_m} D^{α_{m-1}} … D^{α_0}.
struct DNMultiOrder {
    std::vector<double> alphas;

    DNMultiOrder() = default;
    explicit DNMultiOrder(std::vector<double> a) : alphas(std::move(a)) { validate(); }
    DNMultiOrder(double alpha0, double alpha1) : DNMultiOrder(std::vector<double>{alpha0, alpha1}) {}

    [[nodiscard]] int m() const { return static_cast<int>(alphas.size()) - 1; }

    /// ρ_k = α₀ + … + α_k − 1.
    [[nodiscard]] double rho(int k) const {
        double s = -1.0;
        for (int j = 0; j <= k; ++j) s += alphas[static_cast<std::size_t>(j)];
        return s;
    }
    [[nodiscard]] double rho() const { return rho(m()); }

    void validate() const {
        if (alphas.size() < 2) fail(ErrorKind::domain, "DNMultiOrder: need at least two orders (m >= 1)");
        for (double a : alphas) {
            if (!(a > 0.0 && a <= 1.0)) {
                std::ostringstream os;
                os << "DNMultiOrder: every order must lie in (0,1], got " << a;
                fail(ErrorKind::domain, os.str());
            }
        }
        if (!(rho() > 0.0)) fail(ErrorKind::domain, "DNMultiOrder: the sum of orders must exceed 1");
    }
};

/// Function known at scattered times, interpolated by a monotone piecewise
/// cubic (Fritsch-Carlson slopes) and held constant outside the node range.
class SampledFunction {
public:
    SampledFunction(std::vector<double> nodes, std::vector<double> values) {
        if (nodes.size() != values.size()) fail(ErrorKind::domain, "SampledFunction: size mismatch");
        if (nodes.size() < 3) fail(ErrorKind::domain, "SampledFunction: at least 3 nodes required");
        if (!(nodes[0] >= 0.0)) fail(ErrorKind::domain, "SampledFunction: nodes must be nonnegative");
        for (std::size_t i = 1; i < nodes.size(); ++i)
            if (!(nodes[i] > nodes[i - 1]))
                fail(ErrorKind::domain, "SampledFunction: nodes must be strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) fail(ErrorKind::domain, "SampledFunction: values must be finite");
        front_ = nodes.front();
        back_ = nodes.back();
        first_ = values.front();
        last_ = values.back();
        auto slopes = pchip_slopes(nodes, values);
        interp_ = std::make_shared<Interp>(std::move(nodes), std::move(values), std::move(slopes));
    }

    double operator()(double t) const {
        if (t <= front_) return first_;
        if (t >= back_) return last_;
        return (*interp_)(t);
    }

    [[nodiscard]] double front() const { return front_; }
    [[nodiscard]] double back() const { return back_; }

private:
    using Interp = boost::math::interpolators::cubic_hermite<std::vector<double>>;

    static std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
        const std::size_t n = x.size();
        std::vector<double> h(n - 1), d(n - 1), s(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x[i + 1] - x[i];
            d[i] = (y[i + 1] - y[i]) / h[i];
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) continue;
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            s[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double v = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (v * d0 <= 0.0) return 0.0;
            if (d0 * d1 <= 0.0 && std::abs(v) > 3.0 * std::abs(d0)) v = 3.0 * d0;
            return v;
        };
        s[0] = end_slope(h[0], h[1], d[0], d[1]);
        s[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
        return s;
    }

    double front_ = 0.0;
    double back_ = 0.0;
    double first_ = 0.0;
    double last_ = 0.0;
    std::shared_ptr<Interp> interp_;
};

/// A function of time handed to the fractional operators: either a callable
/// (possibly weakly singular at t = 0) or sampled data.
class TimeFunction {
public:
    using Callable = std::function<double(double)>;

    TimeFunction(SampledFunction s) : repr_(std::move(s)) {}
    template <class F>
        requires(std::is_invocable_r_v<double, const F&, double> &&
                 !std::is_same_v<std::decay_t<F>, TimeFunction> &&
                 !std::is_same_v<std::decay_t<F>, SampledFunction>)
    TimeFunction(F f) : repr_(Callable(std::move(f))) {}

    [[nodiscard]] bool sampled() const { return std::holds_alternative<SampledFunction>(repr_); }

    double operator()(double t) const {
        if (const auto* s = std::get_if<SampledFunction>(&repr_)) return (*s)(t);
        return std::get<Callable>(repr_)(t);
    }

private:
    std::variant<Callable, SampledFunction> repr_;
};

/// Closed-form image of t^μ under J^α (`derivative` false) or D^α.
struct Monomial {
    double coefficient;
    double exponent;
};

inline Monomial rl_monomial(double alpha, double mu, bool derivative) {
    if (!(mu > -1.0)) fail(ErrorKind::domain, "rl_monomial: mu must exceed -1");
    if (derivative) {
        if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "rl_monomial: derivative order must lie in (0,1]");
        return {gamma(mu + 1.0) * rgamma(mu - alpha + 1.0), mu - alpha};
    }
    if (!(alpha >= 0.0)) fail(ErrorKind::domain, "rl_monomial: integral order must be nonnegative");
    return {gamma(mu + 1.0) * rgamma(mu + alpha + 1.0), mu + alpha};
}

namespace detail {

inline void require_positive_time(double t, const char* who) {
    if (!(t > 0.0)) {
        std::ostringstream os;
        os << who << ": t must be positive (t = " << t << ")";
        fail(ErrorKind::domain, os.str());
    }
}

inline void require_steps(int steps, int minimum, const char* who) {
    if (steps < minimum) {
        std::ostringstream os;
        os << who << ": steps must be at least " << minimum;
        fail(ErrorKind::domain, os.str());
    }
}

/// k^p - (k-1)^p without cancellation for large k.
inline double power_difference(double k, double p) {
    if (k <= 1.0) return std::pow(k, p);
    return -std::pow(k, p) * std::expm1(p * std::log1p(-1.0 / k));
}

/// Product-trapezoid weights for J^β on a uniform grid, in units of h^β.
/// A cell whose far end lies k steps before the evaluation node contributes
/// left(k)·f_near + right(k)·f_far, where "near" is the cell end closer to 0.
class TrapezoidWeights {
public:
    TrapezoidWeights(double beta, int n) : left_(static_cast<std::size_t>(n) + 1), right_(left_.size()) {
        for (int k = 1; k <= n; ++k) {
            const double a = power_difference(k, beta + 1.0) / (beta + 1.0);
            const double b = power_difference(k, beta) / beta;
            left_[static_cast<std::size_t>(k)] = a - (k - 1.0) * b;
            right_[static_cast<std::size_t>(k)] = k * b - a;
        }
    }
    [[nodiscard]] double left(int k) const { return left_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] double right(int k) const { return right_[static_cast<std::size_t>(k)]; }

private:
    std::vector<double> left_;
    std::vector<double> right_;
};

inline constexpr int direct_first_cells = 16;
inline constexpr int first_cell_moments = 8;

/// ∫_0^1 (j - s)^{β-1} f(h s) ds, the first cell of J^β at node j (units of h).
inline double first_cell(double beta, const TimeFunction& f, double h, int j) {
    auto& rule = tanh_sinh_rule();
    if (j == 1) {
        auto g = [&](double s, double sc) {
            const double one_minus = s > 0.5 ? sc : 1.0 - s;
            if (!(one_minus > 0.0)) return 0.0;
            return std::pow(one_minus, beta - 1.0) * f(h * s);
        };
        return rule.integrate(g, 0.0, 1.0, 1e-12);
    }
    auto g = [&](double s) { return std::pow(j - s, beta - 1.0) * f(h * s); };
    return rule.integrate(g, 0.0, 1.0, 1e-12);
}

/// First-cell contributions for every node 1..n of a callable.
inline std::vector<double> first_cells(double beta, const TimeFunction& f, double h, int n) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1, 0.0);
    const int direct = std::min(n, direct_first_cells);
    for (int j = 1; j <= direct; ++j) out[static_cast<std::size_t>(j)] = first_cell(beta, f, h, j);
    if (n <= direct) return out;
    // Beyond a few cells the kernel is smooth on [0, h]: expand (j-s)^{β-1}
    // in s/j and reuse the moments ∫ s^q f(hs) ds.
    std::vector<double> moments(first_cell_moments);
    auto& rule = tanh_sinh_rule();
    for (int q = 0; q < first_cell_moments; ++q) {
        auto g = [&](double s) { return std::pow(s, q) * f(h * s); };
        moments[static_cast<std::size_t>(q)] = rule.integrate(g, 0.0, 1.0, 1e-13);
    }
    std::vector<double> binom(first_cell_moments);
    binom[0] = 1.0;
    for (int q = 1; q < first_cell_moments; ++q)
        binom[static_cast<std::size_t>(q)] = -binom[static_cast<std::size_t>(q) - 1] * (beta - 1.0 - (q - 1)) / q;
    for (int j = direct + 1; j <= n; ++j) {
        double acc = 0.0;
        double scale = std::pow(static_cast<double>(j), beta - 1.0);
        for (int q = 0; q < first_cell_moments; ++q) {
            acc += binom[static_cast<std::size_t>(q)] * moments[static_cast<std::size_t>(q)] * scale;
            scale /= j;
        }
        out[static_cast<std::size_t>(j)] = acc;
    }
    return out;
}

/// Values of f at the grid nodes 1..n; node 0 is only read for sampled data.
inline std::vector<double> nodal_values(const TimeFunction& f, double h, int n) {
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    v[0] = f.sampled() ? f(0.0) : std::numeric_limits<double>::quiet_NaN();
    for (int j = 1; j <= n; ++j) v[static_cast<std::size_t>(j)] = f(j * h);
    return v;
}

/// lim_{t→0⁺} J^β f(t). Sampled data are bounded, so the limit is f(0) for
/// β = 0 and 0 otherwise. For callables the value is followed along
/// t = scale·10^{-2i} until it settles.
inline double rl_integral_at_zero(double beta, const TimeFunction& f, double scale) {
    if (f.sampled()) return beta == 0.0 ? f(0.0) : 0.0;
    auto at = [&](double eps) {
        if (beta == 0.0) return f(eps);
        auto g = [&](double s, double sc) {
            const double one_minus = s > 0.5 ? sc : 1.0 - s;
            if (!(one_minus > 0.0)) return 0.0;
            return std::pow(one_minus, beta - 1.0) * f(eps * s);
        };
        return std::pow(eps, beta) * rgamma(beta) * tanh_sinh_rule().integrate(g, 0.0, 1.0, 1e-12);
    };
    double prev = at(scale * 1e-2);
    double size = std::abs(prev);
    for (int i = 2; i <= 150; ++i) {
        const double cur = at(scale * std::pow(10.0, -2.0 * i));
        size = std::max(size, std::abs(cur));
        if (std::abs(cur - prev) <= 1e-13 * size) return cur;
        prev = cur;
    }
    return prev;
}

/// J^β f at every node 0..n of the uniform grid with spacing h. Node 0 holds
/// the limit at 0⁺.
inline std::vector<double> rl_integral_nodes(double beta, const TimeFunction& f, double h, int n) {
    std::vector<double> out(static_cast<std::size_t>(n) + 1);
    if (beta == 0.0) {
        out = nodal_values(f, h, n);
        out[0] = rl_integral_at_zero(0.0, f, h);
        return out;
    }
    const auto v = nodal_values(f, h, n);
    const TrapezoidWeights w(beta, n);
    std::vector<double> first;
    if (!f.sampled()) first = first_cells(beta, f, h, n);
    const double scale = std::pow(h, beta) * rgamma(beta);
    out[0] = rl_integral_at_zero(beta, f, h);
    for (int j = 1; j <= n; ++j) {
        CompensatedSum acc;
        if (f.sampled())
            acc.add(w.left(j) * v[0] + w.right(j) * v[1]);
        else
            acc.add(first[static_cast<std::size_t>(j)]);
        for (int c = 1; c < j; ++c)
            acc.add(w.left(j - c) * v[static_cast<std::size_t>(c)] + w.right(j - c) * v[static_cast<std::size_t>(c) + 1]);
        out[static_cast<std::size_t>(j)] = scale * acc.value();
    }
    return out;
}

/// J^β f at node j of the grid with spacing h, touching only nodes ≤ j.
inline double rl_integral_node(double beta, const TimeFunction& f, double h, int j) {
    if (beta == 0.0) return f(j * h);
    const TrapezoidWeights w(beta, j);
    CompensatedSum acc;
    if (f.sampled())
        acc.add(w.left(j) * f(0.0) + w.right(j) * f(h));
    else
        acc.add(first_cell(beta, f, h, j));
    double prev = f(h);
    for (int c = 1; c < j; ++c) {
        const double next = f((c + 1) * h);
        acc.add(w.left(j - c) * prev + w.right(j - c) * next);
        prev = next;
    }
    return std::pow(h, beta) * rgamma(beta) * acc.value();
}

/// Second-order one-sided derivative at node j ≥ 2.
inline double backward_derivative(const std::vector<double>& v, int j, double h) {
    const auto i = static_cast<std::size_t>(j);
    return (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h);
}

/// J^{1-α}(H') at node n for H known at nodes 0..n: exact for piecewise
/// linear H (the L1 scheme). For α = 1 this is H'(t_n).
inline double l1_stage(double alpha, const std::vector<double>& H, double h, int n) {
    if (alpha == 1.0) return backward_derivative(H, n, h);
    const double g = 1.0 - alpha;
    CompensatedSum acc;
    for (int c = 0; c < n; ++c)
        acc.add((H[static_cast<std::size_t>(c) + 1] - H[static_cast<std::size_t>(c)]) * power_difference(n - c, g));
    return std::pow(h, g - 1.0) * rgamma(g + 1.0) * acc.value();
}

/// Nodal derivative of H (nodes 1..n); node 0 copies node 1.
inline std::vector<double> nodal_derivative(const std::vector<double>& H, double h) {
    const int n = static_cast<int>(H.size()) - 1;
    std::vector<double> d(H.size());
    for (int j = 1; j < n; ++j)
        d[static_cast<std::size_t>(j)] = (H[static_cast<std::size_t>(j) + 1] - H[static_cast<std::size_t>(j) - 1]) / (2.0 * h);
    d[static_cast<std::size_t>(n)] = backward_derivative(H, n, h);
    d[0] = d[1];
    return d;
}

/// Innermost m stages of the DN operator on the grid: returns H = J^{1-α_{m-1}}
/// D^{α_{m-2}} … D^{α_0} f at nodes 0..n, ready for the final L1 stage.
inline std::vector<double> dn_inner(const DNMultiOrder& order, const TimeFunction& f, double h, int n) {
    std::vector<double> H = rl_integral_nodes(1.0 - order.alphas[0], f, h, n);
    for (int j = 1; j < order.m(); ++j) {
        // Intermediate stages are carried as bounded nodal data.
        auto d = nodal_derivative(H, h);
        std::vector<double> nodes(d.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<double>(i) * h;
        const TimeFunction g(SampledFunction(std::move(nodes), std::move(d)));
        H = rl_integral_nodes(1.0 - order.alphas[static_cast<std::size_t>(j)], g, h, n);
    }
    return H;
}

} // namespace detail

/// Riemann-Liouville integral J^α f(t) by product-trapezoid quadrature on a
/// uniform grid of `steps` cells. For callables the first cell is integrated
/// adaptively so that weak singularities at 0 are harmless.
inline double rl_integral(double alpha, const TimeFunction& f, double t, int steps) {
    detail::require_positive_time(t, "rl_integral");
    detail::require_steps(steps, 1, "rl_integral");
    if (!(alpha >= 0.0)) fail(ErrorKind::domain, "rl_integral: alpha must be nonnegative");
    return detail::rl_integral_node(alpha, f, t / steps, steps);
}

/// Riemann-Liouville derivative D^α f(t) = d/dt J^{1-α} f(t): J^{1-α} f on the
/// grid followed by a second-order backward difference at t.
inline double rl_derivative(double alpha, const TimeFunction& f, double t, int steps) {
    detail::require_positive_time(t, "rl_derivative");
    detail::require_steps(steps, 2, "rl_derivative");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::domain, "rl_derivative: alpha must lie in (0,1]");
    const double h = t / steps;
    const double beta = 1.0 - alpha;
    std::vector<double> H(3);
    for (int i = 0; i < 3; ++i) H[static_cast<std::size_t>(i)] = detail::rl_integral_node(beta, f, h, steps - 2 + i);
    return detail::backward_derivative(H, 2, h);
}

namespace detail {

/// Closed-form DN image of the constant f(0) for callables defined at 0 with
/// finite, nonzero f(0). Subtracting it leaves data that vanish at 0, which
/// the L1 stage resolves near the origin.
struct ConstantPart {
    double value;
    Monomial image;
};

inline std::optional<ConstantPart> constant_part(const DNMultiOrder& order, const TimeFunction& f) {
    if (f.sampled()) return std::nullopt;
    double c = 0.0;
    try {
        c = f(0.0);
    } catch (const Error&) {
        return std::nullopt; // not defined at 0
    }
    if (c == 0.0 || !std::isfinite(c)) return std::nullopt;
    Monomial m{c, 0.0};
    for (int k = 0; k < order.m(); ++k) {
        const auto d = rl_monomial(order.alphas[static_cast<std::size_t>(k)], m.exponent, true);
        m = {m.coefficient * d.coefficient, d.exponent};
        if (m.coefficient == 0.0) return ConstantPart{c, {0.0, 0.0}};
        if (!(m.exponent > -1.0)) return std::nullopt;
    }
    const auto j = rl_monomial(1.0 - order.alphas.back(), m.exponent, false);
    return ConstantPart{c, {m.coefficient * j.coefficient, j.exponent}};
}

inline TimeFunction without_constant(const TimeFunction& f, double c) {
    return TimeFunction([f, c](double s) { return f(s) - c; });
}

inline double monomial_at(const Monomial& m, double t) { return m.coefficient == 0.0 ? 0.0 : m.coefficient * std::pow(t, m.exponent); }

inline std::vector<double> dn_trace_numeric(const DNMultiOrder& order, const TimeFunction& f, double h, int steps) {
    const auto H = dn_inner(order, f, h, steps);
    std::vector<double> out(static_cast<std::size_t>(steps) + 1, std::numeric_limits<double>::quiet_NaN());
    const double alpha = order.alphas.back();
    if (alpha == 1.0) {
        out[1] = (H[1] - H[0]) / h;
        for (int j = 2; j <= steps; ++j) out[static_cast<std::size_t>(j)] = backward_derivative(H, j, h);
        return out;
    }
    // Same sums as l1_stage, with the kernel differences tabulated once.
    const double g = 1.0 - alpha;
    std::vector<double> b(static_cast<std::size_t>(steps) + 1);
    for (int k = 1; k <= steps; ++k) b[static_cast<std::size_t>(k)] = power_difference(k, g);
    const double scale = std::pow(h, g - 1.0) * rgamma(g + 1.0);
    for (int j = 1; j <= steps; ++j) {
        CompensatedSum acc;
        for (int c = 0; c < j; ++c)
            acc.add((H[static_cast<std::size_t>(c) + 1] - H[static_cast<std::size_t>(c)]) * b[static_cast<std::size_t>(j - c)]);
        out[static_cast<std::size_t>(j)] = scale * acc.value();
    }
    return out;
}

} // namespace detail

/// DN f(t) = J^{1-α_m} D^{α_{m-1}} … D^{α_0} f(t). All stages share the uniform
/// grid of `steps` cells on [0, t]; the last one is the L1 scheme.
inline double dn_apply(const DNMultiOrder& order, const TimeFunction& f, double t, int steps) {
    order.validate();
    detail::require_positive_time(t, "dn_apply");
    detail::require_steps(steps, 2, "dn_apply");
    const double h = t / steps;
    if (const auto c = detail::constant_part(order, f)) {
        const auto H = detail::dn_inner(order, detail::without_constant(f, c->value), h, steps);
        return detail::l1_stage(order.alphas.back(), H, h, steps) + detail::monomial_at(c->image, t);
    }
    const auto H = detail::dn_inner(order, f, h, steps);
    return detail::l1_stage(order.alphas.back(), H, h, steps);
}

/// DN f at every node of the uniform grid on [0, T]. Element 0 is NaN since
/// the operator is not evaluated at t = 0.
inline std::vector<double> dn_apply_trace(const DNMultiOrder& order, const TimeFunction& f, double T, int steps) {
    order.validate();
    detail::require_positive_time(T, "dn_apply_trace");
    detail::require_steps(steps, 2, "dn_apply_trace");
    const double h = T / steps;
    const auto c = detail::constant_part(order, f);
    if (!c) return detail::dn_trace_numeric(order, f, h, steps);
    auto out = detail::dn_trace_numeric(order, detail::without_constant(f, c->value), h, steps);
    for (int j = 1; j <= steps; ++j) out[static_cast<std::size_t>(j)] += detail::monomial_at(c->image, j * h);
    return out;
}

/// |J^{ρ}(DN f)(t) - f(t) + t^{α₀-1}/Γ(α₀)·(J^{1-α₀} f)(0⁺)| for m = 1, where
/// ρ = α₀ + α₁ - 1. Vanishes for the exact operators. The image of a constant
/// f(0) is integrated in closed form.
inline double fundamental_relation_residual(const DNMultiOrder& order, const TimeFunction& f, double t, int steps) {
    order.validate();
    if (order.m() != 1) fail(ErrorKind::domain, "fundamental_relation_residual: only m = 1 is supported");
    detail::require_positive_time(t, "fundamental_relation_residual");
    detail::require_steps(steps, 2, "fundamental_relation_residual");
    const double rho = order.rho();
    const double h = t / steps;
    const auto c = detail::constant_part(order, f);
    auto trace = c ? detail::dn_trace_numeric(order, detail::without_constant(f, c->value), h, steps)
                   : detail::dn_trace_numeric(order, f, h, steps);
    trace[0] = trace[1];
    std::vector<double> nodes(trace.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = t * static_cast<double>(i) / steps;
    const TimeFunction dn(SampledFunction(std::move(nodes), std::move(trace)));
    double lhs = rl_integral(rho, dn, t, steps);
    if (c && c->image.coefficient != 0.0) {
        const auto j = rl_monomial(rho, c->image.exponent, false);
        lhs += c->image.coefficient * j.coefficient * std::pow(t, j.exponent);
    }
    const double a0 = order.alphas[0];
    const double initial = detail::rl_integral_at_zero(1.0 - a0, f, h);
    return std::abs(lhs - f(t) + std::pow(t, a0 - 1.0) * rgamma(a0) * initial);
}

} // namespace dnspectral
