// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dnspectral/cli.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace dnspectral;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> body;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// Appends "label=value<=bound" and folds the comparison into the outcome.
void check(Outcome& o, const std::string& label, double value, double bound) {
    const bool pass = std::isfinite(value) && value <= bound;
    o.ok = o.ok && pass;
    if (!o.detail.empty()) o.detail += ", ";
    o.detail += label + "=" + num(value) + (pass ? "<=" : ">") + num(bound);
}

void check_at_least(Outcome& o, const std::string& label, double value, double bound) {
    const bool pass = std::isfinite(value) && value >= bound;
    o.ok = o.ok && pass;
    if (!o.detail.empty()) o.detail += ", ";
    o.detail += label + "=" + num(value) + (pass ? ">=" : "<") + num(bound);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

TimeFunction power(double mu) {
    return [mu](double t) { return std::pow(t, mu); };
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return v;
}

const SpatialFunction zero = [](double) { return 0.0; };
const SpatialFunction sine = [](double x) { return std::sin(2 * pi * x); };
const SpatialFunction root = [](double x) { return 2.0 * (1.0 - x); };

const std::vector<std::pair<double, double>> order_pairs{{0.9, 0.8}, {1.0, 0.6}, {0.7, 0.7}};

ForwardProblem forward_problem(double a0, double a1, SpatialFunction phi, SpatialFunction f = {}) {
    ForwardProblem p;
    p.alpha0 = a0;
    p.alpha1 = a1;
    p.phi = std::move(phi);
    p.source = std::move(f);
    return p;
}

Outcome special_functions() {
    Outcome o;
    double e11 = 0.0;
    for (int i = 0; i <= 3500; ++i) {
        const double z = -30.0 + 0.01 * i;
        e11 = std::max(e11, rel(ml_eval({1.0, 1.0}, z), std::exp(z)));
    }
    check(o, "E11 rel", e11, 1e-10);
    double e21 = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = 0.01 * i;
        e21 = std::max(e21, std::abs(ml_eval({2.0, 1.0}, -x) - std::cos(std::sqrt(x))));
    }
    check(o, "E21 abs", e21, 1e-10);
    double id = 0.0;
    for (int i = 1; i <= 10; ++i) {
        const double a = 0.1 * i;
        for (double lam : log_grid(1e-2, 1e4, 10))
            for (double t : log_grid(1e-3, 10.0, 10))
                id = std::max(id, std::abs(lam * mltf_eval({a, a + 1.0, lam}, t) + mltf_eval({a, 1.0, lam}, t) - 1.0));
    }
    check(o, "lambda identity abs", id, 1e-10);
    return o;
}

Outcome fractional_operators() {
    Outcome o;
    const int steps = 4096;
    double semi = 0.0;
    for (double a : {0.3, 0.5, 0.7})
        for (double b : {0.3, 0.5, 0.7}) {
            const TimeFunction inner = [b](double x) { return rl_integral(b, power(1.0), x, steps); };
            semi = std::max(semi, rel(rl_integral(a, inner, 1.0, steps), rl_monomial(a + b, 1.0, false).coefficient));
        }
    check(o, "semigroup rel", semi, 1e-4);
    double left = 0.0;
    for (double a : {0.3, 0.5, 0.7}) {
        const TimeFunction inner = [a](double x) { return rl_integral(a, power(2.0), x, steps); };
        left = std::max(left, rel(rl_derivative(a, inner, 1.0, steps), 1.0));
    }
    check(o, "left inverse rel", left, 1e-4);
    double rl = 0.0, caputo = 0.0, hilfer = 0.0;
    for (double a : {0.3, 0.5, 0.8})
        for (double mu : {1.0, 2.0}) {
            rl = std::max(rl, rel(dn_apply(DNMultiOrder(a, 1.0), power(mu), 1.0, steps), rl_monomial(a, mu, true).coefficient));
            const double c = std::tgamma(mu + 1.0) / std::tgamma(mu + 1.0 - a);
            caputo = std::max(caputo, rel(dn_apply(DNMultiOrder(1.0, a), power(mu), 1.0, steps), c));
        }
    for (double a : {0.5, 0.8})
        for (double type : {0.3, 0.7}) {
            const double a0 = 1.0 - (1.0 - a) * (1.0 - type), a1 = 1.0 - type * (1.0 - a);
            const auto d = rl_monomial(a0, 1.5, true);
            const auto j = rl_monomial(1.0 - a1, d.exponent, false);
            hilfer = std::max(hilfer, rel(dn_apply(DNMultiOrder(a0, a1), power(1.5), 1.0, steps), d.coefficient * j.coefficient));
        }
    check(o, "RL rel", rl, 1e-3);
    check(o, "Caputo rel", caputo, 1e-3);
    check(o, "Hilfer rel", hilfer, 1e-3);
    return o;
}

Outcome fundamental_relation() {
    Outcome o;
    const TimeFunction poly = [](double t) { return 1.0 + t - 0.5 * t * t + t * t * t; };
    double worst = 0.0, order = 1e9;
    for (auto [a0, a1] : {std::pair{0.9, 0.9}, std::pair{1.0, 0.6}, std::pair{0.7, 0.8}}) {
        const DNMultiOrder dn(a0, a1);
        const double r1 = fundamental_relation_residual(dn, poly, 1.0, 1024);
        const double r2 = fundamental_relation_residual(dn, poly, 1.0, 2048);
        worst = std::max(worst, r2);
        if (r2 > 1e-13) order = std::min(order, std::log2(r1 / r2));
    }
    check(o, "residual", worst, 5e-3);
    check_at_least(o, "order", order, 1.0);
    return o;
}

Outcome biorthogonality() {
    Outcome o;
    std::vector<BasisId> ids{BasisId::root()};
    for (int k = 1; k <= 16; ++k) {
        ids.push_back(BasisId::cosine(k));
        ids.push_back(BasisId::sine(k));
    }
    const auto [xs, ws] = detail::composite_gauss(160);
    double worst = 0.0;
    for (const auto& x : ids)
        for (const auto& y : ids) {
            double s = 0.0;
            for (std::size_t q = 0; q < xs.size(); ++q) s += ws[q] * eval_eigenfunction(x, xs[q]) * eval_adjoint(y, xs[q]);
            worst = std::max(worst, std::abs(s - (x.family == y.family && x.k == y.k ? 1.0 : 0.0)));
        }
    check(o, "max |<X_i,Y_j> - delta_ij|", worst, 1e-10);
    return o;
}

Outcome classical_limit() {
    Outcome o;
    const std::vector<std::pair<std::string, SpatialFunction>> cases{
        {"sine", sine},
        {"mixed", [](double x) { return (1 - x) * std::cos(2 * pi * x) + std::sin(2 * pi * x); }},
    };
    for (const auto& [name, phi] : cases) {
        auto p = forward_problem(1.0, 1.0, phi);
        p.T = 0.1;
        const auto s = solve_forward(p);
        check(o, name + " Linf", field_linf(s.field, heat_oracle(phi, {}, p.T, p.nx, p.nt)), 1e-3);
    }
    return o;
}

Outcome forward_residuals() {
    Outcome o;
    for (auto [a0, a1] : order_pairs) {
        auto p = forward_problem(a0, a1, sine);
        const auto s = solve_forward(p);
        const auto r = verify_forward(s.field, sine, {}, Tolerances{}, 2048);
        const std::string tag = "(" + num(a0) + "," + num(a1) + ") ";
        check(o, tag + "pde", r.pde_linf, 5e-3 * (1.0 + r.max_f));
        check(o, tag + "bc", r.boundary_max, 1e-4 * r.max_u);
        check(o, tag + "init", r.initial_l2, 2e-2);
    }
    return o;
}

Outcome backward_roundtrip() {
    Outcome o;
    const std::vector<std::pair<std::string, SpatialFunction>> targets{{"sin", sine}, {"X0", root}};
    for (auto [a0, a1] : order_pairs)
        for (const auto& [name, target] : targets) {
            auto fp = forward_problem(a0, a1, zero, target);
            fp.nt = 8;
            const auto modal = solve_forward(fp).field.modal;
            BackwardProblem bp;
            bp.alpha0 = a0;
            bp.alpha1 = a1;
            bp.phi = zero;
            bp.psi = [modal](double x) { return modal->value(1.0, x); };
            const auto r = recover_source(bp);
            double err = 0.0;
            for (std::size_t j = 0; j < r.x_grid.size(); ++j) err = std::max(err, std::abs(r.f_grid[j] - target(r.x_grid[j])));
            check(o, "(" + num(a0) + "," + num(a1) + ") " + name, err, 1e-3);
        }
    BackwardProblem c;
    c.T = 2.5;
    c.phi = [](double x) { return 0.3 * 2.0 * (1.0 - x); };
    c.psi = [](double x) { return 1.7 * 2.0 * (1.0 - x); };
    const auto r = recover_source(c);
    check(o, "classical f0", std::abs(r.f_coeffs.c0 - (1.7 - 0.3) / 2.5), 1e-12);
    return o;
}

// Largest amplification(k)/λ_k over k ∈ [4,64] at T = 1 across the tested
// orders, recorded from a scan of this implementation: 1.00106 at k = 4 for
// (0.7, 0.7).
constexpr double recorded_c2 = 1.001064;

Outcome ill_posedness() {
    Outcome o;
    double lo = 1e300, hi = 0.0;
    auto pairs = order_pairs;
    pairs.emplace_back(1.0, 1.0);
    for (auto [a0, a1] : pairs) {
        BackwardProblem p;
        p.alpha0 = a0;
        p.alpha1 = a1;
        p.T = 1.0;
        for (int k = 4; k <= 64; ++k) {
            const double r = amplification_factor(p, k) / eigenvalue(k);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
    }
    check_at_least(o, "min ratio", lo, 0.5);
    check(o, "max ratio", hi, recorded_c2 * 1.05);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DNSPECTRAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
    Outcome o;
    const fs::path base = fs::temp_directory_path() / "dnspectral_acceptance";
    fs::remove_all(base);
    const auto cfg = (fs::path(DNSPECTRAL_SOURCE_DIR) / "scenarios" / "backward_roundtrip.json").string();
    int differing = 0;
    for (const char* run : {"a", "b"}) {
        const int code = run_cli("backward --config " + cfg + " --output " + (base / run).string());
        check(o, std::string("run ") + run + " exit", code, 0);
    }
    for (const char* f : {"u.csv", "coeffs.csv"}) {
        const auto a = slurp(base / "a" / f);
        if (a.empty() || a != slurp(base / "b" / f)) ++differing;
    }
    check(o, "differing CSVs", differing, 0);
    check(o, "selftest exit", run_cli("selftest --output " + (base / "selftest").string()), 0);
    return o;
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "special-function identities", 5, special_functions},
        {2, "fractional-operator oracles", 60, fractional_operators},
        {3, "fundamental relation", 30, fundamental_relation},
        {4, "bi-orthogonality", 5, biorthogonality},
        {5, "classical limit vs heat oracle", 30, classical_limit},
        {6, "forward residuals", 120, forward_residuals},
        {7, "backward round trip", 120, backward_roundtrip},
        {8, "ill-posedness diagnostic", 10, ill_posedness},
        {9, "CLI determinism", 60, cli_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        check(o, "seconds", secs, c.budget_seconds);
        failed += o.ok ? 0 : 1;
        std::printf("%s %d %s: %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
