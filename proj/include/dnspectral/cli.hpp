#pragma once

#include "dnspectral/backward_solver.hpp"
#include "dnspectral/config.hpp"
#include "dnspectral/fde_core.hpp"
#include "dnspectral/forward_solver.hpp"
#include "dnspectral/fractional_ops.hpp"
#include "dnspectral/special_functions.hpp"
#include "dnspectral/verification.hpp"

#include "json.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace dnspectral {

/// Exit code for a failed tolerance verdict.
inline constexpr int exit_verdict_failed = 2;

namespace detail {

using ojson = nlohmann::ordered_json;

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::ofstream open_output(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + p.string());
    return out;
}

inline void write_u_csv(const std::filesystem::path& p, const SolutionField& field) {
    auto out = open_output(p);
    out << "t,x,u,weighted_u\n";
    for (int i = 0; i < field.nt(); ++i)
        for (int j = 0; j < field.nx(); ++j) {
            const auto idx = static_cast<std::size_t>(i) * field.x_grid.size() + static_cast<std::size_t>(j);
            out << fmt(field.t_grid[static_cast<std::size_t>(i)]) << ',' << fmt(field.x_grid[static_cast<std::size_t>(j)])
                << ',' << fmt(field.values[idx]) << ',' << fmt(field.weighted[idx]) << '\n';
        }
    if (!out) fail(ErrorKind::io, "write failed: " + p.string());
}

struct CoeffRow {
    std::string family;
    int k;
    double phi, psi, f, u_at_T, amplification;
};

inline std::vector<CoeffRow> coeff_rows(const SpectralCoeffs& phi, const SpectralCoeffs* psi, const SpectralCoeffs& f,
                                        const SpectralCoeffs& uT, const ModalSolution& modal, double T) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<CoeffRow> rows;
    rows.push_back({"root", 0, phi.c0, psi ? psi->c0 : nan, f.c0, uT.c0, 1.0 / modal.kernel(0).source_factor(T)});
    for (int k = 1; k <= phi.N(); ++k) {
        const auto i = static_cast<std::size_t>(k) - 1;
        const double amp = 1.0 / modal.kernel(k).source_factor(T);
        rows.push_back({"cosine", k, phi.c1[i], psi ? psi->c1[i] : nan, f.c1[i], uT.c1[i], amp});
        rows.push_back({"sine", k, phi.c2[i], psi ? psi->c2[i] : nan, f.c2[i], uT.c2[i], amp});
    }
    return rows;
}

inline void write_coeffs_csv(const std::filesystem::path& p, const std::vector<CoeffRow>& rows) {
    auto out = open_output(p);
    out << "family,k,phi,psi,f,u_at_T,amplification\n";
    for (const auto& r : rows)
        out << r.family << ',' << r.k << ',' << fmt(r.phi) << ',' << fmt(r.psi) << ',' << fmt(r.f) << ','
            << fmt(r.u_at_T) << ',' << fmt(r.amplification) << '\n';
    if (!out) fail(ErrorKind::io, "write failed: " + p.string());
}

inline ojson to_json(const CompatibilityReport& r) {
    ojson j;
    j["passed"] = r.passed();
    j["conditions"] = ojson::array();
    for (const auto& c : r.conditions) j["conditions"].push_back({{"name", c.name}, {"residual", c.residual}, {"passed", c.passed}});
    return j;
}

inline ojson to_json(const ResidualReport& r) {
    return {{"pde_linf", r.pde_linf},   {"pde_l2", r.pde_l2},     {"boundary_max", r.boundary_max},
            {"initial_l2", r.initial_l2}, {"nx", r.nx},           {"nt", r.nt},
            {"steps", r.steps},         {"t_min", r.t_min},       {"max_f", r.max_f},
            {"max_u", r.max_u},         {"pde_ok", r.pde_ok},     {"boundary_ok", r.boundary_ok},
            {"initial_ok", r.initial_ok}, {"passed", r.passed()}};
}

/// Heat-oracle comparison for classical orders. The oracle's own error is
/// estimated from a run with half the substeps (second order in time).
inline ojson oracle_agreement(const SolutionField& field, const SpatialFunction& phi, const SpatialFunction& f,
                              const Tolerances& tol, bool& passed) {
    const auto fine = heat_oracle(phi, f, field.T, field.nx(), field.nt(), 16);
    const auto coarse = heat_oracle(phi, f, field.T, field.nx(), field.nt(), 8);
    const double self = field_linf(fine, coarse) / 3.0;
    const double dist = field_linf(field, fine);
    const double bound = std::max(tol.oracle, 3.0 * self);
    passed = dist <= bound;
    return {{"linf", dist}, {"oracle_error_estimate", self}, {"bound", bound}, {"passed", passed}};
}

inline bool classical(const RunConfig& c) { return c.alpha0 == 1.0 && c.alpha1 == 1.0; }

} // namespace detail

struct RunResult {
    int exit_code = 0;
    nlohmann::ordered_json report;
};

/// One check of the built-in suite: its measured value and the bound.
struct SelftestCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    [[nodiscard]] bool passed() const { return std::isfinite(value) && value <= bound; }
};

/// Quick invariant checks across all modules (a few seconds).
inline std::vector<SelftestCheck> selftest_checks() {
    std::vector<SelftestCheck> out;
    auto add = [&](std::string name, double v, double b) { out.push_back({std::move(name), v, b}); };
    const double pi = std::numbers::pi;

    double e = 0.0;
    for (double z = -30.0; z <= 5.0; z += 0.5) e = std::max(e, std::abs(ml_eval({1.0, 1.0}, z) / std::exp(z) - 1.0));
    add("E_{1,1}(z) = exp(z)", e, 1e-10);
    e = 0.0;
    for (double x = 0.0; x <= 100.0; x += 2.5) e = std::max(e, std::abs(ml_eval({2.0, 1.0}, -x) - std::cos(std::sqrt(x))));
    add("E_{2,1}(-x) = cos(sqrt x)", e, 1e-10);
    e = 0.0;
    for (double a : {0.3, 0.7, 1.0})
        for (double lam : {0.5, 40.0})
            for (double t : {0.1, 1.0})
                e = std::max(e, std::abs(lam * mltf_eval({a, a + 1.0, lam}, t) + mltf_eval({a, 1.0, lam}, t) - 1.0));
    add("lambda e_{a,a+1} + e_{a,1} = 1", e, 1e-10);

    const TimeFunction square = [](double s) { return s * s; };
    const double j = rl_integral(0.5, square, 1.0, 256);
    add("J^0.5 t^2 at t=1", std::abs(j / rl_monomial(0.5, 2.0, false).coefficient - 1.0), 1e-4);
    const double caputo = dn_apply(DNMultiOrder(1.0, 0.6), square, 1.0, 1024);
    add("DN(1,0.6) t^2 = Caputo value", std::abs(caputo / (2.0 / std::tgamma(2.4)) - 1.0), 1e-3);

    const int nb = 4;
    e = 0.0;
    std::vector<BasisId> ids{BasisId::root()};
    for (int k = 1; k <= nb; ++k) {
        ids.push_back(BasisId::cosine(k));
        ids.push_back(BasisId::sine(k));
    }
    for (const auto& a : ids) {
        const auto c = project([a](double x) { return eval_eigenfunction(a, x); }, nb);
        for (const auto& b : ids) {
            double v = b.family == Family::root ? c.c0
                       : b.family == Family::cosine ? c.c1[static_cast<std::size_t>(b.k) - 1]
                                                    : c.c2[static_cast<std::size_t>(b.k) - 1];
            e = std::max(e, std::abs(v - (a.family == b.family && a.k == b.k ? 1.0 : 0.0)));
        }
    }
    add("bi-orthogonality N=4", e, 1e-10);

    const auto p = ModeParams::make(0.9, 0.8, eigenvalue(1), 1.0, 0.5);
    add("mode residual (0.9,0.8), k=1", mode_residual(p, 1, {}, 0.5, 512), 5e-3);

    ForwardProblem fp;
    fp.phi = [pi](double x) { return std::sin(2.0 * pi * x); };
    fp.T = 0.1;
    fp.N = 8;
    fp.nx = 65;
    fp.nt = 32;
    const auto fs = solve_forward(fp);
    add("classical forward vs heat oracle", field_linf(fs.field, heat_oracle(fp.phi, {}, fp.T, fp.nx, fp.nt)), 1e-3);

    BackwardProblem bp;
    bp.alpha0 = 0.9;
    bp.alpha1 = 0.8;
    bp.N = 8;
    bp.nx = 65;
    bp.nt = 16;
    bp.phi = [](double) { return 0.0; };
    const double b1 = ModeKernel(0.9, 0.8, eigenvalue(1)).source_factor(1.0);
    bp.psi = [b1, pi](double x) { return b1 * std::sin(2.0 * pi * x); };
    const auto rec = recover_source(bp);
    e = 0.0;
    for (std::size_t i = 0; i < rec.x_grid.size(); ++i) e = std::max(e, std::abs(rec.f_grid[i] - std::sin(2.0 * pi * rec.x_grid[i])));
    add("backward recovery of sin(2 pi x)", e, 1e-6);
    return out;
}

/// Executes a validated config and writes u.csv, coeffs.csv and report.json
/// into config.output_dir. CSV paths in descriptors resolve against base_dir.
inline RunResult run(const RunConfig& cfg, const std::filesystem::path& base_dir = {}, std::ostream* log = nullptr) {
    using detail::ojson;
    const auto start = std::chrono::steady_clock::now();
    RunResult res;
    ojson& rep = res.report;
    rep["mode"] = to_string(cfg.mode);
    rep["config"] = ojson::parse(serialize_config(cfg));
    bool ok = true;
    std::vector<std::string> warnings;
    const std::filesystem::path dir(cfg.output_dir);

    auto ensure_dir = [&] {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    };

    if (cfg.mode == RunMode::selftest) {
        ojson checks = ojson::array();
        for (const auto& c : selftest_checks()) {
            if (log) *log << (c.passed() ? "PASS " : "FAIL ") << c.name << ": " << c.value << " (bound " << c.bound << ")\n";
            checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"passed", c.passed()}});
            ok = ok && c.passed();
        }
        rep["checks"] = checks;
        rep["passed"] = ok;
        res.exit_code = ok ? 0 : exit_verdict_failed;
        return res;
    }

    rep["orders"] = {{"alpha0", cfg.alpha0}, {"alpha1", cfg.alpha1}, {"rho", cfg.alpha0 + cfg.alpha1 - 1.0}};
    const SpatialFunction zero = [](double) { return 0.0; };
    const SpatialFunction phi = cfg.phi ? load_function(*cfg.phi, base_dir) : zero;
    const SpatialFunction f = cfg.f ? load_function(*cfg.f, base_dir) : SpatialFunction{};

    if (cfg.mode == RunMode::forward || cfg.mode == RunMode::verify) {
        ForwardProblem fp;
        fp.alpha0 = cfg.alpha0;
        fp.alpha1 = cfg.alpha1;
        fp.T = cfg.T;
        fp.phi = phi;
        fp.source = f;
        fp.N = cfg.N;
        fp.nx = cfg.nx;
        fp.nt = cfg.nt;
        fp.allow_incompatible = true;
        const auto sol = solve_forward(fp);
        warnings.insert(warnings.end(), sol.warnings.begin(), sol.warnings.end());
        rep["compatibility"] = {{"phi", detail::to_json(sol.compatibility)}};
        rep["tail_estimate"] = sol.tail_estimate;
        rep["max_abs_u"] = sol.field.max_abs();
        if (detail::classical(cfg)) {
            bool agree = true;
            rep["oracle"] = detail::oracle_agreement(sol.field, phi, f, cfg.tolerances, agree);
            if (cfg.mode == RunMode::verify) ok = ok && agree;
        }
        if (cfg.mode == RunMode::verify) {
            const auto r = verify_forward(sol.field, phi, f, cfg.tolerances);
            rep["residuals"] = detail::to_json(r);
            ok = ok && r.passed();
        }
        ensure_dir();
        detail::write_u_csv(dir / "u.csv", sol.field);
        const auto uT = sol.field.modal->coeffs(cfg.T);
        detail::write_coeffs_csv(dir / "coeffs.csv",
                                 detail::coeff_rows(sol.phi_coeffs, nullptr, sol.f_coeffs, uT, *sol.field.modal, cfg.T));
    } else {
        BackwardProblem bp;
        bp.alpha0 = cfg.alpha0;
        bp.alpha1 = cfg.alpha1;
        bp.T = cfg.T;
        bp.phi = phi;
        bp.psi = load_function(*cfg.psi, base_dir);
        bp.N = cfg.N;
        bp.nx = cfg.nx;
        bp.nt = cfg.nt;
        bp.cutoff_amplification = cfg.cutoff_amplification;
        const auto rec = recover_source(bp);
        warnings.insert(warnings.end(), rec.warnings.begin(), rec.warnings.end());
        rep["compatibility"] = {{"phi", detail::to_json(rec.phi_report)}, {"psi", detail::to_json(rec.psi_report)}};
        ForwardProblem tail;
        tail.alpha0 = cfg.alpha0;
        tail.alpha1 = cfg.alpha1;
        tail.T = cfg.T;
        tail.phi = phi;
        tail.N = cfg.N;
        const auto fc = rec.f_coeffs;
        tail.source = [fc](double x) { return reconstruct(fc, x); };
        rep["tail_estimate"] = truncation_tail(tail);
        const double amax = *std::max_element(rec.amplification.begin(), rec.amplification.end());
        rep["backward"] = {{"roundtrip_l2", rec.roundtrip_l2},
                           {"roundtrip_ok", rec.roundtrip_l2 <= cfg.tolerances.roundtrip},
                           {"max_amplification", amax},
                           {"suppressed_modes", rec.suppressed_modes}};
        ensure_dir();
        detail::write_u_csv(dir / "u.csv", rec.u_field);
        const auto uT = rec.u_field.modal->coeffs(cfg.T);
        detail::write_coeffs_csv(dir / "coeffs.csv", detail::coeff_rows(rec.phi_coeffs, &rec.psi_coeffs, rec.f_coeffs, uT,
                                                                        *rec.u_field.modal, cfg.T));
    }

    rep["warnings"] = warnings;
    rep["passed"] = ok;
    rep["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    {
        auto out = detail::open_output(dir / "report.json");
        out << rep.dump(2) << '\n';
        if (!out) fail(ErrorKind::io, "write failed: report.json");
    }
    if (log)
        for (const auto& w : warnings) *log << "warning: " << w << '\n';
    res.exit_code = ok ? 0 : exit_verdict_failed;
    return res;
}

} // namespace dnspectral
