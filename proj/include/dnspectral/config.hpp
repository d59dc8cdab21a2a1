#pragma once

#include "dnspectral/errors.hpp"
#include "dnspectral/expression.hpp"
#include "dnspectral/forward_solver.hpp"
#include "dnspectral/fractional_ops.hpp"
#include "dnspectral/spectral_basis.hpp"
#include "dnspectral/verification.hpp"

#include "json.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dnspectral {

enum class RunMode { forward, backward, verify, selftest };

inline const char* to_string(RunMode m) {
    switch (m) {
    case RunMode::forward: return "forward";
    case RunMode::backward: return "backward";
    case RunMode::verify: return "verify";
    case RunMode::selftest: return "selftest";
    }
    return "unknown";
}

inline std::optional<RunMode> parse_mode(std::string_view s) {
    for (RunMode m : {RunMode::forward, RunMode::backward, RunMode::verify, RunMode::selftest})
        if (s == to_string(m)) return m;
    return std::nullopt;
}

struct BasisTerm {
    Family family = Family::root;
    int k = 0;
    double scale = 1.0;

    bool operator==(const BasisTerm&) const = default;
};

/// How an input function on [0,1] is given: expression text, a CSV path
/// (x,value columns), or a finite combination of eigenfunctions.
struct FunctionSpec {
    enum class Kind { expression, csv, basis };
    Kind kind = Kind::expression;
    std::string text; // expression source or CSV path
    std::vector<BasisTerm> terms;

    bool operator==(const FunctionSpec&) const = default;
};

struct RunConfig {
    RunMode mode = RunMode::forward;
    double alpha0 = 1.0;
    double alpha1 = 1.0;
    double T = 1.0;
    int N = 32;
    int nx = 257;
    int nt = 128;
    std::optional<FunctionSpec> phi;
    std::optional<FunctionSpec> psi;
    std::optional<FunctionSpec> f;
    std::string output_dir = "out";
    std::optional<double> cutoff_amplification;
    Tolerances tolerances;

    bool operator==(const RunConfig&) const = default;
};

/// Command-line values that take precedence over the config file.
struct ConfigOverrides {
    std::optional<RunMode> mode;
    std::optional<std::string> output_dir;
    std::optional<int> N;
    std::optional<int> nx;
    std::optional<int> nt;
    std::optional<double> cutoff_amplification;
};

/// Semantic problems with a config, all of them at once.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(ErrorKind::configuration, join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "invalid configuration:";
        for (const auto& x : v) s += "\n  - " + x;
        return s;
    }
    std::vector<std::string> violations_;
};

namespace detail {

using json = nlohmann::json;

inline std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline std::optional<Family> parse_family(const std::string& s) {
    for (Family f : {Family::root, Family::cosine, Family::sine})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

inline void read_basis_term(const json& j, const std::string& where, std::vector<BasisTerm>& out,
                            std::vector<std::string>& errs) {
    json fam, k, scale;
    if (j.is_array() && j.size() == 3) {
        fam = j[0];
        k = j[1];
        scale = j[2];
    } else if (j.is_object()) {
        fam = j.value("family", json());
        k = j.value("k", json(0));
        scale = j.value("scale", json(1.0));
    } else {
        errs.push_back(where + ": basis term must be [family, k, scale] or {\"family\", \"k\", \"scale\"}");
        return;
    }
    BasisTerm t;
    const auto family = fam.is_string() ? parse_family(fam.get<std::string>()) : std::nullopt;
    if (!family) {
        errs.push_back(where + ": family must be one of root, cosine, sine");
        return;
    }
    t.family = *family;
    if (!k.is_number_integer()) {
        errs.push_back(where + ": k must be an integer");
        return;
    }
    t.k = k.get<int>();
    if (t.family == Family::root ? t.k != 0 : t.k < 1) {
        errs.push_back(where + (t.family == Family::root ? ": root term takes k = 0" : ": k must be at least 1"));
        return;
    }
    if (!scale.is_number()) {
        errs.push_back(where + ": scale must be a number");
        return;
    }
    t.scale = scale.get<double>();
    out.push_back(t);
}

inline std::optional<FunctionSpec> read_function(const json& j, const std::string& name, std::vector<std::string>& errs) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("payload")) {
        errs.push_back(name + ": function descriptor must be an object with \"kind\" and \"payload\"");
        return std::nullopt;
    }
    for (const auto& [key, _] : j.items())
        if (key != "kind" && key != "payload") errs.push_back(name + ": unknown descriptor key \"" + key + "\"");
    const json& kind = j["kind"];
    const json& payload = j["payload"];
    FunctionSpec spec;
    const std::string k = kind.is_string() ? kind.get<std::string>() : "";
    if (k == "expression" || k == "csv") {
        spec.kind = k == "csv" ? FunctionSpec::Kind::csv : FunctionSpec::Kind::expression;
        if (!payload.is_string()) {
            errs.push_back(name + ": payload must be a string");
            return std::nullopt;
        }
        spec.text = payload.get<std::string>();
        if (spec.kind == FunctionSpec::Kind::expression) {
            try {
                Expression::parse(spec.text);
            } catch (const Error& e) {
                errs.push_back(name + ": " + e.what());
                return std::nullopt;
            }
        } else if (spec.text.empty()) {
            errs.push_back(name + ": csv path is empty");
            return std::nullopt;
        }
    } else if (k == "basis") {
        spec.kind = FunctionSpec::Kind::basis;
        const std::size_t before = errs.size();
        const bool list = payload.is_array() && !payload.empty() && (payload[0].is_array() || payload[0].is_object());
        if (list) {
            for (std::size_t i = 0; i < payload.size(); ++i)
                read_basis_term(payload[i], name + "[" + std::to_string(i) + "]", spec.terms, errs);
        } else {
            read_basis_term(payload, name, spec.terms, errs);
        }
        if (errs.size() != before) return std::nullopt;
    } else {
        errs.push_back(name + ": kind must be one of expression, csv, basis");
        return std::nullopt;
    }
    return spec;
}

inline json write_function(const FunctionSpec& s) {
    json j;
    switch (s.kind) {
    case FunctionSpec::Kind::expression: j["kind"] = "expression"; j["payload"] = s.text; break;
    case FunctionSpec::Kind::csv: j["kind"] = "csv"; j["payload"] = s.text; break;
    case FunctionSpec::Kind::basis: {
        j["kind"] = "basis";
        json terms = json::array();
        for (const auto& t : s.terms) terms.push_back(json::array({to_string(t.family), t.k, t.scale}));
        j["payload"] = terms;
        break;
    }
    }
    return j;
}

} // namespace detail

/// Parses and validates a JSON run configuration. Syntax errors throw
/// Error(parse) with line and column; semantic problems throw ConfigError
/// listing every violation. Overrides are applied before validation.
inline RunConfig parse_config(std::string_view text, const ConfigOverrides& over = {}) {
    using detail::json;
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        fail(ErrorKind::parse, "config line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                                   std::string(e.what()));
    }
    if (!j.is_object()) fail(ErrorKind::parse, "config line 1, column 1: top level must be a JSON object");

    std::vector<std::string> errs;
    static const std::set<std::string> known{"mode", "alpha0", "alpha1", "T", "N", "nx", "nt", "phi", "psi",
                                             "f", "output_dir", "cutoff_amplification", "tolerances"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) errs.push_back("unknown key \"" + key + "\"");

    RunConfig c;
    if (over.mode) {
        c.mode = *over.mode;
    } else if (!j.contains("mode")) {
        errs.push_back("mode: required (forward, backward, verify or selftest)");
    } else {
        const auto m = j["mode"].is_string() ? parse_mode(j["mode"].get<std::string>()) : std::nullopt;
        if (m) c.mode = *m;
        else errs.push_back("mode: must be one of forward, backward, verify, selftest");
    }
    const bool needs_problem = c.mode != RunMode::selftest;

    auto number = [&](const char* key, double& dst, bool required) {
        if (!j.contains(key)) {
            if (required) errs.push_back(std::string(key) + ": required");
            return false;
        }
        if (!j[key].is_number()) {
            errs.push_back(std::string(key) + ": must be a number");
            return false;
        }
        dst = j[key].get<double>();
        return true;
    };
    auto integer = [&](const char* key, int& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer()) errs.push_back(std::string(key) + ": must be an integer");
        else dst = j[key].get<int>();
    };

    const bool have_a0 = number("alpha0", c.alpha0, needs_problem);
    const bool have_a1 = number("alpha1", c.alpha1, needs_problem);
    const bool have_T = number("T", c.T, needs_problem);
    integer("N", c.N);
    integer("nx", c.nx);
    integer("nt", c.nt);
    if (over.N) c.N = *over.N;
    if (over.nx) c.nx = *over.nx;
    if (over.nt) c.nt = *over.nt;

    if (have_a0 && !(c.alpha0 > 0.0 && c.alpha0 <= 1.0)) errs.push_back("alpha0 ∈ (0,1] violated: " + json(c.alpha0).dump());
    if (have_a1 && !(c.alpha1 > 0.0 && c.alpha1 <= 1.0)) errs.push_back("alpha1 ∈ (0,1] violated: " + json(c.alpha1).dump());
    if (have_a0 && have_a1 && c.alpha0 > 0.0 && c.alpha1 > 0.0 && !(c.alpha0 + c.alpha1 > 1.0))
        errs.push_back("alpha0 + alpha1 > 1 violated: sum is " + json(c.alpha0 + c.alpha1).dump());
    if (have_T && !(c.T > 0.0 && std::isfinite(c.T))) errs.push_back("T > 0 violated: " + json(c.T).dump());
    if (c.N < 1) errs.push_back("N >= 1 violated: " + std::to_string(c.N));
    if (c.nx < 8) errs.push_back("nx >= 8 violated: " + std::to_string(c.nx));
    if (c.nt < 8) errs.push_back("nt >= 8 violated: " + std::to_string(c.nt));
    if (c.N >= 1 && c.nx >= 8 && c.nx < 4 * c.N)
        errs.push_back("nx >= 4N violated: nx = " + std::to_string(c.nx) + ", N = " + std::to_string(c.N));
    if (c.mode == RunMode::verify && c.nt < 64) errs.push_back("nt >= 64 required in verify mode: " + std::to_string(c.nt));

    if (j.contains("phi")) c.phi = detail::read_function(j["phi"], "phi_spec", errs);
    if (j.contains("psi")) c.psi = detail::read_function(j["psi"], "psi_spec", errs);
    if (j.contains("f")) c.f = detail::read_function(j["f"], "f_spec", errs);
    if ((c.mode == RunMode::forward || c.mode == RunMode::verify) && !j.contains("phi"))
        errs.push_back(std::string("phi_spec: required in ") + to_string(c.mode) + " mode (key \"phi\")");
    if (c.mode == RunMode::backward && !j.contains("psi"))
        errs.push_back("psi_spec: required in backward mode (key \"psi\")");

    if (j.contains("output_dir")) {
        if (j["output_dir"].is_string()) c.output_dir = j["output_dir"].get<std::string>();
        else errs.push_back("output_dir: must be a string");
    }
    if (over.output_dir) c.output_dir = *over.output_dir;
    if (c.output_dir.empty()) errs.push_back("output_dir: must not be empty");

    if (j.contains("cutoff_amplification") && !j["cutoff_amplification"].is_null()) {
        double v = 0.0;
        if (number("cutoff_amplification", v, false)) c.cutoff_amplification = v;
    }
    if (over.cutoff_amplification) c.cutoff_amplification = over.cutoff_amplification;
    if (c.cutoff_amplification && !(*c.cutoff_amplification > 0.0))
        errs.push_back("cutoff_amplification > 0 violated: " + json(*c.cutoff_amplification).dump());

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) {
            errs.push_back("tolerances: must be an object");
        } else {
            const std::pair<const char*, double*> slots[] = {{"pde", &c.tolerances.pde},
                                                             {"boundary", &c.tolerances.boundary},
                                                             {"initial", &c.tolerances.initial},
                                                             {"oracle", &c.tolerances.oracle},
                                                             {"roundtrip", &c.tolerances.roundtrip}};
            for (const auto& [key, _] : t.items()) {
                bool found = false;
                for (const auto& s : slots) found = found || key == s.first;
                if (!found) errs.push_back("tolerances: unknown key \"" + key + "\"");
            }
            for (const auto& [key, dst] : slots) {
                if (!t.contains(key)) continue;
                if (!t[key].is_number() || !(t[key].get<double>() > 0.0))
                    errs.push_back(std::string("tolerances.") + key + ": must be a positive number");
                else *dst = t[key].get<double>();
            }
        }
    }

    if (!errs.empty()) throw ConfigError(std::move(errs));
    return c;
}

/// Canonical JSON text for a config; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["mode"] = to_string(c.mode);
    j["alpha0"] = c.alpha0;
    j["alpha1"] = c.alpha1;
    j["T"] = c.T;
    j["N"] = c.N;
    j["nx"] = c.nx;
    j["nt"] = c.nt;
    if (c.phi) j["phi"] = detail::write_function(*c.phi);
    if (c.psi) j["psi"] = detail::write_function(*c.psi);
    if (c.f) j["f"] = detail::write_function(*c.f);
    j["output_dir"] = c.output_dir;
    if (c.cutoff_amplification) j["cutoff_amplification"] = *c.cutoff_amplification;
    j["tolerances"] = {{"pde", c.tolerances.pde},
                       {"boundary", c.tolerances.boundary},
                       {"initial", c.tolerances.initial},
                       {"oracle", c.tolerances.oracle},
                       {"roundtrip", c.tolerances.roundtrip}};
    return j.dump(2) + "\n";
}

/// Reads x,value samples; x strictly increasing within [0,1]. A single
/// non-numeric first line is taken as a header; '#' starts a comment line.
inline SampledFunction read_csv_function(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::vector<double> xs, vs;
    std::string line;
    int lineno = 0;
    auto field = [](std::string_view s, double& v) {
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
        while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
        const auto comma = line.find(',');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            if (xs.empty() && lineno == 1) continue;
            fail(ErrorKind::parse, where + ": expected two comma-separated columns");
        }
        double x = 0.0, v = 0.0;
        const bool ok = field(std::string_view(line).substr(0, comma), x) && field(std::string_view(line).substr(comma + 1), v);
        if (!ok) {
            if (xs.empty() && lineno == 1) continue; // header
            fail(ErrorKind::parse, where + ": non-numeric value");
        }
        if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::configuration, where + ": x outside [0,1]");
        if (!xs.empty() && !(x > xs.back())) fail(ErrorKind::configuration, where + ": x not strictly increasing");
        xs.push_back(x);
        vs.push_back(v);
    }
    if (xs.size() < 3) fail(ErrorKind::configuration, path.string() + ": need at least three samples");
    return SampledFunction(std::move(xs), std::move(vs));
}

/// Evaluable form of a descriptor; CSV paths are relative to base_dir.
inline SpatialFunction load_function(const FunctionSpec& spec, const std::filesystem::path& base_dir = {}) {
    switch (spec.kind) {
    case FunctionSpec::Kind::expression: {
        auto e = std::make_shared<const Expression>(Expression::parse(spec.text));
        return [e](double x) { return (*e)(x); };
    }
    case FunctionSpec::Kind::csv: {
        std::filesystem::path p(spec.text);
        if (p.is_relative()) p = base_dir / p;
        auto s = std::make_shared<const SampledFunction>(read_csv_function(p));
        return [s](double x) { return (*s)(x); };
    }
    case FunctionSpec::Kind::basis: {
        for (const auto& t : spec.terms) BasisId::checked({t.family, t.k});
        return [terms = spec.terms](double x) {
            double v = 0.0;
            for (const auto& t : terms) v += t.scale * eval_eigenfunction({t.family, t.k}, x);
            return v;
        };
    }
    }
    fail(ErrorKind::configuration, "unknown function kind");
}

} // namespace dnspectral
