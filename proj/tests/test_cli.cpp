#include "dnspectral/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <sys/wait.h>

using namespace dnspectral;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("dnspectral_test_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path source_dir() {
    const char* s = std::getenv("DNSPECTRAL_SOURCE_DIR");
    return s ? fs::path(s) : fs::current_path();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DNSPECTRAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int parse_error_column(std::string_view text) {
    try {
        Expression::parse(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        const std::string m = e.what();
        const auto p = m.find("column ");
        return p == std::string::npos ? -1 : std::stoi(m.substr(p + 7));
    }
    return 0;
}

std::vector<std::string> violations(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

} // namespace

TEST(Expression, Examples) {
    EXPECT_NEAR(Expression::parse("sin(2*pi*x)")(0.25), 1.0, 1e-15);
    EXPECT_EQ(Expression::parse("2*(1-x)")(0.0), 2.0);
    EXPECT_EQ(Expression::parse("x^2^3")(0.5), 0.00390625);
    EXPECT_NEAR(Expression::parse("exp(x)/cos(0)")(1.0), std::numbers::e, 1e-15);
    EXPECT_EQ(Expression::parse("1.5e1 - 10/4")(0.3), 12.5);
    EXPECT_EQ(Expression::parse(" ( x ) ").text(), " ( x ) ");
}

TEST(Expression, ErrorsCarryColumn) {
    EXPECT_EQ(parse_error_column("2*"), 3);
    EXPECT_EQ(parse_error_column("sin(x"), 6);
    EXPECT_EQ(parse_error_column("x + )"), 5);
    EXPECT_EQ(parse_error_column("-x"), 1);
    try {
        Expression::parse("1 + y");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("unknown identifier 'y'"), std::string::npos);
    }
}

TEST(Config, MinimalForwardTakesDefaults) {
    const auto c = parse_config(R"j({"mode": "forward", "alpha0": 0.9, "alpha1": 0.8, "T": 1,
                                    "phi": {"kind": "expression", "payload": "sin(2*pi*x)"}})j");
    EXPECT_EQ(c.mode, RunMode::forward);
    EXPECT_EQ(c.N, 32);
    EXPECT_EQ(c.nx, 257);
    EXPECT_EQ(c.nt, 128);
    EXPECT_EQ(c.output_dir, "out");
    EXPECT_FALSE(c.cutoff_amplification);
    EXPECT_EQ(c.tolerances, Tolerances{});
    ASSERT_TRUE(c.phi);
    EXPECT_EQ(c.phi->text, "sin(2*pi*x)");
}

TEST(Config, BackwardWithoutPsiNamesTheField) {
    const auto v = violations(R"j({"mode": "backward", "alpha0": 0.9, "alpha1": 0.8, "T": 1,
                                  "phi": {"kind": "expression", "payload": "0"}})j");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(mentions(v, "psi_spec"));
}

TEST(Config, OrderOutOfRange) {
    const auto v = violations(R"j({"mode": "forward", "alpha0": 1.2, "alpha1": 0.8, "T": 1,
                                  "phi": {"kind": "expression", "payload": "0"}})j");
    EXPECT_TRUE(mentions(v, "alpha0 ∈ (0,1]"));
}

TEST(Config, ListsEveryViolation) {
    const auto v = violations(R"j({"mode": "verify", "alpha0": 0, "alpha1": 2, "T": -1, "N": 0, "nx": 4, "nt": 16,
                                  "phi": {"kind": "basis", "payload": ["sine", 0, 1]}, "colour": 3,
                                  "tolerances": {"pde": -1}})j");
    for (const char* s : {"alpha0", "alpha1", "T > 0", "N >= 1", "nx >= 8", "nt >= 64", "phi_spec", "colour", "tolerances"})
        EXPECT_TRUE(mentions(v, s)) << s;
    EXPECT_GE(v.size(), 9u);
}

TEST(Config, SyntaxErrorReportsLineAndColumn) {
    try {
        parse_config("{\n  \"mode\": \"forward\",\n  \"T\": 1,,\n}");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
        EXPECT_NE(std::string(e.what()).find("line 3, column 10"), std::string::npos) << e.what();
    }
}

TEST(Config, OverridesApplyBeforeValidation) {
    ConfigOverrides o;
    o.mode = RunMode::forward;
    o.N = 8;
    o.nx = 33;
    const auto c = parse_config(R"j({"mode": "backward", "alpha0": 1, "alpha1": 1, "T": 1, "N": 64, "nx": 100,
                                    "phi": {"kind": "expression", "payload": "0"}})j",
                                o);
    EXPECT_EQ(c.mode, RunMode::forward);
    EXPECT_EQ(c.N, 8);
    EXPECT_EQ(c.nx, 33);
}

TEST(Config, SerializeRoundTrip) {
    for (const char* name : {"backward_roundtrip.json", "forward_fractional.json", "verify_classical.json", "verify_fractional.json"}) {
        const auto c = parse_config(slurp(source_dir() / "scenarios" / name));
        const auto text = serialize_config(c);
        EXPECT_EQ(parse_config(text), c) << name;
        EXPECT_EQ(serialize_config(parse_config(text)), text) << name;
    }
}

TEST(CsvFunction, ReadsAndValidates) {
    const auto d = scratch("csv");
    std::ofstream(d / "ok.csv") << "x,value\n# comment\n0,0\n0.5,1\n1,0\n";
    const auto s = read_csv_function(d / "ok.csv");
    EXPECT_EQ(s(0.5), 1.0);
    FunctionSpec spec{FunctionSpec::Kind::csv, "ok.csv", {}};
    EXPECT_EQ(load_function(spec, d)(0.5), 1.0);
    std::ofstream(d / "order.csv") << "0,0\n0.6,1\n0.5,0\n";
    EXPECT_THROW(read_csv_function(d / "order.csv"), Error);
    std::ofstream(d / "junk.csv") << "0,0\n0.5,abc\n1,0\n";
    try {
        read_csv_function(d / "junk.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parse);
    }
    try {
        read_csv_function(d / "missing.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::io);
    }
}

TEST(CoeffsCsv, RowsForEveryMode) {
    SpectralCoeffs phi(2), f(2);
    phi.c2[0] = 0.25;
    const ModalSolution modal(0.9, 0.8, phi, f);
    const auto rows = detail::coeff_rows(phi, nullptr, f, modal.coeffs(1.0), modal, 1.0);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0].family, "root");
    EXPECT_EQ(rows[2].family, "sine");
    EXPECT_EQ(rows[2].k, 1);
    EXPECT_TRUE(std::isnan(rows[2].psi));
}

TEST(Cli, SelftestPasses) {
    std::ostringstream log;
    RunConfig cfg;
    cfg.mode = RunMode::selftest;
    const auto dir = scratch("selftest");
    cfg.output_dir = dir.string();
    const auto r = run(cfg, {}, &log);
    EXPECT_EQ(r.exit_code, 0) << log.str();
    EXPECT_EQ(log.str().find("FAIL"), std::string::npos) << log.str();
}

TEST(Cli, BackwardScenarioIsDeterministic) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const auto cfg = (source_dir() / "scenarios" / "backward_roundtrip.json").string();
    ASSERT_EQ(run_cli("backward --config " + cfg + " --output " + a.string()), 0);
    ASSERT_EQ(run_cli("backward --config " + cfg + " --output " + b.string()), 0);
    for (const char* f : {"u.csv", "coeffs.csv"}) {
        const auto x = slurp(a / f);
        EXPECT_FALSE(x.empty()) << f;
        EXPECT_EQ(x, slurp(b / f)) << f;
    }
    EXPECT_TRUE(fs::exists(a / "report.json"));
}

TEST(Cli, ExitCodes) {
    const auto d = scratch("exit");
    std::ofstream(d / "syntax.json") << "{\"mode\": ";
    std::ofstream(d / "semantic.json") << R"j({"mode": "forward", "alpha0": 2, "alpha1": 1, "T": 1,
                                              "phi": {"kind": "expression", "payload": "0"}})j";
    std::ofstream(d / "nocsv.json") << R"j({"mode": "forward", "alpha0": 1, "alpha1": 1, "T": 1,
                                           "phi": {"kind": "csv", "payload": "absent.csv"}})j";
    EXPECT_EQ(run_cli("forward --config " + (d / "syntax.json").string()), 3);
    EXPECT_EQ(run_cli("forward --config " + (d / "semantic.json").string()), 4);
    EXPECT_EQ(run_cli("forward --config " + (d / "nocsv.json").string()), 5);
    EXPECT_EQ(run_cli("forward --config " + (d / "missing.json").string()), 5);
    EXPECT_NE(run_cli("bogus"), 0);
}
