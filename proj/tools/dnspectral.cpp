#include "dnspectral/cli.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

const char* exit_codes =
    "Exit codes:\n"
    "  0   success\n"
    "  1   unexpected error\n"
    "  2   a tolerance verdict failed (verify, selftest)\n"
    "  3   parse error (config, expression, CSV)\n"
    "  4   configuration error\n"
    "  5   I/O error\n"
    "  6   argument outside the mathematical domain\n"
    "  7   parameters outside the evaluator's supported range\n"
    "  8   quadrature did not converge\n"
    "  9   degenerate horizon (vanishing denominator in source recovery)\n"
    "  10  reference solver failure\n"
    "\nDNSPECTRAL_THREADS caps the number of worker threads.\n";

} // namespace

int main(int argc, char** argv) {
    using namespace dnspectral;
    CLI::App app{"Spectral solver for time-fractional diffusion with a DN time operator and nonlocal boundary conditions"};
    app.footer(exit_codes);

    std::string mode_name;
    std::string config_path;
    std::string output_dir;
    int modes = 0;
    std::vector<int> grid;
    double cutoff = 0.0;
    app.add_option("mode", mode_name, "forward, backward, verify or selftest")
        ->required()
        ->check(CLI::IsMember({"forward", "backward", "verify", "selftest"}));
    app.add_option("--config", config_path, "JSON run configuration (optional for selftest)");
    auto* out_opt = app.add_option("--output", output_dir, "output directory (overrides output_dir)");
    auto* modes_opt = app.add_option("--modes", modes, "truncation level N")->check(CLI::PositiveNumber);
    auto* grid_opt = app.add_option("--grid", grid, "spatial and temporal grid sizes NX NT")->expected(2);
    auto* cutoff_opt = app.add_option("--cutoff", cutoff, "drop modes whose amplification exceeds AMP")
                           ->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        ConfigOverrides over;
        over.mode = parse_mode(mode_name);
        if (*out_opt) over.output_dir = output_dir;
        if (*modes_opt) over.N = modes;
        if (*grid_opt) {
            over.nx = grid[0];
            over.nt = grid[1];
        }
        if (*cutoff_opt) over.cutoff_amplification = cutoff;

        std::string text = "{}";
        std::filesystem::path base_dir;
        if (!config_path.empty()) {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) fail(ErrorKind::io, "cannot open " + config_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
            base_dir = std::filesystem::path(config_path).parent_path();
        } else if (over.mode != RunMode::selftest) {
            fail(ErrorKind::configuration, "--config is required for mode " + mode_name);
        }
        const RunConfig cfg = parse_config(text, over);
        const RunResult r = run(cfg, base_dir, &std::cerr);
        if (cfg.mode != RunMode::selftest)
            std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "u.csv").string() << ", coeffs.csv, report.json\n";
        if (r.exit_code == 0) std::cout << to_string(cfg.mode) << ": ok\n";
        else std::cout << to_string(cfg.mode) << ": tolerance verdict failed (see report)\n";
        return r.exit_code;
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
