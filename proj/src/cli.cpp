#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/harness.hpp"
#include "coalition_nash/log.hpp"

namespace coalition_nash {

namespace {

std::string fmt6(double v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Scenario load_from_arg(const std::string& path) {
    if (path == "-") return load_scenario(std::cin, "<stdin>");
    return load_scenario(std::filesystem::path(path));
}

int do_run(const Scenario& s, const std::string& out_dir) {
    const RunReport report = run_scenario(s, out_dir);
    std::cout << report.to_json();
    if (!report.reference_passed) {
        log::warn("final state misses the reference equilibrium by " +
                  fmt6(*report.reference_max_deviation));
        return 2;
    }
    return 0;
}

int do_solve_ne(const Scenario& s) {
    const Game game = make_game(s);
    const NEResult ne = solve_ne(game, 1e-9);
    nlohmann::json j;
    j["x_star"] = ne.x_star;
    j["f_star"] = coalition_values(game, ne.x_star);
    j["kkt_residual"] = ne.kkt_residual;
    j["constraint_residual"] = ne.constraint_residual;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int do_certify(const Scenario& s) {
    const Game game = make_game(s);
    const StepSizeCertificate cert =
        s.mode == AlgorithmMode::Special ? alpha_bound(game) : beta_bound(game);
    std::cout << certificate_to_json(cert);
    return 0;
}

int do_validate(const Scenario& s) {
    const Game game = make_game(s);  // throws on any structural violation
    const NetworkTopology& topo = game.topology();
    std::cout << "ok: \"" << s.name << "\" (" << topo.n_sum << " agents, "
              << topo.n_coalitions << " coalitions, " << topo.edges.size() << " edges, "
              << (game.kind() == GameKind::Special ? "no " : "") << "intra-coalition coupling)\n";
    return 0;
}

}  // namespace

int cli(int argc, const char* const* argv) {
    CLI::App app{"Distributed Nash-equilibrium solver for resource-allocation games "
                 "over interacting coalitions"};
    app.require_subcommand(1);

    std::string path, out_dir = "out";
    long iters_override = -1;
    double step_override = 0.0;

    CLI::App* run_cmd = app.add_subcommand(
        "run", "Solve the oracle, run the scenario's algorithm, write CSV + report");
    run_cmd->add_option("scenario", path, "scenario JSON file, or - for stdin")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default: out)");
    run_cmd->add_option("--iters", iters_override, "override max_iters")
        ->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--step", step_override, "override the step size")
        ->check(CLI::PositiveNumber);

    CLI::App* solve_cmd =
        app.add_subcommand("solve-ne", "Print the equilibrium oracle's x* and f_i*");
    solve_cmd->add_option("scenario", path, "scenario JSON file, or - for stdin")->required();

    CLI::App* certify_cmd = app.add_subcommand(
        "certify", "Print the step-size certificate for the scenario's algorithm");
    certify_cmd->add_option("scenario", path, "scenario JSON file, or - for stdin")->required();

    CLI::App* validate_cmd =
        app.add_subcommand("validate", "Parse a scenario and check every invariant");
    validate_cmd->add_option("scenario", path, "scenario JSON file, or - for stdin")->required();

    std::string builtin_name;
    CLI::App* builtin_cmd =
        app.add_subcommand("builtin", "Print an embedded scenario (case1 or case2)");
    builtin_cmd->add_option("name", builtin_name, "case1 or case2")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, returns 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 64;
    }

    try {
        if (builtin_cmd->parsed()) {
            std::cout << scenario_to_json(builtin_scenario(builtin_name));
            return 0;
        }
        Scenario s = load_from_arg(path);
        if (run_cmd->parsed()) {
            if (iters_override >= 0) s.max_iters = iters_override;
            if (step_override > 0.0) {
                s.step = step_override;
                s.certified_step = false;
            }
            return do_run(s, out_dir);
        }
        if (solve_cmd->parsed()) return do_solve_ne(s);
        if (certify_cmd->parsed()) return do_certify(s);
        if (validate_cmd->parsed()) return do_validate(s);
        return 64;  // unreachable: require_subcommand(1)
    } catch (const Diverged& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NoConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace coalition_nash
