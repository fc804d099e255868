#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "coalition_nash/engine.hpp"

namespace coalition_nash {

// Declarative description of one experiment (JSON, "schema": 1). Field names
// and layout are documented in the README; the builtin files are the
// normative examples.
struct Scenario {
    std::string name;
    std::vector<int> coalition_sizes;
    std::vector<std::pair<AgentId, AgentId>> edges;

    struct ObjectiveSpec {
        AgentId agent;
        double q = 0.0;
        double b = 0.0;
        std::vector<std::pair<AgentId, double>> coupling;  // sparse interaction terms
        friend bool operator==(const ObjectiveSpec&, const ObjectiveSpec&) = default;
    };
    std::vector<ObjectiveSpec> objectives;

    struct ResourceSpec {
        int coalition = 0;
        double total = 0.0;
        Vec holdings;
        friend bool operator==(const ResourceSpec&, const ResourceSpec&) = default;
    };
    std::vector<ResourceSpec> resources;

    AlgorithmMode mode = AlgorithmMode::Special;
    bool certified_step = false;  // step chosen from the certificate bound
    double step = 0.0;            // ignored when certified_step
    long max_iters = 0;
    double stop_tol = 0.0;
    long log_stride = 1;

    std::optional<Vec> reference_ne;
    double reference_tolerance = 0.05;
    std::optional<Vec> reference_objectives;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Parse + eagerly validate (builds the topology and game, so every structural
// invariant is checked up front). Throws ParseError / ValidationError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario load_scenario(std::istream& in, const std::string& origin);

std::string scenario_to_json(const Scenario& s);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Construct the immutable topology + game a scenario describes.
Game make_game(const Scenario& s);

// Embedded reference experiments: "case1" (estimate-based) and "case2"
// (gradient-tracking). Throws ValidationError for unknown names.
Scenario builtin_scenario(const std::string& name);

struct RunReport {
    std::string name;
    AlgorithmMode mode = AlgorithmMode::Special;
    double step = 0.0;
    long iterations = 0;
    bool stopped_by_tolerance = false;
    Vec final_x;
    Vec final_f;
    double kkt_residual = 0.0;
    double constraint_residual = 0.0;
    std::optional<double> slope;       // least-squares slope of log-distance
    std::optional<double> r_squared;   // fit quality of that line
    std::string csv_path;
    StepSizeCertificate certificate;
    bool have_certificate = false;
    std::optional<double> reference_max_deviation;
    bool reference_passed = true;  // true when no reference is supplied

    std::string to_json() const;
};

// Solve the oracle, run the scenario's algorithm, write <name>.csv and
// <name>.report.json into output_dir, and return the report.
RunReport run_scenario(const Scenario& s, const std::filesystem::path& output_dir);

// Certificate rendered as a JSON object (the `certify` subcommand's output).
std::string certificate_to_json(const StepSizeCertificate& c);

// Command-line entry point (exit code 0 ok, 1 validation failure,
// 2 divergence / no convergence / reference miss, 64 usage error).
int cli(int argc, const char* const* argv);

}  // namespace coalition_nash
