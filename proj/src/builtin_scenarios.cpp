#include "coalition_nash/errors.hpp"
#include "coalition_nash/harness.hpp"

namespace coalition_nash {

namespace {

// Shared 15-agent network used by both reference experiments: three
// coalitions of sizes 4/5/6, connected internally, bridged by the
// (1,3)-(2,3) and (2,5)-(3,2) links.
void fill_common(Scenario& s) {
    s.coalition_sizes = {4, 5, 6};
    s.edges = {
        {{1, 1}, {1, 2}}, {{1, 1}, {1, 4}}, {{1, 2}, {1, 3}},
        {{2, 1}, {2, 2}}, {{2, 2}, {2, 3}}, {{2, 4}, {2, 5}}, {{2, 1}, {2, 5}},
        {{3, 1}, {3, 3}}, {{3, 2}, {3, 3}}, {{3, 3}, {3, 6}}, {{3, 5}, {3, 6}},
        {{3, 4}, {3, 5}},
        {{1, 3}, {2, 3}}, {{2, 5}, {3, 2}},
    };
    s.resources = {
        {1, 100.0, {25, 25, 25, 25}},
        {2, 150.0, {30, 30, 30, 30, 30}},
        {3, 120.0, {20, 20, 20, 20, 20, 20}},
    };
    s.max_iters = 20000;
    s.stop_tol = 0.0;
    s.log_stride = 20;
}

using Couplings = std::vector<std::pair<AgentId, std::vector<AgentId>>>;

void fill_objectives(Scenario& s, double q, const Vec& b, const Couplings& couplings) {
    int flat = 0;
    for (const auto& [agent, partners] : couplings) {
        Scenario::ObjectiveSpec o;
        o.agent = agent;
        o.q = q;
        o.b = b[flat++];
        for (const AgentId& p : partners) o.coupling.push_back({p, 1.0});
        s.objectives.push_back(std::move(o));
    }
}

Scenario make_case1() {
    Scenario s;
    s.name = "case1";
    fill_common(s);
    // f_ij = (x_ij - b_ij)^2 + 1/2 x_ij y_ij with y_ij a sum of decisions
    // from other coalitions only, so the estimate-based algorithm applies.
    const Couplings y = {
        {{1, 1}, {{3, 1}}},
        {{1, 2}, {{2, 1}, {3, 2}}},
        {{1, 3}, {{2, 2}, {3, 3}}},
        {{1, 4}, {{2, 3}, {3, 4}}},
        {{2, 1}, {{1, 2}, {3, 2}}},
        {{2, 2}, {{1, 3}, {3, 3}}},
        {{2, 3}, {{1, 4}, {3, 4}}},
        {{2, 4}, {{3, 5}}},
        {{2, 5}, {{3, 6}}},
        {{3, 1}, {{1, 1}}},
        {{3, 2}, {{1, 2}, {2, 1}}},
        {{3, 3}, {{1, 3}, {2, 2}}},
        {{3, 4}, {{1, 4}, {2, 3}}},
        {{3, 5}, {{2, 4}}},
        {{3, 6}, {{2, 5}}},
    };
    const Vec b = {20, 30, 40, 50, 50, 40, 30, 20, 30, 20, 20, 20, 20, 20, 20};
    fill_objectives(s, 1.0, b, y);
    s.mode = AlgorithmMode::Special;
    s.step = 0.02;
    s.reference_ne = Vec{14.12, 15.29, 28.63, 41.96, 47.44, 34.11, 20.78, 18.5,
                         29.17, 26.89, 14.73, 14.73, 14.73, 25.79, 23.12};
    s.reference_tolerance = 0.05;
    s.reference_objectives = Vec{2554, 2746, 2326};
    return s;
}

Scenario make_case2() {
    Scenario s;
    s.name = "case2";
    fill_common(s);
    // f_ij = 5 (x_ij - d_ij)^2 + 1/2 x_ij y_ij with y_ij mixing decisions
    // from inside and outside the coalition: gradient tracking required.
    const Couplings y = {
        {{1, 1}, {{1, 2}, {2, 1}, {3, 1}, {3, 2}}},
        {{1, 2}, {{1, 1}, {2, 1}, {3, 1}, {3, 2}}},
        {{1, 3}, {{2, 2}, {2, 3}, {3, 3}, {3, 4}}},
        {{1, 4}, {{2, 4}, {2, 5}, {3, 5}, {3, 6}}},
        {{2, 1}, {{1, 1}, {1, 2}, {3, 1}, {3, 2}}},
        {{2, 2}, {{1, 3}, {2, 3}, {3, 3}, {3, 4}}},
        {{2, 3}, {{1, 3}, {2, 2}, {3, 3}, {3, 4}}},
        {{2, 4}, {{1, 4}, {2, 5}, {3, 5}, {3, 6}}},
        {{2, 5}, {{1, 4}, {2, 4}, {3, 5}, {3, 6}}},
        {{3, 1}, {{1, 1}, {1, 2}, {2, 1}, {3, 2}}},
        {{3, 2}, {{1, 1}, {1, 2}, {2, 1}, {3, 1}}},
        {{3, 3}, {{1, 3}, {2, 2}, {2, 3}, {3, 4}}},
        {{3, 4}, {{1, 3}, {2, 2}, {2, 3}, {3, 3}}},
        {{3, 5}, {{1, 4}, {2, 4}, {2, 5}, {3, 6}}},
        {{3, 6}, {{1, 4}, {2, 4}, {2, 5}, {3, 5}}},
    };
    const Vec d = {20, 30, 40, 50, 50, 40, 30, 20, 30, 20, 30, 40, 40, 30, 20};
    fill_objectives(s, 5.0, d, y);
    s.mode = AlgorithmMode::General;
    s.step = 0.01;
    s.reference_ne = Vec{9.08, 20.19, 29.27, 41.46, 48.78, 35.07, 23.96, 15.54,
                         26.65, 10.14, 21.25, 28.87, 28.87, 21.0, 9.89};
    s.reference_tolerance = 0.05;
    s.reference_objectives = Vec{6598, 7295, 9347};
    return s;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
    if (name == "case1") return make_case1();
    if (name == "case2") return make_case2();
    throw ValidationError("unknown builtin scenario \"" + name +
                          "\" (available: case1, case2)");
}

}  // namespace coalition_nash
