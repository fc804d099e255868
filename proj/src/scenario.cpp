#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coalition_nash/errors.hpp"
#include "coalition_nash/harness.hpp"

namespace coalition_nash {

namespace {

using nlohmann::json;

AgentId parse_agent(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw ParseError(where + ": agent reference must be a [coalition, member] integer pair");
    return AgentId{j[0].get<int>(), j[1].get<int>()};
}

json agent_json(AgentId id) { return json::array({id.coalition, id.member}); }

template <typename T>
T require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field \"" + key + "\" has the wrong type (" + e.what() + ")");
    }
}

Scenario scenario_from_json(const json& root, const std::string& origin) {
    if (!root.is_object()) throw ParseError(origin + ": top level must be a JSON object");
    const int schema = require<int>(root, "schema", origin);
    if (schema != 1)
        throw ValidationError(origin + ": unsupported schema version " + std::to_string(schema));

    Scenario s;
    s.name = require<std::string>(root, "name", origin);

    const json& topo = root.contains("topology") ? root.at("topology") : json();
    if (!topo.is_object()) throw ParseError(origin + ": missing \"topology\" object");
    s.coalition_sizes = require<std::vector<int>>(topo, "coalition_sizes", origin + ".topology");
    if (!topo.contains("edges") || !topo.at("edges").is_array())
        throw ParseError(origin + ".topology: missing \"edges\" array");
    for (size_t e = 0; e < topo.at("edges").size(); ++e) {
        const json& edge = topo.at("edges")[e];
        const std::string where = origin + ".topology.edges[" + std::to_string(e) + "]";
        if (!edge.is_array() || edge.size() != 2)
            throw ParseError(where + ": edge must be a pair of agent references");
        s.edges.emplace_back(parse_agent(edge[0], where), parse_agent(edge[1], where));
    }

    if (!root.contains("objectives") || !root.at("objectives").is_array())
        throw ParseError(origin + ": missing \"objectives\" array");
    for (size_t i = 0; i < root.at("objectives").size(); ++i) {
        const json& o = root.at("objectives")[i];
        const std::string where = origin + ".objectives[" + std::to_string(i) + "]";
        Scenario::ObjectiveSpec spec;
        if (!o.contains("agent")) throw ParseError(where + ": missing field \"agent\"");
        spec.agent = parse_agent(o.at("agent"), where);
        spec.q = require<double>(o, "q", where);
        spec.b = require<double>(o, "b", where);
        if (o.contains("coupling")) {
            if (!o.at("coupling").is_array())
                throw ParseError(where + ": \"coupling\" must be an array of [agent, coefficient]");
            for (const json& entry : o.at("coupling")) {
                if (!entry.is_array() || entry.size() != 2 || !entry[1].is_number())
                    throw ParseError(where + ": coupling entries are [agent, coefficient] pairs");
                spec.coupling.emplace_back(parse_agent(entry[0], where), entry[1].get<double>());
            }
        }
        s.objectives.push_back(std::move(spec));
    }

    if (!root.contains("resources") || !root.at("resources").is_array())
        throw ParseError(origin + ": missing \"resources\" array");
    for (size_t i = 0; i < root.at("resources").size(); ++i) {
        const json& r = root.at("resources")[i];
        const std::string where = origin + ".resources[" + std::to_string(i) + "]";
        Scenario::ResourceSpec spec;
        spec.coalition = require<int>(r, "coalition", where);
        spec.total = require<double>(r, "total", where);
        spec.holdings = require<Vec>(r, "holdings", where);
        s.resources.push_back(std::move(spec));
    }

    const json& run = root.contains("run") ? root.at("run") : json();
    if (!run.is_object()) throw ParseError(origin + ": missing \"run\" object");
    const std::string mode = require<std::string>(run, "mode", origin + ".run");
    if (mode == "special")
        s.mode = AlgorithmMode::Special;
    else if (mode == "general")
        s.mode = AlgorithmMode::General;
    else
        throw ValidationError(origin + ".run: mode must be \"special\" or \"general\", got \"" +
                              mode + "\"");
    if (!run.contains("step")) throw ParseError(origin + ".run: missing field \"step\"");
    if (run.at("step").is_string()) {
        if (run.at("step").get<std::string>() != "certified")
            throw ValidationError(origin + ".run: step must be a number or \"certified\"");
        s.certified_step = true;
    } else if (run.at("step").is_number()) {
        s.step = run.at("step").get<double>();
        if (!(s.step > 0.0)) throw ValidationError(origin + ".run: step must be positive");
    } else {
        throw ParseError(origin + ".run: step must be a number or \"certified\"");
    }
    s.max_iters = require<long>(run, "max_iters", origin + ".run");
    if (s.max_iters < 0) throw ValidationError(origin + ".run: max_iters must be >= 0");
    s.stop_tol = run.contains("stop_tol") ? require<double>(run, "stop_tol", origin + ".run") : 0.0;
    if (s.stop_tol < 0) throw ValidationError(origin + ".run: stop_tol must be >= 0");
    s.log_stride =
        run.contains("log_stride") ? require<long>(run, "log_stride", origin + ".run") : 1;
    if (s.log_stride < 1) throw ValidationError(origin + ".run: log_stride must be >= 1");

    if (root.contains("reference")) {
        const json& ref = root.at("reference");
        if (!ref.is_object()) throw ParseError(origin + ".reference: must be an object");
        s.reference_ne = require<Vec>(ref, "ne", origin + ".reference");
        if (ref.contains("tolerance"))
            s.reference_tolerance = ref.at("tolerance").get<double>();
        if (ref.contains("objectives"))
            s.reference_objectives = ref.at("objectives").get<Vec>();
    }
    return s;
}

void validate_semantics(const Scenario& s, const std::string& origin) {
    // Structural checks the JSON layer cannot express; topology/game
    // construction then enforces the rest (connectivity, coupling layout,
    // holdings-vs-total) eagerly.
    const int n_coalitions = static_cast<int>(s.coalition_sizes.size());
    if (static_cast<int>(s.resources.size()) != n_coalitions)
        throw ValidationError(origin + ": need exactly one resources entry per coalition");
    int n_sum = 0;
    for (int v : s.coalition_sizes) {
        if (v < 1) throw ValidationError(origin + ": coalition sizes must be >= 1");
        n_sum += v;
    }
    for (int i = 0; i < n_coalitions; ++i) {
        const auto& r = s.resources[i];
        if (r.coalition != i + 1)
            throw ValidationError(origin + ".resources[" + std::to_string(i) +
                                  "]: expected coalition " + std::to_string(i + 1));
        if (static_cast<int>(r.holdings.size()) != s.coalition_sizes[i])
            throw ValidationError(origin + ".resources[" + std::to_string(i) +
                                  "]: holdings length must match the coalition size");
        double sum = 0.0;
        for (double h : r.holdings) sum += h;
        if (std::abs(sum - r.total) > 1e-9 * std::max(1.0, std::abs(r.total)))
            throw ValidationError(origin + ": holdings of coalition " + std::to_string(i + 1) +
                                  " sum to " + std::to_string(sum) + " but total is " +
                                  std::to_string(r.total));
    }
    if (static_cast<int>(s.objectives.size()) != n_sum)
        throw ValidationError(origin + ": need exactly one objective per agent (" +
                              std::to_string(n_sum) + ")");
    if (s.reference_ne && static_cast<int>(s.reference_ne->size()) != n_sum)
        throw ValidationError(origin + ".reference.ne: length must be " + std::to_string(n_sum));
    if (s.reference_objectives &&
        static_cast<int>(s.reference_objectives->size()) != n_coalitions)
        throw ValidationError(origin + ".reference.objectives: length must be " +
                              std::to_string(n_coalitions));
}

}  // namespace

Scenario load_scenario(std::istream& in, const std::string& origin) {
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    Scenario s = scenario_from_json(root, origin);
    validate_semantics(s, origin);
    make_game(s);  // eager full validation: topology + game invariants
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path.string());
    return load_scenario(in, path.string());
}

std::string scenario_to_json(const Scenario& s) {
    json root;
    root["schema"] = 1;
    root["name"] = s.name;
    root["topology"]["coalition_sizes"] = s.coalition_sizes;
    json edges = json::array();
    for (const auto& [a, b] : s.edges) edges.push_back(json::array({agent_json(a), agent_json(b)}));
    root["topology"]["edges"] = std::move(edges);
    json objectives = json::array();
    for (const auto& o : s.objectives) {
        json jo;
        jo["agent"] = agent_json(o.agent);
        jo["q"] = o.q;
        jo["b"] = o.b;
        json coupling = json::array();
        for (const auto& [agent, coeff] : o.coupling)
            coupling.push_back(json::array({agent_json(agent), coeff}));
        jo["coupling"] = std::move(coupling);
        objectives.push_back(std::move(jo));
    }
    root["objectives"] = std::move(objectives);
    json resources = json::array();
    for (const auto& r : s.resources) {
        json jr;
        jr["coalition"] = r.coalition;
        jr["total"] = r.total;
        jr["holdings"] = r.holdings;
        resources.push_back(std::move(jr));
    }
    root["resources"] = std::move(resources);
    root["run"]["mode"] = s.mode == AlgorithmMode::Special ? "special" : "general";
    if (s.certified_step)
        root["run"]["step"] = "certified";
    else
        root["run"]["step"] = s.step;
    root["run"]["max_iters"] = s.max_iters;
    root["run"]["stop_tol"] = s.stop_tol;
    root["run"]["log_stride"] = s.log_stride;
    if (s.reference_ne) {
        root["reference"]["ne"] = *s.reference_ne;
        root["reference"]["tolerance"] = s.reference_tolerance;
        if (s.reference_objectives) root["reference"]["objectives"] = *s.reference_objectives;
    }
    return root.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write scenario file " + path.string());
    out << scenario_to_json(s);
}

Game make_game(const Scenario& s) {
    auto topo = std::make_shared<NetworkTopology>(build_topology(s.coalition_sizes, s.edges));
    std::vector<Objective> objectives(topo->n_sum);
    std::vector<char> seen(topo->n_sum, 0);
    for (const auto& spec : s.objectives) {
        if (spec.agent.coalition < 1 || spec.agent.coalition > topo->n_coalitions ||
            spec.agent.member < 1 ||
            spec.agent.member > topo->coalition_sizes[spec.agent.coalition - 1])
            throw ValidationError("objective references agent " +
                                  std::to_string(spec.agent.coalition) +
                                  std::to_string(spec.agent.member) + " out of range");
        const int flat = topo->flat(spec.agent);
        if (seen[flat])
            throw ValidationError("duplicate objective for agent " +
                                  std::to_string(spec.agent.coalition) +
                                  std::to_string(spec.agent.member));
        seen[flat] = 1;
        QuadraticObjective q;
        q.q = spec.q;
        q.b = spec.b;
        q.coupling.assign(topo->n_sum, 0.0);
        for (const auto& [agent, coeff] : spec.coupling) {
            if (agent.coalition < 1 || agent.coalition > topo->n_coalitions || agent.member < 1 ||
                agent.member > topo->coalition_sizes[agent.coalition - 1])
                throw ValidationError("coupling of agent " + std::to_string(spec.agent.coalition) +
                                      std::to_string(spec.agent.member) +
                                      " references an agent out of range");
            q.coupling[topo->flat(agent)] += coeff;
        }
        objectives[flat] = std::move(q);
    }
    for (int a = 0; a < topo->n_sum; ++a)
        if (!seen[a])
            throw ValidationError("missing objective for agent " +
                                  std::to_string(topo->unflat(a).coalition) +
                                  std::to_string(topo->unflat(a).member));
    Vec totals(topo->n_coalitions, 0.0), holdings(topo->n_sum, 0.0);
    for (const auto& r : s.resources) {
        totals[r.coalition - 1] = r.total;
        for (int j = 0; j < static_cast<int>(r.holdings.size()); ++j)
            holdings[topo->offsets[r.coalition - 1] + j] = r.holdings[j];
    }
    return Game(std::move(topo), std::move(objectives), std::move(totals), std::move(holdings));
}

}  // namespace coalition_nash
