#include "circsync/graph_io.hpp"

#include <string>

namespace circsync {

namespace {

int get_int(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j.at(field).is_number_integer()) {
        throw ArgumentError(std::string("graph: field '") + field + "' must be an integer");
    }
    return j.at(field).get<int>();
}

}  // namespace

WeightedDigraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ArgumentError("graph: expected an object");
    }
    if (j.contains("kind")) {
        const std::string kind = j.at("kind").get<std::string>();
        const nlohmann::json params = j.value("params", nlohmann::json::object());
        if (kind == "vertex_interconnection") {
            if (!params.contains("first") || !params.contains("second")) {
                throw ArgumentError("graph: vertex_interconnection needs 'first' and 'second'");
            }
            return vertex_interconnection(graph_from_json(params.at("first")),
                                          graph_from_json(params.at("second")),
                                          params.value("shared_first", 1) - 1,
                                          params.value("shared_second", 1) - 1);
        }
        const auto std_kind = parse_standard_kind(kind);
        if (!std_kind) {
            throw ArgumentError("graph: unknown kind '" + kind + "'");
        }
        StandardParams p;
        p.n = get_int(params, "n");
        p.branching = params.value("branching", 2);
        return make_standard(*std_kind, p);
    }

    const int n = get_int(j, "n");
    std::vector<Edge> edges;
    if (j.contains("edges")) {
        const auto& list = j.at("edges");
        if (!list.is_array()) {
            throw ArgumentError("graph: 'edges' must be an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto& e = list[i];
            if (!e.is_array() || e.size() < 2 || e.size() > 3) {
                throw ArgumentError("graph: edges[" + std::to_string(i) + "] must be [j, k] or [j, k, w]");
            }
            const int from = e[0].get<int>();
            const int to = e[1].get<int>();
            const double w = e.size() == 3 ? e[2].get<double>() : 1.0;
            if (from < 1 || from > n || to < 1 || to > n) {
                throw ArgumentError("graph: edges[" + std::to_string(i) + "] has a vertex outside 1.." +
                                    std::to_string(n));
            }
            edges.push_back({from - 1, to - 1, w});
        }
    }
    return WeightedDigraph::from_edges(n, edges);
}

nlohmann::json graph_to_json(const WeightedDigraph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) {
        edges.push_back({e.from + 1, e.to + 1, e.weight});
    }
    return {{"n", g.size()}, {"edges", edges}};
}

}  // namespace circsync
