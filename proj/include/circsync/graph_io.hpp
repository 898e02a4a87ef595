#pragma once

#include "circsync/graph.hpp"

#include <json.hpp>

namespace circsync {

/// Reads a graph literal.
///
/// Either `{"n": 3, "edges": [[1, 2, 0.5], ...]}` with 1-indexed vertices
/// (weight optional, default 1), or `{"kind": "ring_directed", "params": {"n": 6}}`.
/// The kind `vertex_interconnection` takes `first`, `second` (graph literals)
/// and 1-indexed `shared_first`, `shared_second`. Throws ArgumentError with the
/// offending field on malformed input.
WeightedDigraph graph_from_json(const nlohmann::json& j);

/// Writes `{"n": ..., "edges": [[j, k, w], ...]}` with 1-indexed vertices.
nlohmann::json graph_to_json(const WeightedDigraph& g);

}  // namespace circsync
