#pragma once

#include "circsync/common.hpp"

#include <optional>
#include <span>
#include <vector>

namespace circsync {

/// Directed edge j ⇝ k with positive weight; vertices are 0-based.
struct Edge {
    int from;
    int to;
    double weight = 1.0;
};

/// Weighted digraph on n vertices stored as a dense weight matrix.
///
/// Entry (j, k) is the weight of the edge j ⇝ k (agent k receives information
/// from agent j). The diagonal is zero and every entry is non-negative; an edge
/// exists iff its weight is positive. Values are immutable after construction,
/// so a graph may be shared freely between threads.
class WeightedDigraph {
public:
    struct InEdge {
        int from;
        double weight;
    };

    /// Edgeless graph on n ≥ 1 vertices.
    explicit WeightedDigraph(int n);
    /// Validates the invariants; throws ArgumentError on violation.
    explicit WeightedDigraph(Matrix weights);

    static WeightedDigraph from_edges(int n, std::span<const Edge> edges);

    int size() const noexcept { return static_cast<int>(weights_.rows()); }
    double weight(int from, int to) const { return weights_(from, to); }
    bool has_edge(int from, int to) const { return weights_(from, to) > 0.0; }
    const Matrix& weights() const noexcept { return weights_; }

    /// In-neighbors of k in increasing vertex order.
    std::span<const InEdge> in_edges(int k) const { return in_edges_[static_cast<std::size_t>(k)]; }
    /// All edges in row-major (from, to) order.
    std::vector<Edge> edges() const;
    int edge_count() const noexcept { return edge_count_; }

    /// Smallest positive weight, or nullopt for an edgeless graph.
    std::optional<double> min_positive_weight() const;
    double max_weight() const;

    bool operator==(const WeightedDigraph& other) const { return weights_ == other.weights_; }

private:
    void index();

    Matrix weights_;
    std::vector<std::vector<InEdge>> in_edges_;
    int edge_count_ = 0;
};

/// Absolute tolerance for balance and symmetry checks on user-supplied weights.
inline constexpr double kWeightTolerance = 1e-12;

double in_degree(const WeightedDigraph& g, int k);
double out_degree(const WeightedDigraph& g, int k);
bool is_balanced(const WeightedDigraph& g);
/// a_jk = a_kj for all pairs (within kWeightTolerance).
bool is_undirected(const WeightedDigraph& g);
/// Every weight is 0 or 1.
bool is_unweighted(const WeightedDigraph& g);
/// Edge (j,k) present iff (k,j) present; weights may differ.
bool is_bidirectional(const WeightedDigraph& g);

enum class LaplacianKind { In, Out };

/// D − A with D the diagonal of in- or out-degrees.
Matrix laplacian(const WeightedDigraph& g, LaplacianKind kind = LaplacianKind::In);

enum class IncidenceMode {
    /// One column per unordered edge (oriented low → high index) for undirected
    /// graphs, one column per directed edge otherwise.
    Auto,
    Directed,
};

/// Vertex-edge incidence matrix: the column for edge j ⇝ k holds −1 at row j and +1 at row k.
Matrix incidence(const WeightedDigraph& g, IncidenceMode mode = IncidenceMode::Auto);

struct ConnectivityClass {
    enum class Kind { StronglyConnected, RootConnected, WeaklyConnected, Disconnected };
    Kind kind;
    /// A root vertex for StronglyConnected/RootConnected, -1 otherwise.
    int root = -1;

    bool operator==(const ConnectivityClass&) const = default;
};

const char* to_string(ConnectivityClass::Kind kind);

/// Vertices reachable from `source` by directed paths (source included).
std::vector<bool> reachable_from(const WeightedDigraph& g, int source);
/// Vertices from which every vertex is reachable.
std::vector<int> roots(const WeightedDigraph& g);
/// Number of connected components of the underlying undirected graph.
int component_count(const WeightedDigraph& g);
ConnectivityClass classify_connectivity(const WeightedDigraph& g);

/// Time-varying δ-digraph over a fixed vertex set.
///
/// The schedule is piecewise constant: segment i holds graph i for
/// `durations[i]` time units. Discrete sequences use unit durations and are
/// indexed by integer step. A non-periodic schedule keeps its last graph
/// forever; a periodic one repeats.
class GraphSequence {
public:
    struct Segment {
        WeightedDigraph graph;
        double duration;
    };

    /// Constant schedule. delta defaults to the smallest positive weight.
    static GraphSequence constant(WeightedDigraph g, std::optional<double> delta = std::nullopt);
    /// Discrete-time sequence G(0), G(1), ...
    static GraphSequence discrete(std::vector<WeightedDigraph> graphs, bool periodic,
                                  std::optional<double> delta = std::nullopt);
    /// Continuous-time piecewise-constant schedule.
    static GraphSequence piecewise(std::vector<Segment> segments, bool periodic,
                                   std::optional<double> delta = std::nullopt);

    int vertex_count() const noexcept { return segments_.front().graph.size(); }
    std::size_t segment_count() const noexcept { return segments_.size(); }
    const Segment& segment(std::size_t i) const { return segments_[i]; }
    const std::vector<Segment>& segments() const noexcept { return segments_; }
    bool periodic() const noexcept { return periodic_; }
    bool is_discrete() const noexcept { return discrete_; }
    bool is_constant() const noexcept { return segments_.size() == 1; }
    double delta() const noexcept { return delta_; }
    double upper_bound() const noexcept { return upper_bound_; }
    /// Sum of segment durations.
    double span() const noexcept { return span_; }

    /// Graph active at time t (segments are half-open [start, end)).
    const WeightedDigraph& at(double t) const;
    /// Graph of discrete step t.
    const WeightedDigraph& at_step(long t) const;
    /// First switch time strictly greater than t, if any.
    std::optional<double> next_switch_after(double t) const;

    bool all_balanced() const;
    bool all_undirected() const;

private:
    GraphSequence(std::vector<Segment> segments, bool periodic, bool discrete,
                  std::optional<double> delta);

    std::vector<Segment> segments_;
    std::vector<double> starts_;
    bool periodic_;
    bool discrete_;
    double delta_;
    double upper_bound_;
    double span_;
};

/// Weights aggregated over the window [t, t+T]: summed over steps t..t+T in
/// discrete time, integrated and thresholded at δ in continuous time.
WeightedDigraph aggregate_window(const GraphSequence& seq, double t, double horizon);

/// True iff one vertex roots every aggregated window graph over the schedule.
/// Throws ArgumentError for horizon ≤ 0 or a non-integer discrete horizon.
bool is_uniformly_connected(const GraphSequence& seq, double horizon);

// Standard constructors. All produce unit weights.
WeightedDigraph complete_graph(int n);
WeightedDigraph ring_directed(int n);
WeightedDigraph ring_undirected(int n);
WeightedDigraph path_graph(int n);
/// Directed tree rooted at 0 with edges parent ⇝ child; vertex v > 0 has parent (v−1)/branching.
WeightedDigraph directed_tree(int n, int branching = 2);
/// Undirected tree from a parent list (parents[root] = −1).
WeightedDigraph undirected_tree(std::span<const int> parents);
/// Glues `second` onto `first` by identifying second's `shared_second` with
/// first's `shared_first`. The result has |V1| + |V2| − 1 vertices: first's
/// vertices keep their indices and second's others follow in order.
WeightedDigraph vertex_interconnection(const WeightedDigraph& first, const WeightedDigraph& second,
                                       int shared_first, int shared_second);

enum class StandardKind { Complete, RingDirected, RingUndirected, Path, DirectedTree };

struct StandardParams {
    int n = 0;
    int branching = 2;
};

WeightedDigraph make_standard(StandardKind kind, const StandardParams& params);
std::optional<StandardKind> parse_standard_kind(std::string_view name);

}  // namespace circsync
