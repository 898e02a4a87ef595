#include "circsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

namespace circsync {

namespace {

void check_vertex(const WeightedDigraph& g, int k) {
    if (k < 0 || k >= g.size()) {
        throw ArgumentError("vertex " + std::to_string(k) + " out of range for graph of size " +
                            std::to_string(g.size()));
    }
}

}  // namespace

WeightedDigraph::WeightedDigraph(int n) {
    if (n < 1) {
        throw ArgumentError("graph needs at least one vertex");
    }
    weights_ = Matrix::Zero(n, n);
    index();
}

WeightedDigraph::WeightedDigraph(Matrix weights) : weights_(std::move(weights)) {
    if (weights_.rows() < 1 || weights_.rows() != weights_.cols()) {
        throw ArgumentError("weight matrix must be square with at least one vertex");
    }
    for (Eigen::Index j = 0; j < weights_.rows(); ++j) {
        for (Eigen::Index k = 0; k < weights_.cols(); ++k) {
            const double w = weights_(j, k);
            if (!std::isfinite(w) || w < 0.0) {
                throw ArgumentError("weights must be finite and non-negative");
            }
            if (j == k && w != 0.0) {
                throw ArgumentError("self-loops are not allowed (vertex " + std::to_string(j) + ")");
            }
        }
    }
    index();
}

WeightedDigraph WeightedDigraph::from_edges(int n, std::span<const Edge> edges) {
    if (n < 1) {
        throw ArgumentError("graph needs at least one vertex");
    }
    Matrix w = Matrix::Zero(n, n);
    for (const Edge& e : edges) {
        if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
            throw ArgumentError("edge endpoint out of range");
        }
        if (!(e.weight > 0.0)) {
            throw ArgumentError("edge weights must be positive");
        }
        w(e.from, e.to) = e.weight;
    }
    return WeightedDigraph(std::move(w));
}

void WeightedDigraph::index() {
    const int n = size();
    in_edges_.assign(static_cast<std::size_t>(n), {});
    edge_count_ = 0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            if (weights_(j, k) > 0.0) {
                in_edges_[static_cast<std::size_t>(k)].push_back({j, weights_(j, k)});
                ++edge_count_;
            }
        }
    }
}

std::vector<Edge> WeightedDigraph::edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(edge_count_));
    for (int j = 0; j < size(); ++j) {
        for (int k = 0; k < size(); ++k) {
            if (weights_(j, k) > 0.0) {
                out.push_back({j, k, weights_(j, k)});
            }
        }
    }
    return out;
}

std::optional<double> WeightedDigraph::min_positive_weight() const {
    std::optional<double> best;
    for (Eigen::Index i = 0; i < weights_.size(); ++i) {
        const double w = weights_.data()[i];
        if (w > 0.0 && (!best || w < *best)) {
            best = w;
        }
    }
    return best;
}

double WeightedDigraph::max_weight() const { return weights_.maxCoeff(); }

double in_degree(const WeightedDigraph& g, int k) {
    check_vertex(g, k);
    return g.weights().col(k).sum();
}

double out_degree(const WeightedDigraph& g, int k) {
    check_vertex(g, k);
    return g.weights().row(k).sum();
}

bool is_balanced(const WeightedDigraph& g) {
    for (int k = 0; k < g.size(); ++k) {
        if (std::abs(in_degree(g, k) - out_degree(g, k)) > kWeightTolerance) {
            return false;
        }
    }
    return true;
}

bool is_undirected(const WeightedDigraph& g) {
    const Matrix& a = g.weights();
    return ((a - a.transpose()).cwiseAbs().array() <= kWeightTolerance).all();
}

bool is_unweighted(const WeightedDigraph& g) {
    const Matrix& a = g.weights();
    return ((a.array() == 0.0) || (a.array() == 1.0)).all();
}

bool is_bidirectional(const WeightedDigraph& g) {
    const Matrix& a = g.weights();
    return ((a.array() > 0.0) == (a.transpose().array() > 0.0)).all();
}

Matrix laplacian(const WeightedDigraph& g, LaplacianKind kind) {
    const Matrix& a = g.weights();
    Vector degrees = (kind == LaplacianKind::In) ? Vector(a.colwise().sum().transpose())
                                                 : Vector(a.rowwise().sum());
    Matrix l = -a;
    l.diagonal() += degrees;
    return l;
}

Matrix incidence(const WeightedDigraph& g, IncidenceMode mode) {
    const int n = g.size();
    const bool unordered = mode == IncidenceMode::Auto && is_undirected(g);
    std::vector<std::pair<int, int>> columns;
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (!g.has_edge(j, k)) {
                continue;
            }
            if (unordered && k < j) {
                continue;
            }
            columns.emplace_back(j, k);
        }
    }
    Matrix b = Matrix::Zero(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t m = 0; m < columns.size(); ++m) {
        b(columns[m].first, static_cast<Eigen::Index>(m)) = -1.0;
        b(columns[m].second, static_cast<Eigen::Index>(m)) = 1.0;
    }
    return b;
}

const char* to_string(ConnectivityClass::Kind kind) {
    switch (kind) {
        case ConnectivityClass::Kind::StronglyConnected: return "strongly_connected";
        case ConnectivityClass::Kind::RootConnected: return "root_connected";
        case ConnectivityClass::Kind::WeaklyConnected: return "weakly_connected";
        case ConnectivityClass::Kind::Disconnected: return "disconnected";
    }
    return "unknown";
}

std::vector<bool> reachable_from(const WeightedDigraph& g, int source) {
    check_vertex(g, source);
    const int n = g.size();
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::queue<int> frontier;
    seen[static_cast<std::size_t>(source)] = true;
    frontier.push(source);
    while (!frontier.empty()) {
        const int v = frontier.front();
        frontier.pop();
        for (int w = 0; w < n; ++w) {
            if (!seen[static_cast<std::size_t>(w)] && g.has_edge(v, w)) {
                seen[static_cast<std::size_t>(w)] = true;
                frontier.push(w);
            }
        }
    }
    return seen;
}

std::vector<int> roots(const WeightedDigraph& g) {
    std::vector<int> out;
    for (int v = 0; v < g.size(); ++v) {
        const auto seen = reachable_from(g, v);
        if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
            out.push_back(v);
        }
    }
    return out;
}

int component_count(const WeightedDigraph& g) {
    const int n = g.size();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    int components = 0;
    for (int start = 0; start < n; ++start) {
        if (label[static_cast<std::size_t>(start)] >= 0) {
            continue;
        }
        std::queue<int> frontier;
        frontier.push(start);
        label[static_cast<std::size_t>(start)] = components;
        while (!frontier.empty()) {
            const int v = frontier.front();
            frontier.pop();
            for (int w = 0; w < n; ++w) {
                if (label[static_cast<std::size_t>(w)] < 0 && (g.has_edge(v, w) || g.has_edge(w, v))) {
                    label[static_cast<std::size_t>(w)] = components;
                    frontier.push(w);
                }
            }
        }
        ++components;
    }
    return components;
}

ConnectivityClass classify_connectivity(const WeightedDigraph& g) {
    const auto r = roots(g);
    if (static_cast<int>(r.size()) == g.size()) {
        return {ConnectivityClass::Kind::StronglyConnected, 0};
    }
    if (!r.empty()) {
        return {ConnectivityClass::Kind::RootConnected, r.front()};
    }
    if (component_count(g) == 1) {
        return {ConnectivityClass::Kind::WeaklyConnected, -1};
    }
    return {ConnectivityClass::Kind::Disconnected, -1};
}

// ---------------------------------------------------------------------------
// GraphSequence

GraphSequence::GraphSequence(std::vector<Segment> segments, bool periodic, bool discrete,
                             std::optional<double> delta)
    : segments_(std::move(segments)), periodic_(periodic), discrete_(discrete) {
    if (segments_.empty()) {
        throw ArgumentError("graph sequence needs at least one graph");
    }
    const int n = segments_.front().graph.size();
    double min_w = 0.0;
    bool any_edge = false;
    upper_bound_ = 0.0;
    span_ = 0.0;
    for (const Segment& s : segments_) {
        if (s.graph.size() != n) {
            throw ArgumentError("all graphs in a sequence must share the vertex count");
        }
        if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
            throw ArgumentError("segment durations must be positive and finite");
        }
        starts_.push_back(span_);
        span_ += s.duration;
        if (auto w = s.graph.min_positive_weight()) {
            min_w = any_edge ? std::min(min_w, *w) : *w;
            any_edge = true;
        }
        upper_bound_ = std::max(upper_bound_, s.graph.max_weight());
    }
    if (delta) {
        if (!(*delta > 0.0)) {
            throw ArgumentError("delta must be positive");
        }
        if (any_edge && min_w < *delta) {
            throw ArgumentError("a positive weight is below the declared delta");
        }
        delta_ = *delta;
    } else {
        delta_ = any_edge ? min_w : 1.0;
    }
}

GraphSequence GraphSequence::constant(WeightedDigraph g, std::optional<double> delta) {
    std::vector<Segment> segs;
    segs.push_back({std::move(g), 1.0});
    return GraphSequence(std::move(segs), true, false, delta);
}

GraphSequence GraphSequence::discrete(std::vector<WeightedDigraph> graphs, bool periodic,
                                      std::optional<double> delta) {
    std::vector<Segment> segs;
    segs.reserve(graphs.size());
    for (auto& g : graphs) {
        segs.push_back({std::move(g), 1.0});
    }
    return GraphSequence(std::move(segs), periodic, true, delta);
}

GraphSequence GraphSequence::piecewise(std::vector<Segment> segments, bool periodic,
                                       std::optional<double> delta) {
    return GraphSequence(std::move(segments), periodic, false, delta);
}

const WeightedDigraph& GraphSequence::at(double t) const {
    if (segments_.size() == 1) {
        return segments_.front().graph;
    }
    if (t < 0.0) {
        t = periodic_ ? t : 0.0;
    }
    if (periodic_) {
        t = std::fmod(t, span_);
        if (t < 0.0) {
            t += span_;
        }
    } else if (t >= span_) {
        return segments_.back().graph;
    }
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const auto idx = static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
    return segments_[idx].graph;
}

const WeightedDigraph& GraphSequence::at_step(long t) const {
    if (!discrete_) {
        return at(static_cast<double>(t));
    }
    const long len = static_cast<long>(segments_.size());
    if (t < 0) {
        t = 0;
    }
    if (periodic_) {
        return segments_[static_cast<std::size_t>(t % len)].graph;
    }
    return segments_[static_cast<std::size_t>(std::min(t, len - 1))].graph;
}

std::optional<double> GraphSequence::next_switch_after(double t) const {
    if (segments_.size() == 1) {
        return std::nullopt;
    }
    double base = 0.0;
    if (periodic_) {
        base = std::floor(t / span_) * span_;
    } else if (t >= starts_.back()) {
        return std::nullopt;
    }
    for (int lap = 0; lap < 2; ++lap) {
        for (double s : starts_) {
            const double abs_t = base + s;
            if (abs_t > t) {
                return abs_t;
            }
        }
        if (!periodic_) {
            return std::nullopt;
        }
        base += span_;
    }
    return std::nullopt;
}

bool GraphSequence::all_balanced() const {
    return std::all_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return is_balanced(s.graph); });
}

bool GraphSequence::all_undirected() const {
    return std::all_of(segments_.begin(), segments_.end(),
                       [](const Segment& s) { return is_undirected(s.graph); });
}

namespace {

// Integral of the schedule's weights over [t0, t1] (continuous time).
Matrix integrate_weights(const GraphSequence& seq, double t0, double t1) {
    const int n = seq.vertex_count();
    Matrix acc = Matrix::Zero(n, n);
    double t = t0;
    while (t < t1) {
        const auto next = seq.next_switch_after(t);
        const double stop = next ? std::min(*next, t1) : t1;
        acc += (stop - t) * seq.at(0.5 * (t + stop)).weights();
        t = stop;
    }
    return acc;
}

bool is_integral(double x) { return std::abs(x - std::round(x)) < 1e-9; }

}  // namespace

WeightedDigraph aggregate_window(const GraphSequence& seq, double t, double horizon) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("uniform-connectivity horizon must be positive");
    }
    const int n = seq.vertex_count();
    if (seq.is_discrete()) {
        if (!is_integral(horizon) || !is_integral(t)) {
            throw ArgumentError("discrete-time windows need integer start and horizon");
        }
        Matrix acc = Matrix::Zero(n, n);
        const long start = std::lround(t);
        const long steps = std::lround(horizon);
        for (long tau = start; tau <= start + steps; ++tau) {
            acc += seq.at_step(tau).weights();
        }
        return WeightedDigraph(std::move(acc));
    }
    Matrix acc = integrate_weights(seq, t, t + horizon);
    for (Eigen::Index i = 0; i < acc.size(); ++i) {
        if (acc.data()[i] < seq.delta()) {
            acc.data()[i] = 0.0;
        }
    }
    return WeightedDigraph(std::move(acc));
}

bool is_uniformly_connected(const GraphSequence& seq, double horizon) {
    if (!(horizon > 0.0)) {
        throw ArgumentError("uniform-connectivity horizon must be positive");
    }
    const int n = seq.vertex_count();
    std::vector<bool> candidate(static_cast<std::size_t>(n), true);
    auto intersect = [&](const WeightedDigraph& g) {
        std::vector<bool> ok(static_cast<std::size_t>(n), false);
        for (int r : roots(g)) {
            ok[static_cast<std::size_t>(r)] = true;
        }
        bool any = false;
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            candidate[i] = candidate[i] && ok[i];
            any = any || candidate[i];
        }
        return any;
    };

    if (seq.is_discrete()) {
        if (!is_integral(horizon)) {
            throw ArgumentError("discrete-time horizon must be an integer");
        }
        // Periodic: one period of window starts covers all. Otherwise the tail
        // window (t = length) sees only the persisting last graph.
        const long last = static_cast<long>(seq.segment_count()) - (seq.periodic() ? 1 : 0);
        for (long t = 0; t <= last; ++t) {
            if (!intersect(aggregate_window(seq, static_cast<double>(t), horizon))) {
                return false;
            }
        }
        return true;
    }

    // Continuous time: each edge integral is piecewise linear in the window
    // start, with kinks where t or t+T meets a switch time. Between kinks the
    // thresholded edge set can only change where an integral crosses δ, so it
    // suffices to test kinks, δ-crossings and midpoints of the gaps between them.
    const double period = seq.span();
    const double t_max = period;
    std::vector<double> points{0.0, t_max};
    double start = 0.0;
    for (std::size_t i = 0; i < seq.segment_count(); ++i) {
        for (double cand : {start, start - horizon}) {
            double c = cand;
            if (seq.periodic()) {
                c = std::fmod(c, period);
                if (c < 0.0) {
                    c += period;
                }
            }
            if (c >= 0.0 && c <= t_max) {
                points.push_back(c);
            }
        }
        start += seq.segment(i).duration;
    }
    if (!seq.periodic()) {
        points.push_back(std::max(0.0, period - horizon));
    }
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 points.end());

    std::vector<double> tests = points;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const double p = points[i];
        const double q = points[i + 1];
        tests.push_back(0.5 * (p + q));
        const Matrix ip = integrate_weights(seq, p, p + horizon);
        const Matrix iq = integrate_weights(seq, q, q + horizon);
        for (Eigen::Index e = 0; e < ip.size(); ++e) {
            const double a = ip.data()[e] - seq.delta();
            const double b = iq.data()[e] - seq.delta();
            if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
                const double tc = p + (q - p) * (-a) / (b - a);
                tests.push_back(tc);
                tests.push_back(0.5 * (p + tc));
                tests.push_back(0.5 * (tc + q));
            }
        }
    }
    if (!seq.periodic()) {
        // Beyond the end only the last graph remains.
        tests.push_back(period + horizon);
    }
    for (double t : tests) {
        if (!intersect(aggregate_window(seq, t, horizon))) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Standard graphs

WeightedDigraph complete_graph(int n) {
    if (n < 1) {
        throw ArgumentError("complete graph needs n >= 1");
    }
    Matrix w = Matrix::Ones(n, n);
    w.diagonal().setZero();
    return WeightedDigraph(std::move(w));
}

WeightedDigraph ring_directed(int n) {
    if (n < 2) {
        throw ArgumentError("rings need n >= 2");
    }
    Matrix w = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        w(k, (k + 1) % n) = 1.0;
    }
    return WeightedDigraph(std::move(w));
}

WeightedDigraph ring_undirected(int n) {
    if (n < 2) {
        throw ArgumentError("rings need n >= 2");
    }
    Matrix w = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const int next = (k + 1) % n;
        w(k, next) = 1.0;
        w(next, k) = 1.0;
    }
    return WeightedDigraph(std::move(w));
}

WeightedDigraph path_graph(int n) {
    if (n < 1) {
        throw ArgumentError("path needs n >= 1");
    }
    Matrix w = Matrix::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        w(k, k + 1) = 1.0;
        w(k + 1, k) = 1.0;
    }
    return WeightedDigraph(std::move(w));
}

WeightedDigraph directed_tree(int n, int branching) {
    if (n < 1 || branching < 1) {
        throw ArgumentError("directed tree needs n >= 1 and branching >= 1");
    }
    Matrix w = Matrix::Zero(n, n);
    for (int v = 1; v < n; ++v) {
        w((v - 1) / branching, v) = 1.0;
    }
    return WeightedDigraph(std::move(w));
}

WeightedDigraph undirected_tree(std::span<const int> parents) {
    const int n = static_cast<int>(parents.size());
    if (n < 1) {
        throw ArgumentError("tree needs at least one vertex");
    }
    Matrix w = Matrix::Zero(n, n);
    int root_count = 0;
    for (int v = 0; v < n; ++v) {
        const int p = parents[static_cast<std::size_t>(v)];
        if (p < 0) {
            ++root_count;
            continue;
        }
        if (p >= n || p == v) {
            throw ArgumentError("invalid parent index");
        }
        w(p, v) = 1.0;
        w(v, p) = 1.0;
    }
    WeightedDigraph g(std::move(w));
    if (root_count != 1 || component_count(g) != 1) {
        throw ArgumentError("parent list does not describe a tree");
    }
    return g;
}

WeightedDigraph vertex_interconnection(const WeightedDigraph& first, const WeightedDigraph& second,
                                       int shared_first, int shared_second) {
    check_vertex(first, shared_first);
    check_vertex(second, shared_second);
    const int n1 = first.size();
    const int n2 = second.size();
    const int n = n1 + n2 - 1;
    std::vector<int> map(static_cast<std::size_t>(n2));
    int next = n1;
    for (int v = 0; v < n2; ++v) {
        map[static_cast<std::size_t>(v)] = (v == shared_second) ? shared_first : next++;
    }
    Matrix w = Matrix::Zero(n, n);
    w.topLeftCorner(n1, n1) = first.weights();
    for (const Edge& e : second.edges()) {
        w(map[static_cast<std::size_t>(e.from)], map[static_cast<std::size_t>(e.to)]) = e.weight;
    }
    return WeightedDigraph(std::move(w));
}

WeightedDigraph make_standard(StandardKind kind, const StandardParams& params) {
    switch (kind) {
        case StandardKind::Complete: return complete_graph(params.n);
        case StandardKind::RingDirected: return ring_directed(params.n);
        case StandardKind::RingUndirected: return ring_undirected(params.n);
        case StandardKind::Path: return path_graph(params.n);
        case StandardKind::DirectedTree: return directed_tree(params.n, params.branching);
    }
    throw ArgumentError("unknown standard graph kind");
}

std::optional<StandardKind> parse_standard_kind(std::string_view name) {
    if (name == "complete") return StandardKind::Complete;
    if (name == "ring_directed") return StandardKind::RingDirected;
    if (name == "ring_undirected") return StandardKind::RingUndirected;
    if (name == "path") return StandardKind::Path;
    if (name == "directed_tree") return StandardKind::DirectedTree;
    return std::nullopt;
}

}  // namespace circsync
