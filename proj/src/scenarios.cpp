#include "circsync/scenarios.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace circsync {

// ---------------------------------------------------------------------------
// Vicsek

namespace {

void check_vicsek(const VicsekState& s) {
    if (!(s.radius > 0.0)) {
        throw ArgumentError("sensing radius must be positive");
    }
    if (s.positions.rows() != s.size() || s.positions.cols() != 2) {
        throw ArgumentError("positions must be an N x 2 matrix matching the headings");
    }
}

}  // namespace

WeightedDigraph proximity_graph(const VicsekState& s) {
    check_vicsek(s);
    const int n = s.size();
    Matrix w = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            if ((s.positions.row(j) - s.positions.row(k)).norm() <= s.radius) {
                w(j, k) = 1.0;
                w(k, j) = 1.0;
            }
        }
    }
    return WeightedDigraph(std::move(w));
}

VicsekState vicsek_step(const VicsekState& s) {
    const WeightedDigraph g = proximity_graph(s);
    VicsekState next;
    next.radius = s.radius;
    next.headings = dt_step(s.headings, g, 1.0);
    next.positions = s.positions;
    for (int k = 0; k < s.size(); ++k) {
        next.positions(k, 0) += std::cos(s.headings[k]);
        next.positions(k, 1) += std::sin(s.headings[k]);
    }
    return next;
}

std::pair<double, double> divergence_radius_interval(int n, double sensing_radius) {
    if (n < 5) {
        throw ArgumentError("the divergence setup needs N >= 5 for a stable ring of headings");
    }
    if (!(sensing_radius > 0.0)) {
        throw ArgumentError("sensing radius must be positive");
    }
    return {sensing_radius / (2.0 * std::sin(kTwoPi / n)), sensing_radius / (2.0 * std::sin(kPi / n))};
}

VicsekState vicsek_divergence_setup(int n, double ring_radius, double sensing_radius) {
    const auto [lo, hi] = divergence_radius_interval(n, sensing_radius);
    if (!(ring_radius > lo && ring_radius <= hi)) {
        std::ostringstream msg;
        msg << "ring radius " << format_double(ring_radius) << " infeasible: each agent must sense exactly its two "
            << "ring neighbors, which needs a radius in (" << format_double(lo) << ", " << format_double(hi) << "]";
        throw ArgumentError(msg.str());
    }
    VicsekState s;
    s.radius = sensing_radius;
    s.positions.resize(n, 2);
    Vector headings(n);
    for (int k = 0; k < n; ++k) {
        const double phi = kTwoPi * k / n;
        s.positions(k, 0) = ring_radius * std::cos(phi);
        s.positions(k, 1) = ring_radius * std::sin(phi);
        headings[k] = phi;
    }
    s.headings = CircleSwarm(std::move(headings));
    return s;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

class ParamReader {
public:
    ParamReader(const std::string& kind, const ScenarioParams& given) : kind_(kind) {
        const auto& defaults = scenario_registry().at(kind);
        for (const auto& [key, value] : given) {
            (void)value;
            if (!defaults.count(key)) {
                throw ArgumentError("scenario " + kind + ": unknown parameter '" + key + "'");
            }
        }
        values_ = defaults;
        for (const auto& [key, value] : given) {
            values_[key] = value;
        }
    }

    double real(const std::string& key) const { return values_.at(key); }

    int integer(const std::string& key, int min) const {
        const double v = values_.at(key);
        if (v != std::floor(v) || v < min || v > 1e6) {
            throw ArgumentError("scenario " + kind_ + ": '" + key + "' must be an integer >= " + std::to_string(min));
        }
        return static_cast<int>(v);
    }

    double positive(const std::string& key) const {
        const double v = values_.at(key);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ArgumentError("scenario " + kind_ + ": '" + key + "' must be positive");
        }
        return v;
    }

private:
    std::string kind_;
    ScenarioParams values_;
};

std::vector<int> range(int begin, int count) {
    std::vector<int> r(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        r[static_cast<std::size_t>(i)] = begin + i;
    }
    return r;
}

// Directed ring on [offset, offset + n) in pursuit order: k−1 ⇝ k.
void add_directed_ring(Matrix& w, int offset, int n) {
    for (int k = 0; k < n; ++k) {
        w(offset + k, offset + (k + 1) % n) = 1.0;
    }
}

void add_undirected_ring(Matrix& w, int offset, int n) {
    for (int k = 0; k < n; ++k) {
        w(offset + k, offset + (k + 1) % n) = 1.0;
        w(offset + (k + 1) % n, offset + k) = 1.0;
    }
}

// Pursuit layout: each agent's in-neighbor leads it by 2π/n, so the set
// rotates forward at 2 sin(2π/n).
void place_pursuit(Vector& th, int offset, int n) {
    for (int k = 0; k < n; ++k) {
        th[offset + k] = -kTwoPi * k / n;
    }
}

Scenario build(const std::string& name, Matrix w, Vector th, double alpha, double t_end,
               std::vector<std::vector<int>> groups) {
    return Scenario{name,
                    GraphSequence::constant(WeightedDigraph(std::move(w))),
                    CircleSwarm(std::move(th)),
                    CouplingProfile::sine(),
                    alpha,
                    t_end,
                    std::move(groups)};
}

Scenario quasiperiodic(const std::string& name, int x, bool driven, double phase) {
    const int n = x + 6 + 12 + (driven ? 1 : 0);
    Matrix w = Matrix::Zero(n, n);
    Vector th = Vector::Zero(n);
    add_undirected_ring(w, 0, x);
    for (int k = 0; k < x; ++k) {
        th[k] = kTwoPi * k / x;
    }
    add_directed_ring(w, x, 6);
    place_pursuit(th, x, 6);
    add_directed_ring(w, x + 6, 12);
    place_pursuit(th, x + 6, 12);
    std::vector<std::vector<int>> groups{range(0, x), range(x, 6), range(x + 6, 12)};
    if (driven) {
        // With α = 1 the law 2α Σ a sin becomes Σ sin for weight ½.
        const int k = n - 1;
        for (int src : {0, x, x + 6}) {
            w(src, k) = 0.5;
        }
        th[k] = phase;
        groups.push_back({k});
    }
    return build(name, std::move(w), std::move(th), 1.0, 500.0, std::move(groups));
}

}  // namespace

const std::map<std::string, ScenarioParams>& scenario_registry() {
    static const std::map<std::string, ScenarioParams> registry{
        {"splay_ring", {{"n", 10}, {"a", 1}, {"alpha", 1}}},
        {"cyclic_pursuit", {{"n", 6}, {"alpha", 1}}},
        {"two_ring_periodic", {{"n1", 5}, {"n2", 6}, {"cross_weight", 0.1}}},
        {"quasiperiodic_three_sets", {{"x", 5}}},
        {"disorderly_agent", {{"x", 5}, {"phase", 0}}},
        {"direction_reversal", {}},
    };
    return registry;
}

Scenario make_scenario(const std::string& kind, const ScenarioParams& params) {
    if (!scenario_registry().count(kind)) {
        throw ArgumentError("unknown scenario '" + kind + "'");
    }
    const ParamReader p(kind, params);

    if (kind == "splay_ring") {
        const int n = p.integer("n", 2);
        const int a = p.integer("a", 0);
        Matrix w = Matrix::Zero(n, n);
        add_undirected_ring(w, 0, n);
        Vector th(n);
        for (int k = 0; k < n; ++k) {
            th[k] = kTwoPi * a * k / n;
        }
        return build(kind, std::move(w), std::move(th), p.positive("alpha"), 200.0, {range(0, n)});
    }
    if (kind == "cyclic_pursuit") {
        const int n = p.integer("n", 2);
        Matrix w = Matrix::Zero(n, n);
        add_directed_ring(w, 0, n);
        Vector th(n);
        place_pursuit(th, 0, n);
        return build(kind, std::move(w), std::move(th), p.positive("alpha"), 10.0, {range(0, n)});
    }
    if (kind == "two_ring_periodic") {
        const int n1 = p.integer("n1", 3);
        const int n2 = p.integer("n2", 3);
        if (n1 == n2) {
            throw ArgumentError("scenario two_ring_periodic: ring sizes must differ");
        }
        const double cross = p.positive("cross_weight");
        const int n = n1 + n2;
        Matrix w = Matrix::Zero(n, n);
        add_directed_ring(w, 0, n1);
        add_directed_ring(w, n1, n2);
        for (int j = 0; j < n1; ++j) {
            for (int k = n1; k < n; ++k) {
                w(j, k) = cross;
                w(k, j) = cross;
            }
        }
        Vector th(n);
        place_pursuit(th, 0, n1);
        place_pursuit(th, n1, n2);
        const double v1 = 2.0 * std::sin(kTwoPi / n1);
        const double v2 = 2.0 * std::sin(kTwoPi / n2);
        const double period = kTwoPi / std::abs(v1 - v2);
        return build(kind, std::move(w), std::move(th), 1.0, 2.0 * period, {range(0, n1), range(n1, n2)});
    }
    if (kind == "quasiperiodic_three_sets") {
        return quasiperiodic(kind, p.integer("x", 3), false, 0.0);
    }
    if (kind == "disorderly_agent") {
        return quasiperiodic(kind, p.integer("x", 3), true, p.real("phase"));
    }

    // direction_reversal: sets A (0..8) and B (9..17), nine agents each, with
    // A_k = 2πk/9 and B_m = A_m − π/18. A_k listens to A_{k−1} (0.04) and to
    // B_{k+2}, initially 7π/18 ahead (0.05). B_m listens to B_{m+1} (0.07) and
    // to A_{m+1}, initially 5π/18 ahead (0.05). α = ½ turns 2α Σ a sin into Σ a sin.
    const int n = 18;
    Matrix w = Matrix::Zero(n, n);
    Vector th(n);
    for (int k = 0; k < 9; ++k) {
        th[k] = kTwoPi * k / 9;
        th[9 + k] = kTwoPi * k / 9 - kPi / 18;
    }
    for (int k = 0; k < 9; ++k) {
        w((k + 8) % 9, k) = 0.04;
        w(9 + (k + 2) % 9, k) = 0.05;
        w(9 + (k + 1) % 9, 9 + k) = 0.07;
        w((k + 1) % 9, 9 + k) = 0.05;
    }
    return build(kind, std::move(w), std::move(th), 0.5, 500.0, {range(0, 9), range(9, 9)});
}

// ---------------------------------------------------------------------------
// Hopfield

namespace {

void check_spins(const SpinState& s, const WeightedDigraph& g) {
    if (s.size() != g.size()) {
        throw ArgumentError("spin state and graph sizes differ");
    }
    if (!s.thresholds.empty() && static_cast<int>(s.thresholds.size()) != s.size()) {
        throw ArgumentError("thresholds must be empty or one per spin");
    }
    for (int x : s.spins) {
        if (x != 1 && x != -1) {
            throw ArgumentError("spins must be exactly +1 or -1");
        }
    }
}

double threshold(const SpinState& s, int k) {
    return s.thresholds.empty() ? 0.0 : s.thresholds[static_cast<std::size_t>(k)];
}

}  // namespace

SpinState hopfield_step(const SpinState& s, const WeightedDigraph& g, std::span<const int> sigma) {
    check_spins(s, g);
    SpinState next = s;
    for (int k : sigma) {
        if (k < 0 || k >= s.size()) {
            throw ArgumentError("update subset vertex out of range");
        }
        double field = threshold(s, k);
        for (const auto& e : g.in_edges(k)) {
            field += e.weight * s.spins[static_cast<std::size_t>(e.from)];
        }
        if (field > 0.0) {
            next.spins[static_cast<std::size_t>(k)] = 1;
        } else if (field < 0.0) {
            next.spins[static_cast<std::size_t>(k)] = -1;
        }
    }
    return next;
}

SpinState hopfield_step(const SpinState& s, const WeightedDigraph& g) {
    std::vector<int> all(static_cast<std::size_t>(s.size()));
    for (int k = 0; k < s.size(); ++k) {
        all[static_cast<std::size_t>(k)] = k;
    }
    return hopfield_step(s, g, all);
}

double hopfield_energy(const SpinState& s, const WeightedDigraph& g) {
    check_spins(s, g);
    if (!is_undirected(g)) {
        throw ArgumentError("Hopfield energy requires an undirected graph");
    }
    double pair = 0.0;
    double bias = 0.0;
    for (int k = 0; k < s.size(); ++k) {
        const int xk = s.spins[static_cast<std::size_t>(k)];
        for (const auto& e : g.in_edges(k)) {
            pair += e.weight * s.spins[static_cast<std::size_t>(e.from)] * xk;
        }
        bias += xk * threshold(s, k);
    }
    return -0.5 * pair - bias;
}

}  // namespace circsync
