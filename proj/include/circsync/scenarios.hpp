#pragma once

#include "circsync/circle.hpp"

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace circsync {

// ---------------------------------------------------------------------------
// Vicsek flocking

struct VicsekState {
    /// Row k is r_k.
    Matrix positions;
    CircleSwarm headings;
    /// Sensing radius R.
    double radius = 1.0;

    int size() const noexcept { return headings.size(); }
};

/// a_jk = 1 iff ‖r_k − r_j‖ ≤ R, j ≠ k.
WeightedDigraph proximity_graph(const VicsekState& s);

/// Headings: dt_step with β = 1 on the time-t proximity graph. Positions:
/// r_k ← r_k + e^{iθ_k(t)} with the old headings.
VicsekState vicsek_step(const VicsekState& s);

/// Ring radii for which each agent senses exactly its two ring neighbors:
/// (R / (2 sin(2π/N)), R / (2 sin(π/N))].
std::pair<double, double> divergence_radius_interval(int n, double sensing_radius = 1.0);

/// N agents evenly spaced on a ring of the given radius, headings pointing
/// radially outward. Throws ArgumentError for N < 5 or a radius outside the
/// feasible interval (the message states the interval).
VicsekState vicsek_divergence_setup(int n, double ring_radius, double sensing_radius = 1.0);

// ---------------------------------------------------------------------------
// Named continuous-time setups

struct Scenario {
    std::string name;
    GraphSequence schedule;
    CircleSwarm initial;
    CouplingProfile profile;
    double alpha;
    /// Suggested integration horizon.
    double t_end;
    /// Agent index sets of the construction (rings, sets A/B, driven agent).
    std::vector<std::vector<int>> groups;
};

using ScenarioParams = std::map<std::string, double>;

/// Kinds: splay_ring, cyclic_pursuit, two_ring_periodic,
/// quasiperiodic_three_sets, disorderly_agent, direction_reversal.
/// Unknown kinds or parameters and invalid values throw ArgumentError.
Scenario make_scenario(const std::string& kind, const ScenarioParams& params = {});

/// Registered kinds with their default parameters.
const std::map<std::string, ScenarioParams>& scenario_registry();

// ---------------------------------------------------------------------------
// Hopfield network on {−1, +1}

struct SpinState {
    std::vector<int> spins;
    std::vector<double> thresholds;

    int size() const noexcept { return static_cast<int>(spins.size()); }
    bool operator==(const SpinState&) const = default;
};

/// For k in σ: x_k ← sign(Σ_j a_jk x_j + ξ_k); a zero argument keeps x_k.
SpinState hopfield_step(const SpinState& s, const WeightedDigraph& g, std::span<const int> sigma);
/// Synchronous update of every spin.
SpinState hopfield_step(const SpinState& s, const WeightedDigraph& g);

/// V_H = −½ Σ_k Σ_j a_jk x_j x_k − Σ_k x_k ξ_k. Requires an undirected graph.
double hopfield_energy(const SpinState& s, const WeightedDigraph& g);

}  // namespace circsync
