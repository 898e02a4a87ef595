#pragma once

#include "circsync/circle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace circsync {

/// Angles plus one auxiliary point w_k in R² per agent (row k of `aux`).
struct AugmentedState {
    CircleSwarm angles;
    Matrix aux;
    /// Tracking gain K > 0.
    double gain = 5.0;

    int size() const noexcept { return angles.size(); }
};

/// Below this norm an auxiliary point has no usable direction.
inline constexpr double kDegenerateAuxNorm = 1e-9;

/// w_k = e^{iθ_k}; K defaults to 5α.
AugmentedState embed_angles(const CircleSwarm& s, double alpha, std::optional<double> gain = std::nullopt);

struct AuxVelocity {
    Vector dtheta;
    Matrix daux;
    /// Agents whose w_k was below kDegenerateAuxNorm (their dθ is 0).
    std::vector<bool> degenerate;
};

/// dw_k/dt = α Σ_j a_jk (w_j − w_k); dθ_k/dt = K sin(arg w_k − θ_k).
AuxVelocity aux_rhs(const AugmentedState& s, const WeightedDigraph& g, double alpha);

struct AuxRun {
    Trajectory<AugmentedState> trajectory;
    /// Per agent: degenerate tracking met at any right-hand-side evaluation.
    std::vector<bool> degenerate;

    bool any_degenerate() const;
};

/// RK4 on the coupled system; the aux block is integrated exactly as
/// vector consensus with n = 2 would integrate it.
AuxRun simulate_aux(const AugmentedState& s0, const GraphSequence& schedule, double alpha, const StepOptions& opt);

/// `t,theta_1..theta_N,w_1_x,w_1_y,...`.
std::string to_csv(const Trajectory<AugmentedState>& traj);

}  // namespace circsync
