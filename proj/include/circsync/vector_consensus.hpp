#pragma once

#include "circsync/graph.hpp"
#include "circsync/rk4.hpp"
#include "circsync/trajectory.hpp"

#include <string>
#include <vector>

namespace circsync {

/// N agents with states in R^n; row k of `x` is agent k.
struct VectorSwarm {
    Matrix x;

    VectorSwarm() = default;
    explicit VectorSwarm(Matrix points);

    int size() const noexcept { return static_cast<int>(x.rows()); }
    int dim() const noexcept { return static_cast<int>(x.cols()); }
};

struct ConsensusParams {
    double alpha = 1.0;
    /// Discrete-time contraction bound b: α·d_in(k) ≤ b < 1 at every step.
    double bound = 0.9;

    void validate() const;
};

/// Velocity α Σ_j a_jk (x_j − x_k) of every agent.
Matrix ct_rhs(const VectorSwarm& s, const WeightedDigraph& g, const ConsensusParams& p);

/// x_k ← x_k + α Σ_j a_jk (x_j − x_k). Throws PreconditionError naming the
/// first vertex with α·d_in(k) > b.
VectorSwarm dt_step(const VectorSwarm& s, const WeightedDigraph& g, const ConsensusParams& p);

/// ½ Σ_k Σ_j a_jk ‖x_j − x_k‖². Appends a warning to `diag` for directed graphs.
double disagreement_cost(const VectorSwarm& s, const WeightedDigraph& g, Diagnostics* diag = nullptr);

enum class TimeMode { Continuous, Discrete };

struct VectorSimOptions {
    TimeMode mode = TimeMode::Continuous;
    /// Continuous mode: RK4 settings.
    StepOptions rk4{};
    /// Discrete mode: number of updates and emission stride.
    long steps = 100;
    int sample_every = 1;
};

/// Runs linear consensus over a schedule. Discrete mode uses graph G(t) at step t.
Trajectory<VectorSwarm> simulate(const VectorSwarm& x0, const GraphSequence& schedule,
                                 const ConsensusParams& p, const VectorSimOptions& opt);

Eigen::RowVectorXd mean(const VectorSwarm& s);
double max_pairwise_distance(const VectorSwarm& s);

struct DecayFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least-squares line through (t, log v) over the second half of the samples.
/// Non-positive values are skipped. Throws ArgumentError with fewer than 2 usable points.
DecayFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& v);
DecayFit fit_log_decay(const Trajectory<VectorSwarm>& traj);

/// CSV with header `t,x_1_1,...,x_N_n`.
std::string to_csv(const Trajectory<VectorSwarm>& traj);

namespace detail {
/// Flat consensus right-hand side on agent-major storage y[k·dim + c].
void consensus_rhs_flat(const WeightedDigraph& g, double alpha, int dim, const double* y, double* dy);
}  // namespace detail

}  // namespace circsync
