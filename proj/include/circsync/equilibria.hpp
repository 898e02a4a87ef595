#pragma once

#include "circsync/circle.hpp"

#include <json.hpp>

#include <span>
#include <string>
#include <vector>

namespace circsync {

enum class Stability { Stable, Unstable, Marginal };

const char* to_string(Stability s);

struct EquilibriumReport {
    CircleSwarm state;
    double gradient_norm = 0.0;
    /// Hessian eigenvalues in ascending order.
    std::vector<double> eigenvalues;
    Stability classification = Stability::Marginal;
    /// False when the search did not reach the gradient tolerance; the other
    /// fields then describe the last iterate.
    bool converged = true;
    int iterations = 0;
};

/// V = ½ Σ_k Σ_j a_jk P(θ_j − θ_k) for the profile's potential P.
double potential_energy(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile);
/// ∂V/∂θ_k = −½ Σ_j (a_jk + a_kj)·gain·f(θ_j − θ_k).
Vector gradient(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile);
/// Hessian of V: H_kj = −½ (a_jk + a_kj) P''(θ_j − θ_k) off the diagonal, zero row sums.
Matrix hessian(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile);
/// Hessian of V_circ; off-diagonal −(a_jk + a_kj) cos(θ_j − θ_k). Throws ArgumentError for directed graphs.
Matrix hessian_v_circ(const CircleSwarm& s, const WeightedDigraph& g);

/// Stable: one eigenvalue within tol of zero (the rotation mode) and all others
/// above tol. Unstable: some eigenvalue below −tol. Otherwise Marginal.
/// tol = 1e-8·(1 + max |λ|).
Stability classify_spectrum(const std::vector<double>& eigenvalues);
std::vector<double> symmetric_eigenvalues(const Matrix& m);

struct SplayState {
    int a;
    /// Spacing 2aπ/N wrapped to (−π, π].
    double theta0;
    CircleSwarm state;
    /// Stable iff |θ₀| < π/2, Unstable otherwise.
    Stability tag;
};

/// Uniform spacings θ₀ = 2aπ/N, a = 0..N−1, on the undirected ring.
std::vector<SplayState> enumerate_ring_splay_states(int n);

/// All ring critical points whose consecutive differences are θ₀ or π − θ₀
/// (N ≤ 8), classified numerically. Patterns with as many of each kind
/// (N = 2m) form continua and are skipped. Results start at θ_1 = 0 and are
/// deduplicated.
std::vector<EquilibriumReport> enumerate_ring_critical_points(int n);

struct SearchOptions {
    int max_iterations = 500;
    double gradient_tolerance = 1e-10;
    unsigned threads = 1;
};

/// Levenberg–Marquardt on ∇V = 0 from each seed; one report per seed, in seed order.
std::vector<EquilibriumReport> critical_point_search(const WeightedDigraph& g, const CouplingProfile& profile,
                                                     const std::vector<CircleSwarm>& seeds,
                                                     const SearchOptions& opt = {});

/// Gradient norm, spectrum and classification at a given state.
EquilibriumReport analyze_state(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile);

/// d_max(2/M* + 1) where (e^{M*} − 1)/M* = 1 + d_max/d_sum.
/// Requires an unweighted undirected graph with at least one edge.
double beta_bound(const WeightedDigraph& g);

/// No edge (in either direction) joins two members of `sigma`.
bool is_independent_set(const WeightedDigraph& g, std::span<const int> sigma);

/// V_circ(after) − V_circ(before) for a dt_step restricted to the independent
/// set σ, in closed form: −4 Σ_{k∈σ} (ρ_k + β) sin²(u_k/2), where
/// ρ_k e^{iu_k} = Σ_j a_jk e^{i(θ_j − θ_k)} + β. Requires an undirected graph.
double async_decrement(const CircleSwarm& s, const WeightedDigraph& g, double beta, std::span<const int> sigma);

/// Sequence of update subsets σ(t), repeated periodically.
struct UpdateSchedule {
    enum class Mode { Synchronous, LocallyAsynchronous };

    Mode mode = Mode::Synchronous;
    std::vector<std::vector<int>> subsets;
    /// Every vertex must appear in each window of this many consecutive steps.
    int horizon = 1;

    static UpdateSchedule synchronous(int n);
    /// One subset per greedy color class (in vertex order), cycled.
    static UpdateSchedule round_robin(const WeightedDigraph& g);

    const std::vector<int>& at(long t) const;
    /// Throws ArgumentError when a locally asynchronous subset is not independent
    /// or some vertex is missing from a window of `horizon` steps.
    void validate(const WeightedDigraph& g) const;
};

/// Weights making `s` an equilibrium of the sine law: each agent listens to
/// the agents within π/2 of it with weight 1, and the opposite-side neighbor
/// with the largest |sin| gets extra weight so the tangential pull cancels.
/// Requires N ≥ 5 and, for every agent, a neighbor strictly within π/2 on
/// each side; otherwise throws PreconditionError naming the vertex. The
/// returned graph's smallest positive weight is its δ.
WeightedDigraph stabilizing_weights(const CircleSwarm& s);

/// Jacobian of ct_rhs at `s`.
Matrix linearization(const CircleSwarm& s, const WeightedDigraph& g, double alpha, const CouplingProfile& profile);

struct LimitCycle {
    bool recurrent = false;
    /// Recurrence period in steps (1 means a fixed point).
    long period = 0;
    /// Step at which the recurring state was first visited.
    long entered_at = 0;
};

/// Iterates the synchronous discrete-time map and reports the first state that
/// comes back within `tol` (max per-agent arc distance) of an earlier one.
LimitCycle detect_limit_cycle(const CircleSwarm& s0, const WeightedDigraph& g, double beta, long max_steps = 1000,
                              double tol = 1e-9);

nlohmann::json to_json(const EquilibriumReport& r);

}  // namespace circsync
