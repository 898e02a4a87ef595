#pragma once

#include "circsync/circle.hpp"

#include <Eigen/SparseCore>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace circsync {

enum class GossipVariant { Jump, Moderate };

struct GossipConfig {
    /// Weight of choosing no agent.
    double beta = 1.0;
    GossipVariant variant = GossipVariant::Jump;
    /// Moderate variant: new angle arg(α e^{iθ_k} + e^{iθ_j}).
    double alpha = 1.0;
    std::uint64_t seed = 0;
    long max_steps = 100000;
    /// Moderate variant: synchronized once the max pairwise arc distance drops below this.
    double sync_tolerance = 1e-6;

    void validate() const;
};

/// Vertex → symbol assignment. Symbols are abstract positions; only equality matters.
struct SymbolState {
    std::vector<int> assignment;

    int size() const noexcept { return static_cast<int>(assignment.size()); }
    bool operator==(const SymbolState&) const = default;
};

/// Vertex k holds symbol k.
SymbolState distinct_symbols(int n);
/// Number of distinct symbols in use.
int occupied_count(const SymbolState& s);

/// Uniform draw of agent k at step t of a trial:
/// to_unit(derive_key(seed, {trial, t, k})).
double gossip_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t t, int k);

/// Probability of staying followed by one probability per in-edge of k
/// (in in_edges order): β/(β+d) and a_jk/(β+d).
std::vector<double> selection_probabilities(const WeightedDigraph& g, int k, double beta);

/// Agent k's choice for draw u in [0, 1): −1 to stay, otherwise the chosen in-neighbor.
int gossip_choice(const WeightedDigraph& g, int k, double beta, double u);

/// One simultaneous update: every agent reads time-t positions.
SymbolState gossip_step(const SymbolState& s, const WeightedDigraph& g, const GossipConfig& cfg,
                        std::uint64_t trial, std::uint64_t t);
CircleSwarm gossip_step(const CircleSwarm& s, const WeightedDigraph& g, const GossipConfig& cfg,
                        std::uint64_t trial, std::uint64_t t);

template <class State>
struct GossipRun {
    bool synchronized = false;
    /// Steps taken (max_steps on timeout).
    long steps = 0;
    State final_state;
    /// Steps t in [0, steps) at which exactly two positions were occupied.
    long steps_at_two = 0;
};

/// Runs until every agent holds the same symbol (jump) or the arc spread is
/// below the tolerance (moderate, angles only), or until max_steps.
GossipRun<SymbolState> run_until_sync(const SymbolState& s0, const GraphSequence& schedule, const GossipConfig& cfg,
                                      std::uint64_t trial = 0);
GossipRun<CircleSwarm> run_until_sync(const CircleSwarm& s0, const GraphSequence& schedule, const GossipConfig& cfg,
                                      std::uint64_t trial = 0);

/// Jump-variant Markov chain over vertex → symbol assignments reachable from
/// the all-distinct start.
struct AbsorbingChain {
    int n = 0;
    int n_symbols = 0;
    /// Base-n_symbols codes of the enumerated assignments; index 0 is the start.
    std::vector<std::uint64_t> states;
    Eigen::SparseMatrix<double, Eigen::RowMajor> transition;
    std::vector<bool> absorbing;

    SymbolState decode(std::size_t index) const;
};

/// Throws CapacityError when n_symbols^N exceeds 10^6 and ArgumentError when
/// n_symbols < N or the variant is not Jump.
AbsorbingChain build_absorbing_chain(const WeightedDigraph& g, const GossipConfig& cfg, int n_symbols);

/// Expected absorption time from the all-distinct start, from (I − Q) t = 1.
/// Throws PreconditionError when absorption is not certain.
double expected_sync_time(const AbsorbingChain& chain);
double expected_sync_time(const WeightedDigraph& g, const GossipConfig& cfg, int n_symbols);

struct MonteCarloResult {
    long trials = 0;
    long synchronized = 0;
    /// Mean and standard error of the step count over synchronized trials.
    double mean = 0.0;
    double standard_error = 0.0;
    double bin_width = 1.0;
    /// counts[i] = trials with steps in [i·bin_width, (i+1)·bin_width).
    std::vector<long> histogram;
    /// Fraction of trials with exactly two occupied positions for more than half the run.
    double stall_fraction = 0.0;
    /// Steps per trial, −1 on timeout.
    std::vector<long> steps;
};

/// Independent trials from the all-distinct start (jump) or from uniform random
/// angles drawn from substream (seed, trial) (moderate). Per-trial results
/// depend only on (seed, trial index), never on the thread count.
MonteCarloResult monte_carlo_sync_time(const GraphSequence& schedule, const GossipConfig& cfg, long trials,
                                       unsigned threads = 0, int histogram_bins = 20);

nlohmann::json to_json(const MonteCarloResult& r);
/// `trial,steps`.
std::string per_trial_csv(const MonteCarloResult& r);

}  // namespace circsync
