#include "circsync/gossip.hpp"

#include "circsync/parallel.hpp"
#include "circsync/rng.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

namespace circsync {

void GossipConfig::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ArgumentError("gossip beta must be positive");
    }
    if (variant == GossipVariant::Moderate && !(alpha > 0.0)) {
        throw ArgumentError("moderate gossip needs alpha > 0");
    }
    if (max_steps < 0) {
        throw ArgumentError("max_steps must be non-negative");
    }
    if (!(sync_tolerance > 0.0)) {
        throw ArgumentError("sync tolerance must be positive");
    }
}

SymbolState distinct_symbols(int n) {
    if (n < 1) {
        throw ArgumentError("need at least one agent");
    }
    SymbolState s;
    s.assignment.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        s.assignment[static_cast<std::size_t>(k)] = k;
    }
    return s;
}

int occupied_count(const SymbolState& s) {
    std::vector<int> copy = s.assignment;
    std::sort(copy.begin(), copy.end());
    return static_cast<int>(std::unique(copy.begin(), copy.end()) - copy.begin());
}

double gossip_uniform(std::uint64_t seed, std::uint64_t trial, std::uint64_t t, int k) {
    return to_unit(derive_key(seed, {trial, t, static_cast<std::uint64_t>(k)}));
}

std::vector<double> selection_probabilities(const WeightedDigraph& g, int k, double beta) {
    const auto in = g.in_edges(k);
    double d = 0.0;
    for (const auto& e : in) {
        d += e.weight;
    }
    const double total = beta + d;
    std::vector<double> p{beta / total};
    for (const auto& e : in) {
        p.push_back(e.weight / total);
    }
    return p;
}

int gossip_choice(const WeightedDigraph& g, int k, double beta, double u) {
    const auto in = g.in_edges(k);
    if (in.empty()) {
        return -1;
    }
    double d = 0.0;
    for (const auto& e : in) {
        d += e.weight;
    }
    double x = u * (beta + d);
    if (x < beta) {
        return -1;
    }
    x -= beta;
    double cum = 0.0;
    for (const auto& e : in) {
        cum += e.weight;
        if (x < cum) {
            return e.from;
        }
    }
    return in.back().from;
}

namespace {

void check_step(int n, const WeightedDigraph& g, const GossipConfig& cfg) {
    if (n != g.size()) {
        throw ArgumentError("state and graph sizes differ");
    }
    cfg.validate();
}

int occupied_angles(const CircleSwarm& s) {
    std::vector<double> v(s.angles().data(), s.angles().data() + s.size());
    std::sort(v.begin(), v.end());
    return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace

SymbolState gossip_step(const SymbolState& s, const WeightedDigraph& g, const GossipConfig& cfg,
                        std::uint64_t trial, std::uint64_t t) {
    check_step(s.size(), g, cfg);
    if (cfg.variant != GossipVariant::Jump) {
        throw ArgumentError("symbol states support the jump variant only");
    }
    SymbolState next = s;
    for (int k = 0; k < s.size(); ++k) {
        const int j = gossip_choice(g, k, cfg.beta, gossip_uniform(cfg.seed, trial, t, k));
        if (j >= 0) {
            next.assignment[static_cast<std::size_t>(k)] = s.assignment[static_cast<std::size_t>(j)];
        }
    }
    return next;
}

CircleSwarm gossip_step(const CircleSwarm& s, const WeightedDigraph& g, const GossipConfig& cfg,
                        std::uint64_t trial, std::uint64_t t) {
    check_step(s.size(), g, cfg);
    Vector next = s.angles();
    for (int k = 0; k < s.size(); ++k) {
        const int j = gossip_choice(g, k, cfg.beta, gossip_uniform(cfg.seed, trial, t, k));
        if (j < 0) {
            continue;
        }
        if (cfg.variant == GossipVariant::Jump) {
            next[k] = s[j];
        } else {
            const double re = cfg.alpha * std::cos(s[k]) + std::cos(s[j]);
            const double im = cfg.alpha * std::sin(s[k]) + std::sin(s[j]);
            if (re != 0.0 || im != 0.0) {
                next[k] = std::atan2(im, re);
            }
        }
    }
    return CircleSwarm(std::move(next));
}

GossipRun<SymbolState> run_until_sync(const SymbolState& s0, const GraphSequence& schedule, const GossipConfig& cfg,
                                      std::uint64_t trial) {
    if (s0.size() != schedule.vertex_count()) {
        throw ArgumentError("state size does not match the schedule");
    }
    cfg.validate();
    GossipRun<SymbolState> run;
    run.final_state = s0;
    for (long t = 0;; ++t) {
        const int occupied = occupied_count(run.final_state);
        if (occupied == 1) {
            run.synchronized = true;
            run.steps = t;
            return run;
        }
        if (t >= cfg.max_steps) {
            run.steps = t;
            return run;
        }
        if (occupied == 2) {
            ++run.steps_at_two;
        }
        run.final_state = gossip_step(run.final_state, schedule.at_step(t), cfg, trial, static_cast<std::uint64_t>(t));
    }
}

GossipRun<CircleSwarm> run_until_sync(const CircleSwarm& s0, const GraphSequence& schedule, const GossipConfig& cfg,
                                      std::uint64_t trial) {
    if (s0.size() != schedule.vertex_count()) {
        throw ArgumentError("state size does not match the schedule");
    }
    cfg.validate();
    GossipRun<CircleSwarm> run;
    run.final_state = s0;
    const bool jump = cfg.variant == GossipVariant::Jump;
    for (long t = 0;; ++t) {
        const int occupied = occupied_angles(run.final_state);
        const bool done = jump ? occupied == 1 : max_pairwise_arc_distance(run.final_state) < cfg.sync_tolerance;
        if (done) {
            run.synchronized = true;
            run.steps = t;
            return run;
        }
        if (t >= cfg.max_steps) {
            run.steps = t;
            return run;
        }
        if (occupied == 2) {
            ++run.steps_at_two;
        }
        run.final_state = gossip_step(run.final_state, schedule.at_step(t), cfg, trial, static_cast<std::uint64_t>(t));
    }
}

// ---------------------------------------------------------------------------
// Absorbing chain

SymbolState AbsorbingChain::decode(std::size_t index) const {
    SymbolState s;
    s.assignment.resize(static_cast<std::size_t>(n));
    std::uint64_t code = states.at(index);
    for (int k = 0; k < n; ++k) {
        s.assignment[static_cast<std::size_t>(k)] = static_cast<int>(code % static_cast<std::uint64_t>(n_symbols));
        code /= static_cast<std::uint64_t>(n_symbols);
    }
    return s;
}

AbsorbingChain build_absorbing_chain(const WeightedDigraph& g, const GossipConfig& cfg, int n_symbols) {
    cfg.validate();
    if (cfg.variant != GossipVariant::Jump) {
        throw ArgumentError("the exact chain is built for the jump variant only");
    }
    const int n = g.size();
    if (n_symbols < n) {
        throw ArgumentError("n_symbols must be at least N so the start can be all-distinct");
    }
    double capacity = 1.0;
    for (int k = 0; k < n; ++k) {
        capacity *= n_symbols;
        if (capacity > 1e6) {
            throw CapacityError("chain would enumerate " + std::to_string(n_symbols) + "^" + std::to_string(n) +
                                " assignments (limit 1e6); use monte_carlo_sync_time instead");
        }
    }

    AbsorbingChain chain;
    chain.n = n;
    chain.n_symbols = n_symbols;
    const auto base = static_cast<std::uint64_t>(n_symbols);
    std::vector<std::uint64_t> pow(static_cast<std::size_t>(n) + 1, 1);
    for (int k = 1; k <= n; ++k) {
        pow[static_cast<std::size_t>(k)] = pow[static_cast<std::size_t>(k - 1)] * base;
    }
    auto symbol_of = [&](std::uint64_t code, int k) {
        return static_cast<int>((code / pow[static_cast<std::size_t>(k)]) % base);
    };

    // Per-agent outcome distributions depend on the state only through the
    // neighbors' symbols, so they are rebuilt per state.
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<Eigen::Triplet<double>> triplets;
    std::uint64_t start = 0;
    for (int k = 0; k < n; ++k) {
        start += static_cast<std::uint64_t>(k) * pow[static_cast<std::size_t>(k)];
    }
    chain.states.push_back(start);
    index.emplace(start, 0);
    for (std::size_t cur = 0; cur < chain.states.size(); ++cur) {
        const std::uint64_t code = chain.states[cur];
        bool single = true;
        for (int k = 1; k < n && single; ++k) {
            single = symbol_of(code, k) == symbol_of(code, 0);
        }
        chain.absorbing.push_back(single);
        if (single) {
            triplets.emplace_back(static_cast<int>(cur), static_cast<int>(cur), 1.0);
            continue;
        }
        std::map<std::uint64_t, double> dist{{0, 1.0}};
        for (int k = 0; k < n; ++k) {
            std::map<int, double> outcome;
            const auto probs = selection_probabilities(g, k, cfg.beta);
            outcome[symbol_of(code, k)] += probs[0];
            const auto in = g.in_edges(k);
            for (std::size_t e = 0; e < in.size(); ++e) {
                outcome[symbol_of(code, in[e].from)] += probs[e + 1];
            }
            std::map<std::uint64_t, double> next;
            for (const auto& [partial, p] : dist) {
                for (const auto& [sym, q] : outcome) {
                    next[partial + static_cast<std::uint64_t>(sym) * pow[static_cast<std::size_t>(k)]] += p * q;
                }
            }
            dist = std::move(next);
        }
        for (const auto& [target, p] : dist) {
            auto [it, inserted] = index.emplace(target, chain.states.size());
            if (inserted) {
                chain.states.push_back(target);
            }
            triplets.emplace_back(static_cast<int>(cur), static_cast<int>(it->second), p);
        }
    }
    const auto m = static_cast<Eigen::Index>(chain.states.size());
    chain.transition.resize(m, m);
    chain.transition.setFromTriplets(triplets.begin(), triplets.end());
    return chain;
}

double expected_sync_time(const AbsorbingChain& chain) {
    if (chain.absorbing.empty() || chain.absorbing[0]) {
        return 0.0;
    }
    std::vector<int> transient_index(chain.states.size(), -1);
    int m = 0;
    for (std::size_t i = 0; i < chain.states.size(); ++i) {
        if (!chain.absorbing[i]) {
            transient_index[i] = m++;
        }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (int i = 0; i < m; ++i) {
        triplets.emplace_back(i, i, 1.0);
    }
    for (Eigen::Index row = 0; row < chain.transition.outerSize(); ++row) {
        const int r = transient_index[static_cast<std::size_t>(row)];
        if (r < 0) {
            continue;
        }
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.transition, row); it; ++it) {
            const int c = transient_index[static_cast<std::size_t>(it.col())];
            if (c >= 0) {
                triplets.emplace_back(r, c, -it.value());
            }
        }
    }
    // Absorption is certain iff every state can reach an absorbing one; search
    // backwards from the absorbing set. LU alone does not reliably flag this.
    const std::size_t total = chain.states.size();
    std::vector<std::vector<std::size_t>> predecessors(total);
    for (Eigen::Index row = 0; row < chain.transition.outerSize(); ++row) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.transition, row); it; ++it) {
            if (it.value() > 0.0) {
                predecessors[static_cast<std::size_t>(it.col())].push_back(static_cast<std::size_t>(row));
            }
        }
    }
    std::vector<bool> drains(total, false);
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < total; ++i) {
        if (chain.absorbing[i]) {
            drains[i] = true;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        const std::size_t v = queue.back();
        queue.pop_back();
        for (std::size_t p : predecessors[v]) {
            if (!drains[p]) {
                drains[p] = true;
                queue.push_back(p);
            }
        }
    }
    if (std::find(drains.begin(), drains.end(), false) != drains.end()) {
        throw PreconditionError("synchronization is not certain on this graph: some reachable assignment can never "
                                "become single-symbol");
    }

    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw PreconditionError("synchronization is not certain on this graph (singular fundamental matrix)");
    }
    const Vector t = lu.solve(Vector::Ones(m));
    if (lu.info() != Eigen::Success || !t.allFinite()) {
        throw PreconditionError("synchronization is not certain on this graph");
    }
    return t[transient_index[0]];
}

double expected_sync_time(const WeightedDigraph& g, const GossipConfig& cfg, int n_symbols) {
    if (g.size() == 1) {
        return 0.0;
    }
    return expected_sync_time(build_absorbing_chain(g, cfg, n_symbols));
}

// ---------------------------------------------------------------------------
// Monte Carlo

MonteCarloResult monte_carlo_sync_time(const GraphSequence& schedule, const GossipConfig& cfg, long trials,
                                       unsigned threads, int histogram_bins) {
    if (trials < 1) {
        throw ArgumentError("trials must be >= 1");
    }
    if (histogram_bins < 1) {
        throw ArgumentError("histogram needs at least one bin");
    }
    cfg.validate();
    const int n = schedule.vertex_count();
    std::vector<long> steps(static_cast<std::size_t>(trials));
    std::vector<char> stalled(static_cast<std::size_t>(trials), 0);
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t i) {
        const auto trial = static_cast<std::uint64_t>(i);
        long taken = 0;
        long at_two = 0;
        bool ok = false;
        if (cfg.variant == GossipVariant::Jump) {
            const auto run = run_until_sync(distinct_symbols(n), schedule, cfg, trial);
            taken = run.steps;
            at_two = run.steps_at_two;
            ok = run.synchronized;
        } else {
            Rng rng = Rng::substream(cfg.seed, {trial, 0x616e676c6573ULL});
            Vector th(n);
            for (int k = 0; k < n; ++k) {
                th[k] = rng.uniform(-kPi, kPi);
            }
            const auto run = run_until_sync(CircleSwarm(th), schedule, cfg, trial);
            taken = run.steps;
            at_two = run.steps_at_two;
            ok = run.synchronized;
        }
        steps[i] = ok ? taken : -1;
        stalled[i] = (taken > 0 && 2 * at_two > taken) ? 1 : 0;
    });

    MonteCarloResult r;
    r.trials = trials;
    r.steps = steps;
    double sum = 0.0;
    long max_steps = 0;
    long stall_count = 0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        stall_count += stalled[i];
        if (steps[i] < 0) {
            continue;
        }
        ++r.synchronized;
        sum += static_cast<double>(steps[i]);
        max_steps = std::max(max_steps, steps[i]);
    }
    r.stall_fraction = static_cast<double>(stall_count) / static_cast<double>(trials);
    if (r.synchronized > 0) {
        r.mean = sum / static_cast<double>(r.synchronized);
        double ss = 0.0;
        for (long s : steps) {
            if (s >= 0) {
                ss += (static_cast<double>(s) - r.mean) * (static_cast<double>(s) - r.mean);
            }
        }
        if (r.synchronized > 1) {
            const double var = ss / static_cast<double>(r.synchronized - 1);
            r.standard_error = std::sqrt(var / static_cast<double>(r.synchronized));
        }
    }
    r.bin_width = std::max(1.0, std::ceil(static_cast<double>(max_steps + 1) / histogram_bins));
    r.histogram.assign(static_cast<std::size_t>(histogram_bins), 0);
    for (long s : steps) {
        if (s >= 0) {
            const auto bin = std::min<std::size_t>(static_cast<std::size_t>(static_cast<double>(s) / r.bin_width),
                                                   r.histogram.size() - 1);
            ++r.histogram[bin];
        }
    }
    return r;
}

nlohmann::json to_json(const MonteCarloResult& r) {
    nlohmann::json j;
    j["trials"] = r.trials;
    j["synchronized"] = r.synchronized;
    j["timeouts"] = r.trials - r.synchronized;
    j["mean"] = r.mean;
    j["standard_error"] = r.standard_error;
    j["stall_fraction"] = r.stall_fraction;
    j["histogram"] = {{"bin_width", r.bin_width}, {"counts", r.histogram}};
    return j;
}

std::string per_trial_csv(const MonteCarloResult& r) {
    std::ostringstream out;
    out << "trial,steps\n";
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        out << i << ',' << r.steps[i] << '\n';
    }
    return out.str();
}

}  // namespace circsync
