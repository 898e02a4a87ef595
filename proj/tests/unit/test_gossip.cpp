#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "circsync/gossip.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>

#include <map>

using namespace circsync;

namespace {

/// Expected absorption time computed from scratch: enumerate every assignment
/// in {0..n-1}^n, build the full transition matrix from the per-agent choice
/// distribution, and solve the dense system on the transient block.
double dense_chain_oracle(const WeightedDigraph& g, double beta) {
    const int n = g.size();
    long total = 1;
    for (int i = 0; i < n; ++i) total *= n;
    const auto decode = [&](long code) {
        std::vector<int> a(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            a[static_cast<std::size_t>(k)] = static_cast<int>(code % n);
            code /= n;
        }
        return a;
    };
    const auto encode = [&](const std::vector<int>& a) {
        long code = 0;
        for (int k = n - 1; k >= 0; --k) code = code * n + a[static_cast<std::size_t>(k)];
        return code;
    };
    const auto absorbing = [](const std::vector<int>& a) {
        return std::all_of(a.begin(), a.end(), [&](int x) { return x == a.front(); });
    };
    std::map<long, int> index;
    for (long c = 0; c < total; ++c)
        if (!absorbing(decode(c))) index.emplace(c, static_cast<int>(index.size()));
    const int m = static_cast<int>(index.size());
    Matrix q = Matrix::Zero(m, m);
    for (const auto& [code, row] : index) {
        const auto a = decode(code);
        // Enumerate joint choices: each agent picks "stay" (−1) or one in-neighbour.
        std::vector<std::vector<std::pair<int, double>>> options(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            double d = 0.0;
            for (int j = 0; j < n; ++j) d += g.weight(j, k);
            options[static_cast<std::size_t>(k)].push_back({-1, beta / (beta + d)});
            for (int j = 0; j < n; ++j)
                if (g.weight(j, k) > 0) options[static_cast<std::size_t>(k)].push_back({j, g.weight(j, k) / (beta + d)});
        }
        std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
        while (true) {
            double p = 1.0;
            std::vector<int> next = a;
            for (int k = 0; k < n; ++k) {
                const auto& [j, pj] = options[static_cast<std::size_t>(k)][pick[static_cast<std::size_t>(k)]];
                p *= pj;
                if (j >= 0) next[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(j)];
            }
            auto it = index.find(encode(next));
            if (it != index.end()) q(row, it->second) += p;
            int k = 0;
            while (k < n && ++pick[static_cast<std::size_t>(k)] == options[static_cast<std::size_t>(k)].size()) {
                pick[static_cast<std::size_t>(k)] = 0;
                ++k;
            }
            if (k == n) break;
        }
    }
    std::vector<int> start(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) start[static_cast<std::size_t>(k)] = k;
    const Vector t = (Matrix::Identity(m, m) - q).fullPivLu().solve(Vector::Ones(m));
    return t[index.at(encode(start))];
}

GossipConfig config(std::uint64_t seed, double beta = 1.0) {
    GossipConfig c;
    c.seed = seed;
    c.beta = beta;
    return c;
}

}  // namespace

TEST_CASE("selection probabilities") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const auto g = oracle::random_digraph(rng, 2 + i % 6, 0.5, false, false);
        const double beta = 0.1 + 0.05 * i;
        for (int k = 0; k < g.size(); ++k) {
            const auto p = selection_probabilities(g, k, beta);
            double sum = 0.0;
            for (double x : p) sum += x;
            CHECK(std::abs(sum - 1.0) < 1e-15);
            CHECK(p.front() == doctest::Approx(beta / (beta + in_degree(g, k))));
        }
    }
    // Choice thresholds follow the cumulative distribution.
    const auto g = complete_graph(2);
    CHECK(gossip_choice(g, 0, 1.0, 0.25) == -1);
    CHECK(gossip_choice(g, 0, 1.0, 0.75) == 1);
}

TEST_CASE("single steps") {
    const auto g = complete_graph(4);
    const auto cfg = config(3);
    SymbolState same{{2, 2, 2, 2}};
    for (std::uint64_t t = 0; t < 20; ++t) CHECK(gossip_step(same, g, cfg, 0, t) == same);

    // Vertex 3 has no in-edges.
    const Edge e[] = {{0, 1}, {1, 0}, {2, 1}};
    const auto h = WeightedDigraph::from_edges(4, e);
    SymbolState s = distinct_symbols(4);
    for (std::uint64_t t = 0; t < 200; ++t) {
        s = gossip_step(s, h, cfg, 0, t);
        CHECK(s.assignment[3] == 3);
    }

    // N = 2 complete, β = 1: the four joint choices are equally likely and two synchronize.
    long synced = 0;
    const long draws = 200000;
    const auto two = distinct_symbols(2);
    for (long t = 0; t < draws; ++t)
        synced += occupied_count(gossip_step(two, complete_graph(2), cfg, 1, static_cast<std::uint64_t>(t))) == 1;
    CHECK(std::abs(static_cast<double>(synced) / draws - 0.5) < 0.005);
}

TEST_CASE("occupied symbols never grow") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const auto g = oracle::random_digraph(rng, 3 + i % 6, 0.4, false, false);
        const auto cfg = config(100 + static_cast<std::uint64_t>(i), 0.5);
        SymbolState s = distinct_symbols(g.size());
        for (std::uint64_t t = 0; t < 200; ++t) {
            const auto next = gossip_step(s, g, cfg, 0, t);
            for (int x : next.assignment) CHECK(std::find(s.assignment.begin(), s.assignment.end(), x) != s.assignment.end());
            s = next;
        }
    }
}

TEST_CASE("label and manifold invariance") {
    const auto g = ring_directed(6);
    const auto seq = GraphSequence::constant(g);
    const auto cfg = config(77);
    const std::vector<int> perm{4, 0, 5, 2, 1, 3};
    const std::vector<double> pos{0.1, 2.0, -1.3, 0.7, 3.0, -2.5};
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        SymbolState a = distinct_symbols(6);
        SymbolState b{perm};
        Vector th(6);
        for (int k = 0; k < 6; ++k) th[k] = pos[static_cast<std::size_t>(k)];
        CircleSwarm c(th);
        for (std::uint64_t t = 0; t < 40; ++t) {
            a = gossip_step(a, g, cfg, trial, t);
            b = gossip_step(b, g, cfg, trial, t);
            c = gossip_step(c, g, cfg, trial, t);
            for (int k = 0; k < 6; ++k) {
                const int sym = a.assignment[static_cast<std::size_t>(k)];
                CHECK(b.assignment[static_cast<std::size_t>(k)] == perm[static_cast<std::size_t>(sym)]);
                CHECK(c[k] == wrap(pos[static_cast<std::size_t>(sym)]));
            }
        }
        const auto ra = run_until_sync(distinct_symbols(6), seq, cfg, trial);
        const auto rc = run_until_sync(CircleSwarm(th), seq, cfg, trial);
        CHECK(ra.steps == rc.steps);
    }
}

TEST_CASE("moderate variant is rotation-equivariant") {
    GossipConfig cfg = config(5);
    cfg.variant = GossipVariant::Moderate;
    const auto g = complete_graph(5);
    CircleSwarm a{0.1, 1.0, -2.0, 2.5, -0.4};
    CircleSwarm b = a.rotated(1.234);
    for (std::uint64_t t = 0; t < 100; ++t) {
        a = gossip_step(a, g, cfg, 0, t);
        b = gossip_step(b, g, cfg, 0, t);
        for (int k = 0; k < 5; ++k) CHECK(oracle::arc(b[k], a[k] + 1.234) < 1e-12);
    }
    const auto run = run_until_sync(CircleSwarm{0.1, 1.0, -2.0, 2.5, -0.4}, GraphSequence::constant(g), cfg);
    CHECK(run.synchronized);
    CHECK(max_pairwise_arc_distance(run.final_state) < cfg.sync_tolerance);
}

TEST_CASE("runs until synchronization") {
    const auto cfg = config(9);
    const auto r0 = run_until_sync(SymbolState{{1, 1, 1}}, GraphSequence::constant(complete_graph(3)), cfg);
    CHECK(r0.synchronized);
    CHECK(r0.steps == 0);

    GossipConfig tight = cfg;
    tight.max_steps = 5;
    const auto never = run_until_sync(distinct_symbols(3), GraphSequence::constant(WeightedDigraph(3)), tight);
    CHECK_FALSE(never.synchronized);
    CHECK(never.steps == 5);

    const auto a = run_until_sync(distinct_symbols(5), GraphSequence::constant(complete_graph(5)), cfg, 17);
    const auto b = run_until_sync(distinct_symbols(5), GraphSequence::constant(complete_graph(5)), cfg, 17);
    CHECK(a.steps == b.steps);
    CHECK(a.final_state == b.final_state);
}

TEST_CASE("absorbing chain") {
    const auto cfg = config(0);
    CHECK(expected_sync_time(complete_graph(2), cfg, 2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(expected_sync_time(WeightedDigraph(1), cfg, 1) == 0.0);

    const auto chain = build_absorbing_chain(ring_directed(3), cfg, 3);
    for (Eigen::Index r = 0; r < chain.transition.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(chain.transition, r); it; ++it) sum += it.value();
        CHECK(std::abs(sum - 1.0) < 1e-12);
        if (chain.absorbing[static_cast<std::size_t>(r)]) CHECK(chain.transition.coeff(r, r) == 1.0);
    }

    for (const auto& g : {ring_directed(3), complete_graph(3), ring_directed(4), path_graph(4)}) {
        for (double beta : {0.5, 1.0, 2.0}) {
            const double exact = expected_sync_time(g, config(0, beta), g.size());
            CHECK(exact == doctest::Approx(dense_chain_oracle(g, beta)).epsilon(1e-10));
        }
    }
    // Extra unused symbols do not change the answer.
    CHECK(expected_sync_time(ring_directed(3), cfg, 5) ==
          doctest::Approx(expected_sync_time(ring_directed(3), cfg, 3)).epsilon(1e-12));

    CHECK_THROWS_AS(build_absorbing_chain(complete_graph(8), cfg, 8), CapacityError);
    CHECK_THROWS_AS(build_absorbing_chain(complete_graph(3), cfg, 2), ArgumentError);
    const Edge e[] = {{0, 1}, {2, 1}};
    CHECK_THROWS_AS(expected_sync_time(WeightedDigraph::from_edges(3, e), cfg, 3), PreconditionError);
}

TEST_CASE("monte carlo statistics") {
    const auto seq = GraphSequence::constant(complete_graph(2));
    const auto r = monte_carlo_sync_time(seq, config(2024), 20000, 2);
    CHECK(r.synchronized == r.trials);
    CHECK(std::abs(r.mean - 2.0) < 0.05);
    CHECK(r.standard_error > 0.0);
    long binned = 0;
    for (long c : r.histogram) binned += c;
    CHECK(binned == r.synchronized);

    const auto one = monte_carlo_sync_time(seq, config(7), 1, 1);
    const auto again = monte_carlo_sync_time(seq, config(7), 1, 1);
    CHECK(one.steps == again.steps);

    // Thread count never changes the per-trial results.
    const auto ring = GraphSequence::constant(ring_directed(5));
    CHECK(monte_carlo_sync_time(ring, config(8), 300, 1).steps == monte_carlo_sync_time(ring, config(8), 300, 3).steps);

    const auto k8 = monte_carlo_sync_time(GraphSequence::constant(complete_graph(8)), config(11), 500, 1);
    CHECK(k8.stall_fraction > 0.0);

    CHECK(per_trial_csv(one).rfind("trial,steps\n0,", 0) == 0);
    const auto j = to_json(r);
    CHECK(j.at("trials") == 20000);
}
