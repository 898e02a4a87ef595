#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "circsync/equilibria.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

using namespace circsync;

namespace {

CircleSwarm random_circle(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-kPi, kPi);
    Vector th(n);
    for (int k = 0; k < n; ++k) th[k] = u(rng);
    return CircleSwarm(th);
}

std::vector<double> as_vec(const CircleSwarm& s) { return {s.angles().data(), s.angles().data() + s.size()}; }

/// Plain bisection on (e^M − 1)/M = 1 + d_max/d_sum.
double bound_oracle(double dmax, double dsum) {
    const double target = 1.0 + dmax / dsum;
    double lo = 1e-12;
    double hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((std::exp(mid) - 1.0) / mid < target ? lo : hi) = mid;
    }
    return dmax * (2.0 / lo + 1.0);
}

std::vector<int> random_independent_set(std::mt19937_64& rng, const WeightedDigraph& g) {
    std::vector<int> order(static_cast<std::size_t>(g.size()));
    for (int k = 0; k < g.size(); ++k) order[static_cast<std::size_t>(k)] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> set;
    for (int k : order) {
        bool free = rng() % 2 == 0;
        for (int j : set) free = free && !g.has_edge(j, k) && !g.has_edge(k, j);
        if (free) set.push_back(k);
    }
    std::sort(set.begin(), set.end());
    return set;
}

}  // namespace

TEST_CASE("hessian against finite differences") {
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const int n = 2 + i % 8;
        const auto g = oracle::random_digraph(rng, n, 0.6, true, false);
        const auto s = random_circle(rng, n);
        const Matrix h = hessian_v_circ(s, g);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const double step = 1e-4;
        const auto v = [&](int j, double dj, int k, double dk) {
            auto x = as_vec(s);
            x[static_cast<std::size_t>(j)] += dj;
            x[static_cast<std::size_t>(k)] += dk;
            return oracle::v_circ(x, g.weights());
        };
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const double fd = (v(j, step, k, step) - v(j, step, k, -step) - v(j, -step, k, step) +
                                   v(j, -step, k, -step)) /
                                  (4 * step * step);
                CHECK(std::abs(h(j, k) - fd) < 1e-5);
            }
        }
        CHECK((h * Vector::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Edge e[] = {{0, 1}};
    CHECK_THROWS_AS(hessian_v_circ(CircleSwarm{0.0, 1.0}, WeightedDigraph::from_edges(2, e)), ArgumentError);
}

TEST_CASE("hessian at synchronization is a multiple of the laplacian") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 50; ++i) {
        const int n = 2 + i % 8;
        const auto g = oracle::random_digraph(rng, n, 0.6, true, false);
        const Matrix h = hessian_v_circ(CircleSwarm(Vector::Constant(n, 0.7)), g);
        CHECK((h - 2.0 * laplacian(g)).cwiseAbs().maxCoeff() < 1e-12);
        for (double ev : symmetric_eigenvalues(h)) CHECK(ev >= -1e-9);
    }
}

TEST_CASE("ring splay states") {
    const auto count_stable_nonzero = [](int n) {
        int c = 0;
        for (const auto& s : enumerate_ring_splay_states(n)) c += s.tag == Stability::Stable && s.a != 0 ? 1 : 0;
        return c;
    };
    for (const auto& s : enumerate_ring_splay_states(4)) CHECK((s.tag == Stability::Stable) == (s.a == 0));

    std::vector<double> stable5;
    for (const auto& s : enumerate_ring_splay_states(5))
        if (s.tag == Stability::Stable) stable5.push_back(std::abs(wrap(s.theta0)));
    std::sort(stable5.begin(), stable5.end());
    REQUIRE(stable5.size() == 3);
    CHECK(stable5[0] == 0.0);
    CHECK(stable5[1] == doctest::Approx(kTwoPi / 5));
    CHECK(stable5[2] == doctest::Approx(kTwoPi / 5));

    int stable10 = 0;
    for (const auto& s : enumerate_ring_splay_states(10)) {
        if (s.tag == Stability::Stable) {
            ++stable10;
            CHECK(std::abs(wrap(s.theta0)) < kPi / 2);
        }
    }
    CHECK(stable10 == 5);

    for (int n = 2; n <= 12; ++n) {
        CHECK((count_stable_nonzero(n) > 0) == (n >= 5));
        const auto ring = ring_undirected(n);
        for (const auto& s : enumerate_ring_splay_states(n)) {
            CHECK(ct_rhs(s.state, ring, 1.0).cwiseAbs().maxCoeff() < 1e-12);
            const auto ev = symmetric_eigenvalues(hessian_v_circ(s.state, ring));
            if (std::abs(std::abs(wrap(s.theta0)) - kPi / 2) < 1e-12) {
                // cos θ₀ = 0 on every edge: the Hessian vanishes and cannot decide.
                CHECK(s.tag == Stability::Unstable);
                CHECK(classify_spectrum(ev) != Stability::Stable);
            } else {
                CHECK(classify_spectrum(ev) == s.tag);
            }
        }
    }
    const auto n5 = analyze_state(spaced_swarm(5, kTwoPi / 5), ring_undirected(5), CouplingProfile::sine());
    int near_zero = 0;
    for (double ev : n5.eigenvalues) {
        CHECK(ev >= -1e-9);
        near_zero += std::abs(ev) < 1e-9 ? 1 : 0;
    }
    CHECK(near_zero == 1);
    CHECK(analyze_state(spaced_swarm(4, kPi / 2), ring_undirected(4), CouplingProfile::sine()).classification !=
          Stability::Stable);
}

TEST_CASE("mixed ring critical points") {
    for (int n = 3; n <= 8; ++n) {
        const auto pts = enumerate_ring_critical_points(n);
        CHECK_FALSE(pts.empty());
        for (const auto& r : pts) {
            CHECK(r.gradient_norm < 1e-10);
            CHECK(ct_rhs(r.state, ring_undirected(n), 1.0).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    CHECK_THROWS_AS(enumerate_ring_critical_points(9), ArgumentError);
}

TEST_CASE("critical point search") {
    const auto ring5 = ring_undirected(5);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    Vector near = spaced_swarm(5, kTwoPi / 5).angles();
    for (int k = 0; k < 5; ++k) near[k] += noise(rng);
    const std::vector<CircleSwarm> seeds{CircleSwarm(Vector::Constant(5, 0.2)), CircleSwarm(near)};
    const auto reports = critical_point_search(ring5, CouplingProfile::sine(), seeds);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].converged);
    CHECK(reports[0].classification == Stability::Stable);
    CHECK(reports[1].converged);
    CHECK(reports[1].classification == Stability::Stable);
    CHECK(reports[1].gradient_norm < 1e-10);
    for (int k = 0; k < 5; ++k) {
        const double gap = wrap(reports[1].state[(k + 1) % 5] - reports[1].state[k]);
        CHECK(std::abs(std::abs(gap) - kTwoPi / 5) < 1e-8);
    }

    const auto anti = critical_point_search(complete_graph(2), CouplingProfile::sine(), {CircleSwarm{0.0, kPi}});
    CHECK(anti[0].converged);
    CHECK(anti[0].classification == Stability::Unstable);

    // Parallel fan-out returns the same reports.
    std::vector<CircleSwarm> many;
    for (int i = 0; i < 12; ++i) many.push_back(random_circle(rng, 6));
    SearchOptions one;
    SearchOptions four;
    four.threads = 4;
    const auto a = critical_point_search(ring_undirected(6), CouplingProfile::sine(), many, one);
    const auto b = critical_point_search(ring_undirected(6), CouplingProfile::sine(), many, four);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].state == b[i].state);
}

TEST_CASE("synchronous step bound") {
    CHECK(beta_bound(path_graph(2)) == doctest::Approx(bound_oracle(1, 2)).epsilon(1e-10));
    CHECK(beta_bound(complete_graph(3)) == doctest::Approx(bound_oracle(2, 6)).epsilon(1e-10));
    CHECK_THROWS_AS(beta_bound(WeightedDigraph(3)), ArgumentError);
    Matrix w = Matrix::Zero(2, 2);
    w(0, 1) = w(1, 0) = 0.5;
    CHECK_THROWS_AS(beta_bound(WeightedDigraph(w)), ArgumentError);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        WeightedDigraph g(2);
        do {
            g = oracle::random_digraph(rng, 3 + i % 6, 0.5, true, true);
        } while (g.edge_count() == 0);
        double dmax = 0.0;
        double dsum = 0.0;
        for (int k = 0; k < g.size(); ++k) {
            dmax = std::max(dmax, in_degree(g, k));
            dsum += in_degree(g, k);
        }
        const double beta = beta_bound(g);
        CHECK(beta == doctest::Approx(bound_oracle(dmax, dsum)).epsilon(1e-10));
        CHECK(beta > dmax);
        for (int s = 0; s < 200; ++s) {
            const auto st = random_circle(rng, g.size());
            CHECK(v_circ(dt_step(st, g, beta), g) <= v_circ(st, g) + 1e-12);
        }
    }
}

TEST_CASE("asynchronous decrement") {
    std::mt19937_64 rng(5);
    const auto sync = CircleSwarm(Vector::Constant(5, 1.0));
    const std::vector<int> none;
    CHECK(async_decrement(random_circle(rng, 5), ring_undirected(5), 1.0, none) == 0.0);
    const std::vector<int> two{0, 2};
    CHECK(std::abs(async_decrement(sync, ring_undirected(5), 1.0, two)) < 1e-15);
    const std::vector<int> adjacent{0, 1};
    CHECK_THROWS_AS(async_decrement(sync, ring_undirected(5), 1.0, adjacent), ArgumentError);

    for (int i = 0; i < 500; ++i) {
        const auto g = oracle::random_digraph(rng, 3 + i % 7, 0.4, true, i % 2 == 0);
        const auto s = random_circle(rng, g.size());
        const auto sigma = random_independent_set(rng, g);
        const double beta = 0.1 + 0.01 * i;
        const double d = async_decrement(s, g, beta, sigma);
        CHECK(d <= 0.0);
        CHECK(std::abs(d - (v_circ(dt_step(s, g, beta, sigma), g) - v_circ(s, g))) < 1e-9);
    }
}

TEST_CASE("update schedules") {
    const auto g = ring_undirected(7);
    const auto rr = UpdateSchedule::round_robin(g);
    rr.validate(g);
    std::vector<int> seen(7, 0);
    for (long t = 0; t < rr.horizon; ++t) {
        CHECK(is_independent_set(g, rr.at(t)));
        for (int k : rr.at(t)) ++seen[static_cast<std::size_t>(k)];
    }
    for (int c : seen) CHECK(c >= 1);
    UpdateSchedule bad;
    bad.mode = UpdateSchedule::Mode::LocallyAsynchronous;
    bad.subsets = {{0, 1}};
    CHECK_THROWS_AS(bad.validate(g), ArgumentError);
}

TEST_CASE("stabilizing weights") {
    const auto splay = spaced_swarm(5, kTwoPi / 5);
    const auto g5 = stabilizing_weights(splay);
    CHECK(classify_connectivity(g5).kind == ConnectivityClass::Kind::StronglyConnected);
    CHECK(ct_rhs(splay, g5, 1.0).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937_64 rng(6);
    int tested = 0;
    while (tested < 20) {
        // Evenly spread base plus jitter keeps both half-planes populated.
        Vector th = spaced_swarm(8, kTwoPi / 8).angles();
        std::uniform_real_distribution<double> jitter(-0.3, 0.3);
        for (int k = 0; k < 8; ++k) th[k] += jitter(rng);
        const CircleSwarm s(th);
        const auto g = stabilizing_weights(s);
        ++tested;
        CHECK(classify_connectivity(g).kind == ConnectivityClass::Kind::StronglyConnected);
        CHECK(ct_rhs(s, g, 1.0).cwiseAbs().maxCoeff() < 1e-10);
        const double delta = *g.min_positive_weight();
        for (const auto& e : g.edges()) {
            CHECK(e.weight >= delta);
            CHECK(oracle::arc(s[e.from], s[e.to]) < kPi / 2);
        }
        Eigen::EigenSolver<Matrix> es(linearization(s, g, 1.0, CouplingProfile::sine()));
        int near_zero = 0;
        for (int i = 0; i < 8; ++i) {
            const double re = es.eigenvalues()[i].real();
            if (std::abs(re) < 1e-9) {
                ++near_zero;
            } else {
                CHECK(re < 0.0);
            }
        }
        CHECK(near_zero == 1);
    }

    try {
        stabilizing_weights(spaced_swarm(4, kPi / 2));
        FAIL("expected a precondition error");
    } catch (const PreconditionError&) {
    }
    // Agent 6 has nobody within a quarter turn on one side.
    const CircleSwarm lopsided{0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
    CHECK_THROWS_AS(stabilizing_weights(lopsided), PreconditionError);
}

TEST_CASE("limit-cycle detection") {
    const auto sync = CircleSwarm(Vector::Constant(4, 0.3));
    const auto fixed = detect_limit_cycle(sync, ring_undirected(4), 1.0);
    CHECK(fixed.recurrent);
    CHECK(fixed.period == 1);

    // β → 0 on two agents: each jumps onto the other, swapping every step.
    const auto swap = detect_limit_cycle(CircleSwarm{0.0, 1.0}, complete_graph(2), 1e-300);
    CHECK(swap.recurrent);
    CHECK(swap.period == 2);
}

TEST_CASE("report serialization") {
    const auto r = analyze_state(spaced_swarm(5, kTwoPi / 5), ring_undirected(5), CouplingProfile::sine());
    const auto j = to_json(r);
    CHECK(j.at("classification") == "stable");
    CHECK(j.at("hessian_eigenvalues").size() == 5);
    CHECK(j.at("state").size() == 5);
}
