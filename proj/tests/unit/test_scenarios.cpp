#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "circsync/scenarios.hpp"
#include "oracles.hpp"

using namespace circsync;

namespace {

/// Largest change of any angle relative to agent `ref`, between two states.
double relative_drift(const CircleSwarm& a, const CircleSwarm& b, int ref = 0) {
    double worst = 0.0;
    for (int k = 0; k < a.size(); ++k)
        worst = std::max(worst, oracle::arc(a[k] - a[ref], b[k] - b[ref]));
    return worst;
}

}  // namespace

TEST_CASE("vicsek single steps") {
    VicsekState one{Matrix::Zero(1, 2), CircleSwarm{0.5}, 1.0};
    for (int t = 1; t <= 3; ++t) {
        one = vicsek_step(one);
        CHECK(one.headings[0] == 0.5);
        CHECK(one.positions(0, 0) == doctest::Approx(t * std::cos(0.5)));
        CHECK(one.positions(0, 1) == doctest::Approx(t * std::sin(0.5)));
    }

    Matrix p(2, 2);
    p << 0, 0, 0.5, 0;
    VicsekState pair{p, CircleSwarm{1.0, 1.0}, 1.0};
    CHECK(proximity_graph(pair).edge_count() == 2);
    const auto next = vicsek_step(pair);
    CHECK(next.headings == pair.headings);
    CHECK((next.positions.row(1) - next.positions.row(0)).norm() == doctest::Approx(0.5));

    p << 0, 0, 5, 0;
    VicsekState apart{p, CircleSwarm{0.3, -2.0}, 1.0};
    CHECK(proximity_graph(apart).edge_count() == 0);
    CHECK(vicsek_step(apart).headings == apart.headings);
}

TEST_CASE("vicsek divergence") {
    const auto [lo, hi] = divergence_radius_interval(8, 1.0);
    CHECK(lo == doctest::Approx(1.0 / (2 * std::sin(kTwoPi / 8))));
    CHECK(hi == doctest::Approx(1.0 / (2 * std::sin(kPi / 8))));

    VicsekState s = vicsek_divergence_setup(8, 0.5 * (lo + hi));
    for (int k = 0; k < 8; ++k) {
        // Each agent senses exactly its two ring neighbours, heading radially outward.
        CHECK(proximity_graph(s).in_edges(k).size() == 2);
        CHECK(oracle::arc(s.headings[k], std::atan2(s.positions(k, 1), s.positions(k, 0))) < 1e-12);
    }
    int drop = -1;
    for (int t = 0; t < 30; ++t) {
        const int before = proximity_graph(s).edge_count();
        const auto next = vicsek_step(s);
        const int after = proximity_graph(next).edge_count();
        if (drop < 0 && after < before) {
            CHECK(after == 0);
            CHECK(before == 16);
            drop = t + 1;
        }
        if (drop >= 0) {
            CHECK(after == 0);
            CHECK(next.headings == s.headings);
        }
        s = next;
    }
    CHECK(drop > 0);

    CHECK_THROWS_AS(vicsek_divergence_setup(4, 1.0), ArgumentError);
    CHECK_THROWS_AS(vicsek_divergence_setup(8, 2.0 * hi), ArgumentError);
    CHECK_THROWS_AS(vicsek_divergence_setup(8, 0.9 * lo), ArgumentError);
}

TEST_CASE("cyclic pursuit scenario") {
    for (int n : {6, 12}) {
        const auto sc = make_scenario("cyclic_pursuit", {{"n", n}});
        const auto traj = integrate(sc.initial, sc.schedule, sc.alpha, sc.profile, {sc.t_end, 0.01, 10});
        const double v = 2.0 * std::sin(kTwoPi / n);
        for (const auto& s : traj) {
            CHECK(relative_drift(s.state, sc.initial) < 1e-6);
            CHECK(oracle::arc(s.state[0], sc.initial[0] + v * s.t) < 1e-6);
        }
    }
    CHECK(2.0 * std::sin(kTwoPi / 6) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("two rings are periodic in relative position") {
    const auto sc = make_scenario("two_ring_periodic", {});
    const double v1 = 2.0 * std::sin(kTwoPi / 5);
    const double v2 = 2.0 * std::sin(kTwoPi / 6);
    const double period = kTwoPi / std::abs(v1 - v2);
    const Vector end = integrate_final(sc.initial.angles(), sc.schedule, sc.alpha, sc.profile, {period, 0.001, 1});
    CHECK(relative_drift(CircleSwarm(end), sc.initial) < 1e-4);
    const Vector half = integrate_final(sc.initial.angles(), sc.schedule, sc.alpha, sc.profile, {period / 2, 0.001, 1});
    CHECK(relative_drift(CircleSwarm(half), sc.initial) > 0.1);
    // A regular set exerts no net pull on the other.
    const Vector v = ct_rhs(sc.initial, sc.schedule.at(0.0), sc.alpha);
    for (int k = 0; k < 5; ++k) CHECK(v[k] == doctest::Approx(v1));
    for (int k = 5; k < 11; ++k) CHECK(v[k] == doctest::Approx(v2));
    CHECK_THROWS_AS(make_scenario("two_ring_periodic", {{"n1", 6}, {"n2", 6}}), ArgumentError);
}

TEST_CASE("three sets never repeat a configuration") {
    const auto sc = make_scenario("quasiperiodic_three_sets", {});
    REQUIRE(sc.groups.size() == 3);
    const auto traj = integrate(sc.initial, sc.schedule, sc.alpha, sc.profile, {500.0, 0.01, 100});
    const Vector v = ct_rhs(sc.initial, sc.schedule.at(0.0), sc.alpha);
    for (int k : sc.groups[0]) CHECK(std::abs(v[k]) < 1e-12);
    for (int k : sc.groups[1]) CHECK(v[k] == doctest::Approx(std::sqrt(3.0)));
    for (int k : sc.groups[2]) CHECK(v[k] == doctest::Approx(1.0));
    const int a = sc.groups[1].front();
    const int b = sc.groups[2].front();
    double closest = kPi;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        const auto& s = traj[i].state;
        const double rel = oracle::arc(s[a] - s[b], sc.initial[a] - sc.initial[b]);
        const double abs_a = oracle::arc(s[a], sc.initial[a]);
        closest = std::min(closest, std::max(rel, abs_a));
    }
    CHECK(closest > 1e-6);
}

TEST_CASE("driven agent") {
    const auto sc = make_scenario("disorderly_agent", {{"x", 5}, {"phase", 0.3}});
    const int k = sc.initial.size() - 1;
    const auto& g = sc.schedule.at(0.0);
    CHECK(g.in_edges(k).size() == 3);
    CHECK(sc.initial[k] == 0.3);
    // Velocity is Σ over the three drivers of sin(θ_j − θ_k).
    double expected = 0.0;
    for (int j : {0, 5, 11}) expected += std::sin(sc.initial[j] - sc.initial[k]);
    CHECK(ct_rhs(sc.initial, g, sc.alpha)[k] == doctest::Approx(expected));
}

TEST_CASE("direction reversal") {
    const auto sc = make_scenario("direction_reversal", {});
    REQUIRE(sc.initial.size() == 18);
    // Caption offsets: A_k ↔ A_{k−1} at 2π/9, A_k ↔ B_{k+2} at 7π/18, B_m ↔ A_{m+1} at 5π/18, B_m ↔ A_m at π/18.
    for (int k = 0; k < 9; ++k) {
        CHECK(oracle::arc(sc.initial[(k + 8) % 9] - sc.initial[k], -kTwoPi / 9) < 1e-12);
        CHECK(oracle::arc(sc.initial[9 + (k + 2) % 9] - sc.initial[k], 7 * kPi / 18) < 1e-12);
        CHECK(oracle::arc(sc.initial[(k + 1) % 9] - sc.initial[9 + k], 5 * kPi / 18) < 1e-12);
        CHECK(oracle::arc(sc.initial[k] - sc.initial[9 + k], kPi / 18) < 1e-12);
    }
    const auto traj = integrate(sc.initial, sc.schedule, sc.alpha, sc.profile, {sc.t_end, 0.01, 20});
    std::vector<int> flips(18, 0);
    Vector prev = ct_rhs(traj.front().state, sc.schedule.at(0.0), sc.alpha);
    for (const auto& s : traj) {
        const Vector v = ct_rhs(s.state, sc.schedule.at(s.t), sc.alpha);
        for (int k = 0; k < 18; ++k)
            if (v[k] * prev[k] < 0.0) ++flips[static_cast<std::size_t>(k)];
        prev = v;
    }
    for (int f : flips) CHECK(f >= 2);
}

TEST_CASE("splay ring scenario and registry") {
    const auto sc = make_scenario("splay_ring", {{"n", 10}, {"a", 1}});
    CHECK(ct_rhs(sc.initial, sc.schedule.at(0.0), sc.alpha).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(scenario_registry().size() == 6);
    for (const auto& [kind, defaults] : scenario_registry()) CHECK_NOTHROW(make_scenario(kind, defaults));
    CHECK_THROWS_AS(make_scenario("flocking", {}), ArgumentError);
    CHECK_THROWS_AS(make_scenario("splay_ring", {{"m", 3}}), ArgumentError);
    CHECK_THROWS_AS(make_scenario("cyclic_pursuit", {{"n", 2.5}}), ArgumentError);
}

TEST_CASE("hopfield network") {
    const auto edge = path_graph(2);
    const SpinState up{{1, 1}, {}};
    CHECK(hopfield_step(up, edge) == up);
    CHECK(hopfield_energy(up, edge) == -1.0);
    const SpinState split{{1, -1}, {}};
    CHECK(hopfield_energy(split, edge) == 1.0);
    const auto flipped = hopfield_step(split, edge);
    CHECK(flipped.spins == std::vector<int>{-1, 1});
    CHECK(hopfield_step(flipped, edge) == split);
    const std::vector<int> first{0};
    CHECK(hopfield_step(split, edge, first).spins == std::vector<int>{-1, -1});
    CHECK_THROWS_AS(hopfield_step(SpinState{{1, 0}, {}}, edge), ArgumentError);
    const Edge e[] = {{0, 1}};
    CHECK_THROWS_AS(hopfield_energy(up, WeightedDigraph::from_edges(2, e)), ArgumentError);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 300; ++i) {
        const auto g = oracle::random_digraph(rng, 3 + i % 8, 0.5, true, i % 2 == 0);
        SpinState s{std::vector<int>(static_cast<std::size_t>(g.size())), {}};
        for (auto& x : s.spins) x = rng() % 2 ? 1 : -1;
        for (int k = 0; k < g.size(); ++k) s.thresholds.push_back(0.3 * normal(rng));
        for (int sweep = 0; sweep < 3; ++sweep) {
            for (int k = 0; k < g.size(); ++k) {
                const std::vector<int> one{k};
                const auto next = hopfield_step(s, g, one);
                CHECK(hopfield_energy(next, g) <= hopfield_energy(s, g) + 1e-12);
                s = next;
            }
        }
    }
}

TEST_CASE("spins are the zero-sphere case of the circle update") {
    for (int n = 1; n <= 4; ++n) {
        const int pairs = n * (n - 1) / 2;
        for (int mask = 0; mask < (1 << pairs); ++mask) {
            Matrix a = Matrix::Zero(n, n);
            int bit = 0;
            for (int j = 0; j < n; ++j)
                for (int k = j + 1; k < n; ++k)
                    if ((mask >> bit++) & 1) a(j, k) = a(k, j) = 1.0;
            const WeightedDigraph g(a);
            for (int spins = 0; spins < (1 << n); ++spins) {
                SpinState s{std::vector<int>(static_cast<std::size_t>(n)), {}};
                Vector th(n);
                for (int k = 0; k < n; ++k) {
                    s.spins[static_cast<std::size_t>(k)] = (spins >> k) & 1 ? 1 : -1;
                    th[k] = (spins >> k) & 1 ? 0.0 : kPi;
                }
                for (int k = 0; k < n; ++k) {
                    const std::vector<int> one{k};
                    const auto h = hopfield_step(s, g, one);
                    const auto c = dt_step(CircleSwarm(th), g, 1e-9, one);
                    for (int m = 0; m < n; ++m) CHECK((std::cos(c[m]) > 0 ? 1 : -1) == h.spins[static_cast<std::size_t>(m)]);
                }
            }
        }
    }
}
