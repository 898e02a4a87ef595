#include "circsync/equilibria.hpp"

#include "circsync/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <set>

namespace circsync {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Marginal: return "marginal";
    }
    return "unknown";
}

namespace {

void check_sizes(const CircleSwarm& s, const WeightedDigraph& g) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm and graph sizes differ");
    }
}

Vector gradient_lift(const Vector& th, const WeightedDigraph& g, const CouplingProfile& profile) {
    const int n = g.size();
    Vector grad = Vector::Zero(n);
    const Matrix& a = g.weights();
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            const double w = a(j, k) + a(k, j);
            if (w > 0.0) {
                grad[k] -= 0.5 * w * profile.gain() * profile.f(th[j] - th[k]);
            }
        }
    }
    return grad;
}

Matrix hessian_lift(const Vector& th, const WeightedDigraph& g, const CouplingProfile& profile) {
    const int n = g.size();
    Matrix h = Matrix::Zero(n, n);
    const Matrix& a = g.weights();
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            if (j == k) {
                continue;
            }
            const double w = a(j, k) + a(k, j);
            if (w > 0.0) {
                h(k, j) = -0.5 * w * profile.gain() * profile.slope(th[j] - th[k]);
            }
        }
        h(k, k) = -h.row(k).sum();
    }
    return h;
}

}  // namespace

double potential_energy(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile) {
    check_sizes(s, g);
    double v = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        for (const auto& e : g.in_edges(k)) {
            v += e.weight * profile.potential(s[e.from] - s[k]);
        }
    }
    return 0.5 * v;
}

Vector gradient(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile) {
    check_sizes(s, g);
    return gradient_lift(s.angles(), g, profile);
}

Matrix hessian(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile) {
    check_sizes(s, g);
    return hessian_lift(s.angles(), g, profile);
}

Matrix hessian_v_circ(const CircleSwarm& s, const WeightedDigraph& g) {
    if (!is_undirected(g)) {
        throw ArgumentError("hessian_v_circ requires an undirected graph");
    }
    return hessian(s, g, CouplingProfile::sine());
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
    const Vector ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

Stability classify_spectrum(const std::vector<double>& eigenvalues) {
    double scale = 0.0;
    for (double v : eigenvalues) {
        scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-8 * (1.0 + scale);
    int zeros = 0;
    bool negative = false;
    for (double v : eigenvalues) {
        if (v < -tol) {
            negative = true;
        } else if (v <= tol) {
            ++zeros;
        }
    }
    if (negative) {
        return Stability::Unstable;
    }
    return zeros == 1 ? Stability::Stable : Stability::Marginal;
}

EquilibriumReport analyze_state(const CircleSwarm& s, const WeightedDigraph& g, const CouplingProfile& profile) {
    EquilibriumReport r;
    r.state = s;
    r.gradient_norm = gradient(s, g, profile).norm();
    r.eigenvalues = symmetric_eigenvalues(hessian(s, g, profile));
    r.classification = classify_spectrum(r.eigenvalues);
    return r;
}

std::vector<SplayState> enumerate_ring_splay_states(int n) {
    if (n < 2) {
        throw ArgumentError("ring splay states need N >= 2");
    }
    std::vector<SplayState> out;
    for (int a = 0; a < n; ++a) {
        const double theta0 = wrap(kTwoPi * a / n);
        const Stability tag = std::abs(theta0) < kPi / 2 ? Stability::Stable : Stability::Unstable;
        out.push_back({a, theta0, spaced_swarm(n, theta0), tag});
    }
    return out;
}

std::vector<EquilibriumReport> enumerate_ring_critical_points(int n) {
    if (n < 2 || n > 8) {
        throw ArgumentError("mixed ring critical points are enumerated for 2 <= N <= 8");
    }
    const WeightedDigraph ring = ring_undirected(n);
    const auto sine = CouplingProfile::sine();
    std::vector<EquilibriumReport> out;
    std::vector<Vector> seen;
    auto known = [&](const Vector& th) {
        for (const Vector& other : seen) {
            double dist = 0.0;
            for (int k = 0; k < n; ++k) {
                dist = std::max(dist, arc_distance(th[k], other[k]));
            }
            if (dist < 1e-9) {
                return true;
            }
        }
        return false;
    };
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        const int m = std::popcount(mask);
        const int denom = n - 2 * m;
        if (denom == 0) {
            continue;
        }
        // (N − 2m)θ₀ + mπ = 2πq with θ₀ in [−π/2, π/2].
        const int qmin = static_cast<int>(std::floor((m - std::abs(denom) / 2.0) / 2.0)) - 1;
        const int qmax = static_cast<int>(std::ceil((m + std::abs(denom) / 2.0) / 2.0)) + 1;
        for (int q = qmin; q <= qmax; ++q) {
            const double theta0 = (2.0 * q - m) * kPi / denom;
            if (theta0 < -kPi / 2 - 1e-12 || theta0 > kPi / 2 + 1e-12) {
                continue;
            }
            Vector th(n);
            th[0] = 0.0;
            for (int k = 0; k + 1 < n; ++k) {
                th[k + 1] = th[k] + ((mask >> k) & 1u ? kPi - theta0 : theta0);
            }
            CircleSwarm s(th);
            if (known(s.angles())) {
                continue;
            }
            seen.push_back(s.angles());
            out.push_back(analyze_state(s, ring, sine));
        }
    }
    return out;
}

namespace {

EquilibriumReport search_one(const WeightedDigraph& g, const CouplingProfile& profile, const CircleSwarm& seed,
                             const SearchOptions& opt) {
    const int n = g.size();
    Vector th = seed.angles();
    Vector grad = gradient_lift(th, g, profile);
    double gnorm = grad.norm();
    double mu = 1e-6;
    int it = 0;
    for (; it < opt.max_iterations && gnorm >= opt.gradient_tolerance; ++it) {
        const Matrix h = hessian_lift(th, g, profile);
        const Matrix normal = h.transpose() * h + mu * Matrix::Identity(n, n);
        const Vector step = normal.ldlt().solve(-h.transpose() * grad);
        const Vector trial = th + step;
        const Vector trial_grad = gradient_lift(trial, g, profile);
        const double trial_norm = trial_grad.norm();
        if (trial_norm < gnorm) {
            th = trial;
            grad = trial_grad;
            gnorm = trial_norm;
            mu = std::max(mu * 0.3, 1e-15);
        } else {
            mu *= 10.0;
            if (mu > 1e12) {
                break;
            }
        }
    }
    EquilibriumReport r = analyze_state(CircleSwarm(th), g, profile);
    r.converged = r.gradient_norm < opt.gradient_tolerance;
    r.iterations = it;
    return r;
}

}  // namespace

std::vector<EquilibriumReport> critical_point_search(const WeightedDigraph& g, const CouplingProfile& profile,
                                                     const std::vector<CircleSwarm>& seeds,
                                                     const SearchOptions& opt) {
    if (!is_undirected(g)) {
        throw ArgumentError("critical point search requires an undirected graph");
    }
    for (const auto& s : seeds) {
        check_sizes(s, g);
    }
    std::vector<EquilibriumReport> out(seeds.size());
    parallel_for(seeds.size(), opt.threads,
                 [&](std::size_t i) { out[i] = search_one(g, profile, seeds[i], opt); });
    return out;
}

double beta_bound(const WeightedDigraph& g) {
    if (!is_unweighted(g)) {
        throw ArgumentError("beta bound is defined for unweighted graphs only");
    }
    if (!is_undirected(g)) {
        throw ArgumentError("beta bound is defined for undirected graphs only");
    }
    if (g.edge_count() == 0) {
        throw ArgumentError("beta bound needs at least one edge");
    }
    double dmax = 0.0;
    double dsum = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        const double d = in_degree(g, k);
        dmax = std::max(dmax, d);
        dsum += d;
    }
    const double target = 1.0 + dmax / dsum;
    auto phi = [](double m) { return std::expm1(m) / m; };
    double lo = 0.0;
    double hi = 1.0;
    while (phi(hi) < target) {
        hi *= 2.0;
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid > 0.0 && phi(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double m_star = 0.5 * (lo + hi);
    return dmax * (2.0 / m_star + 1.0);
}

bool is_independent_set(const WeightedDigraph& g, std::span<const int> sigma) {
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const int a = sigma[i];
        if (a < 0 || a >= g.size()) {
            throw ArgumentError("subset vertex out of range");
        }
        for (std::size_t j = i + 1; j < sigma.size(); ++j) {
            const int b = sigma[j];
            if (a == b || g.has_edge(a, b) || g.has_edge(b, a)) {
                return false;
            }
        }
    }
    return true;
}

double async_decrement(const CircleSwarm& s, const WeightedDigraph& g, double beta, std::span<const int> sigma) {
    check_sizes(s, g);
    if (!(beta > 0.0)) {
        throw ArgumentError("beta must be positive");
    }
    if (!is_undirected(g)) {
        throw ArgumentError("async_decrement requires an undirected graph");
    }
    if (!is_independent_set(g, sigma)) {
        throw ArgumentError("update subset is not an independent set of the graph");
    }
    double sum = 0.0;
    for (int k : sigma) {
        double re = beta;
        double im = 0.0;
        for (const auto& e : g.in_edges(k)) {
            re += e.weight * std::cos(s[e.from] - s[k]);
            im += e.weight * std::sin(s[e.from] - s[k]);
        }
        const double rho = std::hypot(re, im);
        const double half = std::sin(0.5 * std::atan2(im, re));
        sum += (rho + beta) * half * half;
    }
    return -4.0 * sum;
}

// ---------------------------------------------------------------------------
// Update schedules

UpdateSchedule UpdateSchedule::synchronous(int n) {
    if (n < 1) {
        throw ArgumentError("schedule needs at least one vertex");
    }
    UpdateSchedule u;
    u.mode = Mode::Synchronous;
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        all[static_cast<std::size_t>(k)] = k;
    }
    u.subsets = {all};
    u.horizon = 1;
    return u;
}

UpdateSchedule UpdateSchedule::round_robin(const WeightedDigraph& g) {
    const int n = g.size();
    std::vector<int> color(static_cast<std::size_t>(n), -1);
    int colors = 0;
    for (int v = 0; v < n; ++v) {
        std::vector<bool> used(static_cast<std::size_t>(colors + 1), false);
        for (int w = 0; w < v; ++w) {
            if (g.has_edge(v, w) || g.has_edge(w, v)) {
                used[static_cast<std::size_t>(color[static_cast<std::size_t>(w)])] = true;
            }
        }
        int c = 0;
        while (used[static_cast<std::size_t>(c)]) {
            ++c;
        }
        color[static_cast<std::size_t>(v)] = c;
        colors = std::max(colors, c + 1);
    }
    UpdateSchedule u;
    u.mode = Mode::LocallyAsynchronous;
    u.subsets.assign(static_cast<std::size_t>(colors), {});
    for (int v = 0; v < n; ++v) {
        u.subsets[static_cast<std::size_t>(color[static_cast<std::size_t>(v)])].push_back(v);
    }
    u.horizon = colors;
    return u;
}

const std::vector<int>& UpdateSchedule::at(long t) const {
    if (subsets.empty()) {
        throw ArgumentError("empty update schedule");
    }
    const long len = static_cast<long>(subsets.size());
    return subsets[static_cast<std::size_t>(((t % len) + len) % len)];
}

void UpdateSchedule::validate(const WeightedDigraph& g) const {
    if (subsets.empty() || horizon < 1) {
        throw ArgumentError("update schedule needs at least one subset and horizon >= 1");
    }
    if (mode == Mode::LocallyAsynchronous) {
        for (std::size_t i = 0; i < subsets.size(); ++i) {
            if (!is_independent_set(g, subsets[i])) {
                throw ArgumentError("update subset " + std::to_string(i) + " is not an independent set");
            }
        }
    }
    const long len = static_cast<long>(subsets.size());
    for (long start = 0; start < len; ++start) {
        std::vector<bool> hit(static_cast<std::size_t>(g.size()), false);
        for (long t = start; t < start + horizon; ++t) {
            for (int v : at(t)) {
                if (v < 0 || v >= g.size()) {
                    throw ArgumentError("update subset vertex out of range");
                }
                hit[static_cast<std::size_t>(v)] = true;
            }
        }
        for (int v = 0; v < g.size(); ++v) {
            if (!hit[static_cast<std::size_t>(v)]) {
                throw ArgumentError("vertex " + std::to_string(v + 1) + " is not updated within the horizon");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Constructed equilibria

WeightedDigraph stabilizing_weights(const CircleSwarm& s) {
    const int n = s.size();
    if (n < 5) {
        throw PreconditionError("stabilizing weights require N >= 5");
    }
    Matrix w = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        std::vector<std::pair<int, double>> nbrs;
        bool left = false;
        bool right = false;
        for (int j = 0; j < n; ++j) {
            if (j == k) {
                continue;
            }
            const double d = wrap(s[j] - s[k]);
            if (std::abs(d) < kPi / 2) {
                nbrs.emplace_back(j, d);
                left = left || d > 0.0;
                right = right || d < 0.0;
            }
        }
        if (!left || !right) {
            throw PreconditionError("vertex " + std::to_string(k + 1) +
                                        " lacks a neighbor strictly within pi/2 on both sides",
                                    k);
        }
        double tangential = 0.0;
        for (const auto& [j, d] : nbrs) {
            w(j, k) = 1.0;
            tangential += std::sin(d);
        }
        if (tangential != 0.0) {
            int best = -1;
            double best_sin = 0.0;
            for (const auto& [j, d] : nbrs) {
                const double sn = std::sin(d);
                if (sn * tangential < 0.0 && std::abs(sn) > best_sin) {
                    best = j;
                    best_sin = std::abs(sn);
                }
            }
            w(best, k) = 1.0 + std::abs(tangential) / best_sin;
        }
    }
    WeightedDigraph g(std::move(w));
    if (classify_connectivity(g).kind != ConnectivityClass::Kind::StronglyConnected) {
        throw PreconditionError("constructed graph is not strongly connected");
    }
    return g;
}

Matrix linearization(const CircleSwarm& s, const WeightedDigraph& g, double alpha, const CouplingProfile& profile) {
    check_sizes(s, g);
    const int n = g.size();
    Matrix j = Matrix::Zero(n, n);
    const double scale = alpha * profile.gain();
    for (int k = 0; k < n; ++k) {
        for (const auto& e : g.in_edges(k)) {
            const double d = scale * e.weight * profile.slope(s[e.from] - s[k]);
            j(k, e.from) += d;
            j(k, k) -= d;
        }
    }
    return j;
}

LimitCycle detect_limit_cycle(const CircleSwarm& s0, const WeightedDigraph& g, double beta, long max_steps,
                              double tol) {
    std::vector<CircleSwarm> history{s0};
    CircleSwarm s = s0;
    for (long t = 1; t <= max_steps; ++t) {
        s = dt_step(s, g, beta);
        for (long i = static_cast<long>(history.size()) - 1; i >= 0; --i) {
            const CircleSwarm& old = history[static_cast<std::size_t>(i)];
            double dist = 0.0;
            for (int k = 0; k < s.size() && dist <= tol; ++k) {
                dist = std::max(dist, arc_distance(s[k], old[k]));
            }
            if (dist <= tol) {
                return {true, t - i, i};
            }
        }
        history.push_back(s);
    }
    return {};
}

nlohmann::json to_json(const EquilibriumReport& r) {
    nlohmann::json j;
    j["state"] = std::vector<double>(r.state.angles().data(), r.state.angles().data() + r.state.size());
    j["gradient_norm"] = r.gradient_norm;
    j["hessian_eigenvalues"] = r.eigenvalues;
    j["classification"] = to_string(r.classification);
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    return j;
}

}  // namespace circsync
