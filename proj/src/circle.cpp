#include "circsync/circle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace circsync {

double wrap(double theta) {
    if (!std::isfinite(theta)) {
        throw ArgumentError("cannot wrap a non-finite angle");
    }
    double r = std::remainder(theta, kTwoPi);
    if (r <= -kPi) {
        r += kTwoPi;
    }
    return r;
}

double arc_distance(double a, double b) { return std::abs(wrap(a - b)); }

CircleSwarm::CircleSwarm(Vector angles) : theta_(std::move(angles)) {
    if (theta_.size() < 1) {
        throw ArgumentError("a swarm needs at least one agent");
    }
    for (Eigen::Index k = 0; k < theta_.size(); ++k) {
        theta_[k] = wrap(theta_[k]);
    }
}

CircleSwarm::CircleSwarm(std::initializer_list<double> angles)
    : CircleSwarm(Vector(Eigen::Map<const Vector>(angles.begin(), static_cast<Eigen::Index>(angles.size())))) {}

CircleSwarm CircleSwarm::rotated(double offset) const {
    return CircleSwarm(Vector(theta_.array() + offset));
}

CircleSwarm spaced_swarm(int n, double spacing, double phase) {
    if (n < 1) {
        throw ArgumentError("a swarm needs at least one agent");
    }
    Vector th(n);
    for (int k = 0; k < n; ++k) {
        th[k] = phase + k * spacing;
    }
    return CircleSwarm(std::move(th));
}

double max_pairwise_arc_distance(const CircleSwarm& s) {
    double best = 0.0;
    for (int j = 0; j < s.size(); ++j) {
        for (int k = j + 1; k < s.size(); ++k) {
            best = std::max(best, arc_distance(s[j], s[k]));
        }
    }
    return best;
}

double order_parameter(const CircleSwarm& s) {
    double c = 0.0;
    double si = 0.0;
    for (int k = 0; k < s.size(); ++k) {
        c += std::cos(s[k]);
        si += std::sin(s[k]);
    }
    return std::hypot(c, si) / s.size();
}

double v_circ(const CircleSwarm& s, const WeightedDigraph& g) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm and graph sizes differ");
    }
    double v = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        for (const auto& e : g.in_edges(k)) {
            const double h = 2.0 * std::sin(0.5 * (s[e.from] - s[k]));
            v += e.weight * h * h;
        }
    }
    return 0.5 * v;
}

// ---------------------------------------------------------------------------
// Coupling profiles

CouplingProfile::CouplingProfile(ProfileKind kind, double a, int n, double eps)
    : kind_(kind), a_(a), n_(n), eps_(eps) {
    if (kind_ != ProfileKind::G) {
        return;
    }
    joint_ = kPi / n_;
    outer_slope_ = -a_ / (n_ - 1);
    const double x0 = joint_ - eps_;
    f_blend_start_ = a_ * x0;
    p_blend_start_ = 0.5 * a_ * x0 * x0;
    const double u = 2.0 * eps_;
    const double ds = outer_slope_ - a_;
    f_blend_end_ = f_blend_start_ + a_ * u + (eps_ > 0.0 ? ds * u * u / (4.0 * eps_) : 0.0);
    p_blend_end_ = p_blend_start_ + f_blend_start_ * u + 0.5 * a_ * u * u +
                   (eps_ > 0.0 ? ds * u * u * u / (12.0 * eps_) : 0.0);
}

CouplingProfile CouplingProfile::sine() { return CouplingProfile(ProfileKind::Sine, 1.0, 0, 0.0); }

CouplingProfile CouplingProfile::g(double a, int n, std::optional<double> epsilon) {
    if (n < 2) {
        throw ArgumentError("g profile needs N >= 2");
    }
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw ArgumentError("g profile needs a > 0");
    }
    const double eps = epsilon.value_or(kPi / (20.0 * n));
    if (!(eps >= 0.0) || !(eps < kPi / (2.0 * n))) {
        throw ArgumentError("g profile smoothing must satisfy 0 <= epsilon < pi/(2N)");
    }
    return CouplingProfile(ProfileKind::G, a, n, eps);
}

std::string CouplingProfile::name() const { return kind_ == ProfileKind::Sine ? "sine" : "g"; }

double CouplingProfile::f(double theta) const {
    if (kind_ == ProfileKind::Sine) {
        return std::sin(theta);
    }
    const double w = wrap(theta);
    const double x = std::abs(w);
    const double sign = w < 0.0 ? -1.0 : 1.0;
    const double x0 = joint_ - eps_;
    const double x1 = joint_ + eps_;
    double v;
    if (x <= x0) {
        v = a_ * x;
    } else if (x < x1) {
        const double u = x - x0;
        v = f_blend_start_ + a_ * u + (outer_slope_ - a_) * u * u / (4.0 * eps_);
    } else {
        v = f_blend_end_ + outer_slope_ * (x - x1);
    }
    return sign * v;
}

double CouplingProfile::slope(double theta) const {
    if (kind_ == ProfileKind::Sine) {
        return std::cos(theta);
    }
    const double x = std::abs(wrap(theta));
    const double x0 = joint_ - eps_;
    const double x1 = joint_ + eps_;
    if (x <= x0) {
        return a_;
    }
    if (x < x1) {
        return a_ + (outer_slope_ - a_) * (x - x0) / (2.0 * eps_);
    }
    return outer_slope_;
}

double CouplingProfile::potential(double theta) const {
    if (kind_ == ProfileKind::Sine) {
        const double h = 2.0 * std::sin(0.5 * theta);
        return h * h;
    }
    const double x = std::abs(wrap(theta));
    const double x0 = joint_ - eps_;
    const double x1 = joint_ + eps_;
    if (x <= x0) {
        return 0.5 * a_ * x * x;
    }
    if (x < x1) {
        const double u = x - x0;
        return p_blend_start_ + f_blend_start_ * u + 0.5 * a_ * u * u +
               (outer_slope_ - a_) * u * u * u / (12.0 * eps_);
    }
    const double v = x - x1;
    return p_blend_end_ + f_blend_end_ * v + 0.5 * outer_slope_ * v * v;
}

CouplingProfile make_profile(std::string_view kind, double a, int n, std::optional<double> epsilon) {
    if (kind == "sine") {
        return CouplingProfile::sine();
    }
    if (kind == "g" || kind == "g_profile") {
        return CouplingProfile::g(a, n, epsilon);
    }
    throw ArgumentError("unknown coupling profile '" + std::string(kind) + "'");
}

// ---------------------------------------------------------------------------
// Dynamics

void detail::circle_rhs_flat(const WeightedDigraph& g, double alpha, const CouplingProfile& profile,
                             const double* theta, double* dtheta) {
    const double scale = alpha * profile.gain();
    const int n = g.size();
    if (profile.kind() == ProfileKind::Sine) {
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (const auto& e : g.in_edges(k)) {
                acc += e.weight * std::sin(theta[e.from] - theta[k]);
            }
            dtheta[k] = scale * acc;
        }
        return;
    }
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (const auto& e : g.in_edges(k)) {
            acc += e.weight * profile.f(theta[e.from] - theta[k]);
        }
        dtheta[k] = scale * acc;
    }
}

Vector ct_rhs(const CircleSwarm& s, const WeightedDigraph& g, double alpha, const CouplingProfile& profile) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm and graph sizes differ");
    }
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    Vector out(s.size());
    detail::circle_rhs_flat(g, alpha, profile, s.angles().data(), out.data());
    return out;
}

std::vector<std::array<double, 2>> ct_rhs_projection_form(const CircleSwarm& s, const WeightedDigraph& g,
                                                          double alpha) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm and graph sizes differ");
    }
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(s.size()));
    for (int k = 0; k < s.size(); ++k) {
        const double xk = std::cos(s[k]);
        const double yk = std::sin(s[k]);
        double rx = 0.0;
        double ry = 0.0;
        for (const auto& e : g.in_edges(k)) {
            rx += e.weight * (std::cos(s[e.from]) - xk);
            ry += e.weight * (std::sin(s[e.from]) - yk);
        }
        const double radial = xk * rx + yk * ry;
        out[static_cast<std::size_t>(k)] = {2.0 * alpha * (rx - radial * xk), 2.0 * alpha * (ry - radial * yk)};
    }
    return out;
}

namespace {

double dt_update(const CircleSwarm& s, const WeightedDigraph& g, double beta, int k) {
    const auto in = g.in_edges(k);
    if (in.empty()) {
        return s[k];
    }
    double re = beta * std::cos(s[k]);
    double im = beta * std::sin(s[k]);
    for (const auto& e : in) {
        re += e.weight * std::cos(s[e.from]);
        im += e.weight * std::sin(s[e.from]);
    }
    if (re == 0.0 && im == 0.0) {
        return s[k];
    }
    return std::atan2(im, re);
}

void check_dt(const CircleSwarm& s, const WeightedDigraph& g, double beta) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm and graph sizes differ");
    }
    if (!(beta > 0.0)) {
        throw ArgumentError("beta must be positive");
    }
}

}  // namespace

CircleSwarm dt_step(const CircleSwarm& s, const WeightedDigraph& g, double beta) {
    check_dt(s, g, beta);
    Vector next(s.size());
    for (int k = 0; k < s.size(); ++k) {
        next[k] = dt_update(s, g, beta, k);
    }
    return CircleSwarm(std::move(next));
}

CircleSwarm dt_step(const CircleSwarm& s, const WeightedDigraph& g, double beta, std::span<const int> subset) {
    check_dt(s, g, beta);
    Vector next = s.angles();
    for (int k : subset) {
        if (k < 0 || k >= s.size()) {
            throw ArgumentError("update subset contains vertex " + std::to_string(k + 1) + " out of range");
        }
        next[k] = dt_update(s, g, beta, k);
    }
    return CircleSwarm(std::move(next));
}

namespace {

void check_integration(int n, const GraphSequence& schedule, double alpha) {
    if (n != schedule.vertex_count()) {
        throw ArgumentError("swarm size does not match the schedule's vertex count");
    }
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
}

}  // namespace

Trajectory<CircleSwarm> integrate(const CircleSwarm& s0, const GraphSequence& schedule, double alpha,
                                  const CouplingProfile& profile, const StepOptions& opt) {
    check_integration(s0.size(), schedule, alpha);
    Trajectory<CircleSwarm> traj;
    traj.meta()["algorithm"] = "circle_ct";
    traj.meta()["alpha"] = format_double(alpha);
    traj.meta()["profile"] = profile.name();
    auto rhs = [&](const WeightedDigraph& g, const Vector& y, Vector& dy) {
        detail::circle_rhs_flat(g, alpha, profile, y.data(), dy.data());
    };
    integrate_rk4(schedule, s0.angles(), opt, rhs,
                  [&](double t, const Vector& y) { traj.push(t, CircleSwarm(y)); });
    return traj;
}

Vector integrate_final(const Vector& theta0, const GraphSequence& schedule, double alpha,
                       const CouplingProfile& profile, const StepOptions& opt) {
    check_integration(static_cast<int>(theta0.size()), schedule, alpha);
    StepOptions quiet = opt;
    quiet.sample_every = std::numeric_limits<int>::max();
    Vector last = theta0;
    auto rhs = [&](const WeightedDigraph& g, const Vector& y, Vector& dy) {
        detail::circle_rhs_flat(g, alpha, profile, y.data(), dy.data());
    };
    integrate_rk4(schedule, theta0, quiet, rhs, [&](double, const Vector& y) { last = y; });
    return last;
}

namespace {

template <class Column>
std::string angle_table(const Trajectory<CircleSwarm>& traj, const char* prefix, Column column) {
    std::ostringstream out;
    out << 't';
    const int n = traj.empty() ? 0 : traj.front().state.size();
    for (int k = 0; k < n; ++k) {
        out << ',' << prefix << k + 1;
    }
    out << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj[i].t);
        const Vector values = column(i);
        for (Eigen::Index k = 0; k < values.size(); ++k) {
            out << ',' << format_double(values[k]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace

std::string to_csv(const Trajectory<CircleSwarm>& traj) {
    return angle_table(traj, "theta_", [&](std::size_t i) { return traj[i].state.angles(); });
}

std::string sin_plot_csv(const Trajectory<CircleSwarm>& traj) {
    return angle_table(traj, "sin_", [&](std::size_t i) { return Vector(traj[i].state.angles().array().sin()); });
}

std::string velocity_plot_csv(const Trajectory<CircleSwarm>& traj, const GraphSequence& schedule, double alpha,
                              const CouplingProfile& profile) {
    return angle_table(traj, "dtheta_", [&](std::size_t i) {
        return ct_rhs(traj[i].state, schedule.at(traj[i].t), alpha, profile);
    });
}

}  // namespace circsync
