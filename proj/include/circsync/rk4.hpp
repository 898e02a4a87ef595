#pragma once

#include "circsync/graph.hpp"

#include <algorithm>
#include <cmath>

namespace circsync {

/// Fixed-step integration settings shared by every continuous-time simulator.
struct StepOptions {
    double t_end = 10.0;
    double h = 0.01;
    /// Emit every `sample_every`-th step; t = 0 and t_end are always emitted.
    int sample_every = 1;

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw ArgumentError("step size h must be positive");
        }
        if (!(t_end > 0.0) || !std::isfinite(t_end)) {
            throw ArgumentError("t_end must be positive");
        }
        if (sample_every < 1) {
            throw ArgumentError("sample_every must be >= 1");
        }
    }

    long step_count() const { return static_cast<long>(std::ceil(t_end / h - 1e-9)); }
};

namespace detail {

struct Rk4Workspace {
    Vector k1, k2, k3, k4, tmp;
    explicit Rk4Workspace(Eigen::Index n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}
};

/// One classical RK4 step of size h on a fixed graph.
/// `rhs(g, y, dy)` writes dy/dt into dy.
template <class Rhs>
void rk4_advance(const Rhs& rhs, const WeightedDigraph& g, Vector& y, double h, Rk4Workspace& w) {
    rhs(g, y, w.k1);
    w.tmp = y + (0.5 * h) * w.k1;
    rhs(g, w.tmp, w.k2);
    w.tmp = y + (0.5 * h) * w.k2;
    rhs(g, w.tmp, w.k3);
    w.tmp = y + h * w.k3;
    rhs(g, w.tmp, w.k4);
    y += (h / 6.0) * (w.k1 + 2.0 * w.k2 + 2.0 * w.k3 + w.k4);
}

}  // namespace detail

/// Integrates dy/dt = rhs(G(t), y) with classical fixed-step RK4.
///
/// Step i covers [i·h, min((i+1)·h, t_end)]. A step that straddles a schedule
/// switch is split at the switch so every RK4 stage sees a single graph.
/// `emit(t, y)` receives t = 0, every `sample_every`-th step and the final step.
template <class Rhs, class Emit>
void integrate_rk4(const GraphSequence& seq, Vector y, const StepOptions& opt, const Rhs& rhs,
                   Emit&& emit) {
    opt.validate();
    detail::Rk4Workspace work(y.size());
    emit(0.0, static_cast<const Vector&>(y));
    const long steps = opt.step_count();
    for (long i = 0; i < steps; ++i) {
        const double t0 = static_cast<double>(i) * opt.h;
        const double t1 = (i + 1 == steps) ? opt.t_end : std::min(static_cast<double>(i + 1) * opt.h, opt.t_end);
        double t = t0;
        while (t < t1) {
            double stop = t1;
            if (!seq.is_constant()) {
                if (auto sw = seq.next_switch_after(t); sw && *sw < t1) {
                    stop = *sw;
                }
            }
            detail::rk4_advance(rhs, seq.at(0.5 * (t + stop)), y, stop - t, work);
            t = stop;
        }
        if ((i + 1) % opt.sample_every == 0 || i + 1 == steps) {
            emit(t1, static_cast<const Vector&>(y));
        }
    }
}

}  // namespace circsync
