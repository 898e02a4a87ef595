#include "circsync/aux_consensus.hpp"

#include "circsync/vector_consensus.hpp"

#include <cmath>
#include <sstream>

namespace circsync {

AugmentedState embed_angles(const CircleSwarm& s, double alpha, std::optional<double> gain) {
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    AugmentedState a;
    a.angles = s;
    a.aux.resize(s.size(), 2);
    for (int k = 0; k < s.size(); ++k) {
        a.aux(k, 0) = std::cos(s[k]);
        a.aux(k, 1) = std::sin(s[k]);
    }
    a.gain = gain.value_or(5.0 * alpha);
    if (!(a.gain > 0.0)) {
        throw ArgumentError("tracking gain K must be positive");
    }
    return a;
}

namespace {

void check_state(const AugmentedState& s, int n) {
    if (s.size() != n || s.aux.rows() != n || s.aux.cols() != 2) {
        throw ArgumentError("augmented state does not match the graph size");
    }
    if (!s.aux.allFinite()) {
        throw ArgumentError("auxiliary variables must be finite");
    }
    if (!(s.gain > 0.0)) {
        throw ArgumentError("tracking gain K must be positive");
    }
}

// Layout: θ_1..θ_N, then w_1x, w_1y, ..., w_Nx, w_Ny.
void flat_rhs(const WeightedDigraph& g, double alpha, double gain, const double* y, double* dy,
              std::vector<bool>& degenerate) {
    const int n = g.size();
    detail::consensus_rhs_flat(g, alpha, 2, y + n, dy + n);
    for (int k = 0; k < n; ++k) {
        const double wx = y[n + 2 * k];
        const double wy = y[n + 2 * k + 1];
        const double r = std::hypot(wx, wy);
        if (r < kDegenerateAuxNorm) {
            dy[k] = 0.0;
            degenerate[static_cast<std::size_t>(k)] = true;
            continue;
        }
        dy[k] = gain * std::sin(std::atan2(wy, wx) - y[k]);
    }
}

}  // namespace

AuxVelocity aux_rhs(const AugmentedState& s, const WeightedDigraph& g, double alpha) {
    check_state(s, g.size());
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    const int n = g.size();
    Vector y(3 * n);
    y.head(n) = s.angles.angles();
    for (int k = 0; k < n; ++k) {
        y[n + 2 * k] = s.aux(k, 0);
        y[n + 2 * k + 1] = s.aux(k, 1);
    }
    Vector dy(3 * n);
    AuxVelocity v;
    v.degenerate.assign(static_cast<std::size_t>(n), false);
    flat_rhs(g, alpha, s.gain, y.data(), dy.data(), v.degenerate);
    v.dtheta = dy.head(n);
    v.daux.resize(n, 2);
    for (int k = 0; k < n; ++k) {
        v.daux(k, 0) = dy[n + 2 * k];
        v.daux(k, 1) = dy[n + 2 * k + 1];
    }
    return v;
}

bool AuxRun::any_degenerate() const {
    for (bool d : degenerate) {
        if (d) {
            return true;
        }
    }
    return false;
}

AuxRun simulate_aux(const AugmentedState& s0, const GraphSequence& schedule, double alpha, const StepOptions& opt) {
    const int n = schedule.vertex_count();
    check_state(s0, n);
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    Vector y(3 * n);
    y.head(n) = s0.angles.angles();
    for (int k = 0; k < n; ++k) {
        y[n + 2 * k] = s0.aux(k, 0);
        y[n + 2 * k + 1] = s0.aux(k, 1);
    }
    AuxRun run;
    run.degenerate.assign(static_cast<std::size_t>(n), false);
    run.trajectory.meta()["algorithm"] = "aux_consensus";
    run.trajectory.meta()["alpha"] = format_double(alpha);
    run.trajectory.meta()["gain"] = format_double(s0.gain);
    auto rhs = [&](const WeightedDigraph& g, const Vector& state, Vector& dy) {
        flat_rhs(g, alpha, s0.gain, state.data(), dy.data(), run.degenerate);
    };
    integrate_rk4(schedule, std::move(y), opt, rhs, [&](double t, const Vector& state) {
        AugmentedState s;
        s.angles = CircleSwarm(Vector(state.head(n)));
        s.aux.resize(n, 2);
        for (int k = 0; k < n; ++k) {
            s.aux(k, 0) = state[n + 2 * k];
            s.aux(k, 1) = state[n + 2 * k + 1];
        }
        s.gain = s0.gain;
        run.trajectory.push(t, std::move(s));
    });
    return run;
}

std::string to_csv(const Trajectory<AugmentedState>& traj) {
    std::ostringstream out;
    out << 't';
    const int n = traj.empty() ? 0 : traj.front().state.size();
    for (int k = 0; k < n; ++k) {
        out << ",theta_" << k + 1;
    }
    for (int k = 0; k < n; ++k) {
        out << ",w_" << k + 1 << "_x,w_" << k + 1 << "_y";
    }
    out << '\n';
    for (const auto& sample : traj) {
        out << format_double(sample.t);
        for (int k = 0; k < n; ++k) {
            out << ',' << format_double(sample.state.angles[k]);
        }
        for (int k = 0; k < n; ++k) {
            out << ',' << format_double(sample.state.aux(k, 0)) << ',' << format_double(sample.state.aux(k, 1));
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace circsync
