#pragma once

#include "circsync/graph.hpp"
#include "circsync/rk4.hpp"
#include "circsync/trajectory.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace circsync {

/// Wraps to (−π, π]; wrap(−π) = π. Throws ArgumentError for non-finite input.
double wrap(double theta);

/// Angle canonically wrapped to (−π, π].
struct Angle {
    double value;
    explicit Angle(double theta) : value(wrap(theta)) {}
};

/// Length of the shorter arc between two angles, in [0, π].
double arc_distance(double a, double b);

/// N ≥ 1 angles, each wrapped to (−π, π].
class CircleSwarm {
public:
    CircleSwarm() = default;
    explicit CircleSwarm(Vector angles);
    explicit CircleSwarm(std::initializer_list<double> angles);

    int size() const noexcept { return static_cast<int>(theta_.size()); }
    double operator[](int k) const { return theta_[k]; }
    const Vector& angles() const noexcept { return theta_; }

    /// Every angle shifted by `offset` (then rewrapped).
    CircleSwarm rotated(double offset) const;

    bool operator==(const CircleSwarm& other) const { return theta_ == other.theta_; }

private:
    Vector theta_;
};

/// Regularly spaced configuration θ_k = phase + k·spacing.
CircleSwarm spaced_swarm(int n, double spacing, double phase = 0.0);

double max_pairwise_arc_distance(const CircleSwarm& s);
/// (1/N)·|Σ e^{iθ_k}|.
double order_parameter(const CircleSwarm& s);
/// ½ Σ_k Σ_j a_jk (2 sin((θ_j − θ_k)/2))².
double v_circ(const CircleSwarm& s, const WeightedDigraph& g);

enum class ProfileKind { Sine, G };

/// 2π-periodic odd coupling function with its even potential.
///
/// The potential P satisfies P' = gain·f: gain is 2 for the sine profile
/// (P = (2 sin(θ/2))², f = sin) and 1 for the g profile. The continuous-time
/// law is dθ_k/dt = α·gain·Σ_j a_jk f(θ_j − θ_k), which is the gradient flow
/// −α ∂V/∂θ_k of V = ½ Σ_k Σ_j a_jk P(θ_j − θ_k) on undirected graphs.
class CouplingProfile {
public:
    static CouplingProfile sine();
    /// Piecewise-linear profile: slope a on |θ| < π/N, slope −a/(N−1) outside,
    /// zero at ±π, kinks at ±π/N blended quadratically over ±epsilon.
    /// Default epsilon is π/(20N); epsilon = 0 keeps the kinks.
    static CouplingProfile g(double a, int n, std::optional<double> epsilon = std::nullopt);

    ProfileKind kind() const noexcept { return kind_; }
    std::string name() const;
    double gain() const noexcept { return kind_ == ProfileKind::Sine ? 2.0 : 1.0; }
    double a() const noexcept { return a_; }
    int n() const noexcept { return n_; }
    double epsilon() const noexcept { return eps_; }

    double f(double theta) const;
    /// f'(θ).
    double slope(double theta) const;
    double potential(double theta) const;

private:
    CouplingProfile(ProfileKind kind, double a, int n, double eps);

    ProfileKind kind_;
    double a_ = 1.0;
    int n_ = 0;
    double eps_ = 0.0;
    // Precomputed breakpoints of the g profile.
    double joint_ = 0.0;
    double outer_slope_ = 0.0;
    double f_blend_start_ = 0.0;
    double p_blend_start_ = 0.0;
    double f_blend_end_ = 0.0;
    double p_blend_end_ = 0.0;
};

CouplingProfile make_profile(std::string_view kind, double a = 1.0, int n = 0,
                             std::optional<double> epsilon = std::nullopt);

/// Angular velocities α·gain·Σ_j a_jk f(θ_j − θ_k).
Vector ct_rhs(const CircleSwarm& s, const WeightedDigraph& g, double alpha,
              const CouplingProfile& profile = CouplingProfile::sine());

/// 2α·Proj_{x_k}(Σ_j a_jk (x_j − x_k)) with x_k = e^{iθ_k}, as vectors in R².
std::vector<std::array<double, 2>> ct_rhs_projection_form(const CircleSwarm& s, const WeightedDigraph& g,
                                                          double alpha);

/// θ_k ← arg(Σ_j a_jk e^{iθ_j} + β e^{iθ_k}) for every agent (or only those in
/// `subset`). A zero sum keeps the current angle; agents without in-neighbors
/// are left untouched.
CircleSwarm dt_step(const CircleSwarm& s, const WeightedDigraph& g, double beta);
CircleSwarm dt_step(const CircleSwarm& s, const WeightedDigraph& g, double beta, std::span<const int> subset);

/// RK4 integration of ct_rhs over the schedule. Internal angles are unwrapped;
/// each emitted sample is wrapped.
Trajectory<CircleSwarm> integrate(const CircleSwarm& s0, const GraphSequence& schedule, double alpha,
                                  const CouplingProfile& profile, const StepOptions& opt);

/// Same integration, returning the unwrapped final lift only.
Vector integrate_final(const Vector& theta0, const GraphSequence& schedule, double alpha,
                       const CouplingProfile& profile, const StepOptions& opt);

/// `t,theta_1,...,theta_N`.
std::string to_csv(const Trajectory<CircleSwarm>& traj);
/// `t,sin_1,...,sin_N`.
std::string sin_plot_csv(const Trajectory<CircleSwarm>& traj);
/// `t,dtheta_1,...,dtheta_N` evaluated from the vector field at each sample.
std::string velocity_plot_csv(const Trajectory<CircleSwarm>& traj, const GraphSequence& schedule, double alpha,
                              const CouplingProfile& profile);

namespace detail {
void circle_rhs_flat(const WeightedDigraph& g, double alpha, const CouplingProfile& profile, const double* theta,
                     double* dtheta);
}  // namespace detail

}  // namespace circsync
