#include "circsync/vector_consensus.hpp"

#include <cmath>
#include <sstream>

namespace circsync {

VectorSwarm::VectorSwarm(Matrix points) : x(std::move(points)) {
    if (x.rows() < 1 || x.cols() < 1) {
        throw ArgumentError("a vector swarm needs N >= 1 agents of dimension n >= 1");
    }
    if (!x.allFinite()) {
        throw ArgumentError("agent states must be finite");
    }
}

void ConsensusParams::validate() const {
    if (!(alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    if (!(bound > 0.0 && bound < 1.0)) {
        throw ArgumentError("contraction bound b must lie in (0, 1)");
    }
}

namespace {

void check_sizes(const VectorSwarm& s, const WeightedDigraph& g) {
    if (s.size() != g.size()) {
        throw ArgumentError("swarm has " + std::to_string(s.size()) + " agents but graph has " +
                            std::to_string(g.size()) + " vertices");
    }
}

}  // namespace

void detail::consensus_rhs_flat(const WeightedDigraph& g, double alpha, int dim, const double* y,
                                double* dy) {
    const int n = g.size();
    for (int k = 0; k < n; ++k) {
        const double* xk = y + static_cast<std::ptrdiff_t>(k) * dim;
        double* out = dy + static_cast<std::ptrdiff_t>(k) * dim;
        for (int c = 0; c < dim; ++c) {
            out[c] = 0.0;
        }
        for (const auto& e : g.in_edges(k)) {
            const double* xj = y + static_cast<std::ptrdiff_t>(e.from) * dim;
            for (int c = 0; c < dim; ++c) {
                out[c] += e.weight * (xj[c] - xk[c]);
            }
        }
        for (int c = 0; c < dim; ++c) {
            out[c] *= alpha;
        }
    }
}

Matrix ct_rhs(const VectorSwarm& s, const WeightedDigraph& g, const ConsensusParams& p) {
    check_sizes(s, g);
    if (!(p.alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor y = s.x;
    RowMajor dy(y.rows(), y.cols());
    detail::consensus_rhs_flat(g, p.alpha, s.dim(), y.data(), dy.data());
    return dy;
}

VectorSwarm dt_step(const VectorSwarm& s, const WeightedDigraph& g, const ConsensusParams& p) {
    check_sizes(s, g);
    p.validate();
    for (int k = 0; k < g.size(); ++k) {
        const double load = p.alpha * in_degree(g, k);
        if (load > p.bound) {
            throw PreconditionError("gain condition violated at vertex " + std::to_string(k + 1) +
                                        ": alpha*d_in = " + format_double(load) + " exceeds b = " +
                                        format_double(p.bound),
                                    k);
        }
    }
    return VectorSwarm(s.x + ct_rhs(s, g, p));
}

double disagreement_cost(const VectorSwarm& s, const WeightedDigraph& g, Diagnostics* diag) {
    check_sizes(s, g);
    if (diag && !is_undirected(g)) {
        diag->push_back("disagreement cost evaluated on a directed graph; it is not a Lyapunov function there");
    }
    double v = 0.0;
    for (int k = 0; k < g.size(); ++k) {
        for (const auto& e : g.in_edges(k)) {
            v += e.weight * (s.x.row(e.from) - s.x.row(k)).squaredNorm();
        }
    }
    return 0.5 * v;
}

Trajectory<VectorSwarm> simulate(const VectorSwarm& x0, const GraphSequence& schedule,
                                 const ConsensusParams& p, const VectorSimOptions& opt) {
    if (x0.size() != schedule.vertex_count()) {
        throw ArgumentError("swarm size does not match the schedule's vertex count");
    }
    Trajectory<VectorSwarm> traj;
    traj.meta()["algorithm"] = opt.mode == TimeMode::Continuous ? "vector_consensus_ct" : "vector_consensus_dt";
    traj.meta()["alpha"] = format_double(p.alpha);

    if (opt.mode == TimeMode::Discrete) {
        p.validate();
        if (opt.steps < 0 || opt.sample_every < 1) {
            throw ArgumentError("discrete simulation needs steps >= 0 and sample_every >= 1");
        }
        VectorSwarm s = x0;
        traj.push(0.0, s);
        for (long t = 0; t < opt.steps; ++t) {
            s = dt_step(s, schedule.at_step(t), p);
            if ((t + 1) % opt.sample_every == 0 || t + 1 == opt.steps) {
                traj.push(static_cast<double>(t + 1), s);
            }
        }
        return traj;
    }

    if (!(p.alpha > 0.0)) {
        throw ArgumentError("alpha must be positive");
    }
    const int n = x0.size();
    const int dim = x0.dim();
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor init = x0.x;
    Vector y = Eigen::Map<const Vector>(init.data(), init.size());
    auto rhs = [&](const WeightedDigraph& g, const Vector& state, Vector& dy) {
        detail::consensus_rhs_flat(g, p.alpha, dim, state.data(), dy.data());
    };
    integrate_rk4(schedule, std::move(y), opt.rk4, rhs, [&](double t, const Vector& state) {
        RowMajor m = Eigen::Map<const RowMajor>(state.data(), n, dim);
        traj.push(t, VectorSwarm(Matrix(m)));
    });
    return traj;
}

Eigen::RowVectorXd mean(const VectorSwarm& s) { return s.x.colwise().mean(); }

double max_pairwise_distance(const VectorSwarm& s) {
    double best = 0.0;
    for (int j = 0; j < s.size(); ++j) {
        for (int k = j + 1; k < s.size(); ++k) {
            best = std::max(best, (s.x.row(j) - s.x.row(k)).norm());
        }
    }
    return best;
}

DecayFit fit_log_decay(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) {
        throw ArgumentError("fit_log_decay: mismatched series lengths");
    }
    const std::size_t start = t.size() / 2;
    double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
    std::size_t m = 0;
    for (std::size_t i = start; i < t.size(); ++i) {
        if (!(v[i] > 0.0)) {
            continue;
        }
        const double y = std::log(v[i]);
        st += t[i];
        sy += y;
        stt += t[i] * t[i];
        sty += t[i] * y;
        syy += y * y;
        ++m;
    }
    if (m < 2) {
        throw ArgumentError("fit_log_decay: fewer than two positive samples in the second half");
    }
    const double md = static_cast<double>(m);
    const double var_t = stt - st * st / md;
    const double cov = sty - st * sy / md;
    const double var_y = syy - sy * sy / md;
    DecayFit fit;
    fit.points = m;
    fit.slope = cov / var_t;
    fit.intercept = (sy - fit.slope * st) / md;
    fit.r_squared = var_y > 0.0 ? (cov * cov) / (var_t * var_y) : 1.0;
    return fit;
}

DecayFit fit_log_decay(const Trajectory<VectorSwarm>& traj) {
    std::vector<double> t, v;
    for (const auto& sample : traj) {
        t.push_back(sample.t);
        v.push_back(max_pairwise_distance(sample.state));
    }
    return fit_log_decay(t, v);
}

std::string to_csv(const Trajectory<VectorSwarm>& traj) {
    std::ostringstream out;
    out << 't';
    if (!traj.empty()) {
        const auto& s = traj.front().state;
        for (int k = 0; k < s.size(); ++k) {
            for (int c = 0; c < s.dim(); ++c) {
                out << ",x_" << k + 1 << '_' << c + 1;
            }
        }
    }
    out << '\n';
    for (const auto& sample : traj) {
        out << format_double(sample.t);
        for (int k = 0; k < sample.state.size(); ++k) {
            for (int c = 0; c < sample.state.dim(); ++c) {
                out << ',' << format_double(sample.state.x(k, c));
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace circsync
