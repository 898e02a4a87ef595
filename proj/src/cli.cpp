#include "circsync/cli.hpp"

#include "circsync/aux_consensus.hpp"
#include "circsync/equilibria.hpp"
#include "circsync/gossip.hpp"
#include "circsync/graph_io.hpp"
#include "circsync/io.hpp"
#include "circsync/rng.hpp"
#include "circsync/scenarios.hpp"
#include "circsync/vector_consensus.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

namespace circsync::cli {

using nlohmann::json;

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"simulate", "equilibria", "gossip", "scenario",
                                                "vicsek",   "aux",        "validate"};
    return names;
}

json default_config(const std::string& command) {
    json c = {{"seed", nullptr}, {"out", "out"}};
    if (command == "simulate") {
        c.update({{"space", "circle"},
                  {"mode", "ct"},
                  {"graph", "ring_undirected"},
                  {"n", 5},
                  {"branching", 2},
                  {"schedule", nullptr},
                  {"initial", "random"},
                  {"splay_a", 1},
                  {"alpha", 1.0},
                  {"beta", 1.0},
                  {"profile", "sine"},
                  {"a", 1.0},
                  {"epsilon", nullptr},
                  {"h", 0.01},
                  {"t_end", 10.0},
                  {"steps", 100},
                  {"sample_every", 1},
                  {"dim", 1},
                  {"bound", 0.9},
                  {"sync_tolerance", 1e-6}});
    } else if (command == "equilibria") {
        c.update({{"graph", "ring_undirected"},
                  {"n", 5},
                  {"branching", 2},
                  {"profile", "sine"},
                  {"a", 1.0},
                  {"epsilon", nullptr},
                  {"seeds", 20},
                  {"splay_seeds", true},
                  {"threads", 1}});
    } else if (command == "gossip") {
        c.update({{"graph", "complete"},
                  {"n", 2},
                  {"branching", 2},
                  {"schedule", nullptr},
                  {"variant", "jump"},
                  {"beta", 1.0},
                  {"alpha", 1.0},
                  {"trials", 1000},
                  {"max_steps", 100000},
                  {"threads", 0},
                  {"exact", true},
                  {"n_symbols", nullptr},
                  {"per_trial", false},
                  {"histogram_bins", 20},
                  {"sync_tolerance", 1e-6}});
    } else if (command == "scenario") {
        c.update({{"kind", nullptr}, {"params", json::object()}, {"h", 0.01}, {"t_end", nullptr}, {"sample_every", 10}});
    } else if (command == "vicsek") {
        c.update({{"n", 8}, {"ring_radius", 1.0}, {"radius", 1.0}, {"steps", 10}, {"perturb", 0.0}});
    } else if (command == "aux") {
        c.update({{"graph", "ring_undirected"},
                  {"n", 5},
                  {"branching", 2},
                  {"schedule", nullptr},
                  {"initial", "random"},
                  {"splay_a", 1},
                  {"alpha", 1.0},
                  {"gain", nullptr},
                  {"h", 0.01},
                  {"t_end", 50.0},
                  {"sample_every", 10},
                  {"sync_tolerance", 1e-6}});
    } else if (command == "validate") {
        c = {{"target", nullptr}, {"config", json::object()}};
    } else {
        throw ConfigError("command", "unknown command '" + command + "'");
    }
    return c;
}

// ---------------------------------------------------------------------------
// Typed access

namespace {

double num(const json& c, const std::string& key) {
    const auto& v = c.at(key);
    if (!v.is_number()) {
        throw ConfigError(key, "must be a number");
    }
    return v.get<double>();
}

double positive(const json& c, const std::string& key) {
    const double v = num(c, key);
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(key, "must be positive");
    }
    return v;
}

long integer(const json& c, const std::string& key, long min) {
    const auto& v = c.at(key);
    if (!v.is_number_integer()) {
        throw ConfigError(key, "must be an integer");
    }
    const long x = v.get<long>();
    if (x < min) {
        throw ConfigError(key, "must be >= " + std::to_string(min));
    }
    return x;
}

std::string str(const json& c, const std::string& key) {
    const auto& v = c.at(key);
    if (!v.is_string()) {
        throw ConfigError(key, "must be a string");
    }
    return v.get<std::string>();
}

bool boolean(const json& c, const std::string& key) {
    const auto& v = c.at(key);
    if (!v.is_boolean()) {
        throw ConfigError(key, "must be true or false");
    }
    return v.get<bool>();
}

std::string one_of(const json& c, const std::string& key, std::initializer_list<const char*> options) {
    const std::string v = str(c, key);
    std::string joined;
    for (const char* o : options) {
        if (v == o) {
            return v;
        }
        joined += joined.empty() ? o : std::string(", ") + o;
    }
    throw ConfigError(key, "must be one of " + joined);
}

std::uint64_t seed_of(const json& c) {
    const auto& v = c.at("seed");
    if (v.is_null()) {
        throw ConfigError("seed", "required for stochastic runs (use --seed)");
    }
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("seed", "must be a non-negative 64-bit integer");
    }
    return v.get<std::uint64_t>();
}

template <class F>
auto field(const std::string& key, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key, e.what());
    }
}

WeightedDigraph graph_literal(const json& spec, const json& c) {
    if (spec.is_string()) {
        json literal = {{"kind", spec},
                        {"params", {{"n", c.at("n")}, {"branching", c.contains("branching") ? c.at("branching") : json(2)}}}};
        return graph_from_json(literal);
    }
    return graph_from_json(spec);
}

WeightedDigraph build_graph(const json& c) {
    return field("graph", [&] { return graph_literal(c.at("graph"), c); });
}

/// Constant graph unless `schedule` = {graphs: [...], durations?: [...], periodic?: bool}.
/// Without durations the sequence is discrete-time (unit steps).
GraphSequence build_schedule(const json& c, const WeightedDigraph& g) {
    if (!c.contains("schedule") || c.at("schedule").is_null()) {
        return GraphSequence::constant(g);
    }
    return field("schedule", [&] {
        const json& s = c.at("schedule");
        if (!s.is_object() || !s.contains("graphs") || !s.at("graphs").is_array() || s.at("graphs").empty()) {
            throw ConfigError("schedule", "needs a non-empty 'graphs' array");
        }
        const bool periodic = s.value("periodic", true);
        std::vector<WeightedDigraph> graphs;
        for (const auto& literal : s.at("graphs")) {
            graphs.push_back(graph_literal(literal, c));
        }
        std::optional<double> delta;
        if (s.contains("delta")) {
            delta = s.at("delta").get<double>();
        }
        if (!s.contains("durations")) {
            return GraphSequence::discrete(std::move(graphs), periodic, delta);
        }
        const auto& d = s.at("durations");
        if (!d.is_array() || d.size() != graphs.size()) {
            throw ConfigError("schedule.durations", "must list one duration per graph");
        }
        std::vector<GraphSequence::Segment> segs;
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            segs.push_back({graphs[i], d[i].get<double>()});
        }
        return GraphSequence::piecewise(std::move(segs), periodic, delta);
    });
}

CircleSwarm build_circle_initial(const json& c, int n) {
    return field("initial", [&]() -> CircleSwarm {
        const json& init = c.at("initial");
        if (init.is_array()) {
            if (static_cast<int>(init.size()) != n) {
                throw ConfigError("initial", "has " + std::to_string(init.size()) + " angles for " +
                                                 std::to_string(n) + " agents");
            }
            Vector th(n);
            for (int k = 0; k < n; ++k) {
                th[k] = init[static_cast<std::size_t>(k)].get<double>();
            }
            return CircleSwarm(th);
        }
        const std::string mode = init.is_string() ? init.get<std::string>() : "";
        if (mode == "random") {
            Rng rng = Rng::substream(seed_of(c), {0x696e6974ULL});
            Vector th(n);
            for (int k = 0; k < n; ++k) {
                th[k] = rng.uniform(-kPi, kPi);
            }
            return CircleSwarm(th);
        }
        if (mode == "splay") {
            return spaced_swarm(n, kTwoPi * static_cast<double>(integer(c, "splay_a", 0)) / n);
        }
        throw ConfigError("initial", "must be an array of angles, \"random\" or \"splay\"");
    });
}

VectorSwarm build_vector_initial(const json& c, int n) {
    const int dim = static_cast<int>(integer(c, "dim", 1));
    return field("initial", [&]() -> VectorSwarm {
        const json& init = c.at("initial");
        Matrix x(n, dim);
        if (init.is_array()) {
            if (static_cast<int>(init.size()) != n) {
                throw ConfigError("initial", "needs one point per agent");
            }
            for (int k = 0; k < n; ++k) {
                const json& p = init[static_cast<std::size_t>(k)];
                if (p.is_number() && dim == 1) {
                    x(k, 0) = p.get<double>();
                    continue;
                }
                if (!p.is_array() || static_cast<int>(p.size()) != dim) {
                    throw ConfigError("initial", "point " + std::to_string(k + 1) + " must have " +
                                                     std::to_string(dim) + " coordinates");
                }
                for (int d = 0; d < dim; ++d) {
                    x(k, d) = p[static_cast<std::size_t>(d)].get<double>();
                }
            }
            return VectorSwarm(x);
        }
        if (init == "random") {
            Rng rng = Rng::substream(seed_of(c), {0x696e6974ULL});
            for (int k = 0; k < n; ++k) {
                for (int d = 0; d < dim; ++d) {
                    x(k, d) = rng.uniform(-1.0, 1.0);
                }
            }
            return VectorSwarm(x);
        }
        throw ConfigError("initial", "must be an array of points or \"random\"");
    });
}

CouplingProfile build_profile(const json& c, int n) {
    const std::string kind = one_of(c, "profile", {"sine", "g"});
    if (kind == "sine") {
        return CouplingProfile::sine();
    }
    std::optional<double> eps;
    if (!c.at("epsilon").is_null()) {
        eps = num(c, "epsilon");
    }
    return field("profile", [&] { return CouplingProfile::g(positive(c, "a"), n, eps); });
}

StepOptions step_options(const json& c, std::optional<double> default_t_end = std::nullopt) {
    StepOptions o;
    o.h = positive(c, "h");
    o.t_end = c.at("t_end").is_null() && default_t_end ? *default_t_end : positive(c, "t_end");
    o.sample_every = static_cast<int>(integer(c, "sample_every", 1));
    return o;
}

void check_keys(const std::string& command, const json& c) {
    const json defaults = default_config(command);
    for (const auto& [key, value] : c.items()) {
        (void)value;
        if (!defaults.contains(key)) {
            throw ConfigError(key, "unknown key for command '" + command + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// Output helpers

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::string> files;

    void write(const std::string& name, const std::string& content) {
        write_file_atomic(dir / name, content);
        files.push_back(name);
    }
};

void write_manifest(Outputs& out, const std::string& command, const json& config) {
    json manifest = {{"command", command}, {"config", config}, {"outputs", out.files}};
    write_file_atomic(out.dir / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Commands

int run_simulate(const json& c, Outputs& out, std::ostream& log) {
    const WeightedDigraph g = build_graph(c);
    const GraphSequence schedule = build_schedule(c, g);
    const int n = schedule.vertex_count();
    const std::string space = one_of(c, "space", {"circle", "vector"});
    const std::string mode = one_of(c, "mode", {"ct", "dt"});
    json summary;

    if (space == "vector") {
        const VectorSwarm x0 = build_vector_initial(c, n);
        ConsensusParams p{positive(c, "alpha"), positive(c, "bound")};
        VectorSimOptions o;
        o.mode = mode == "ct" ? TimeMode::Continuous : TimeMode::Discrete;
        if (o.mode == TimeMode::Continuous) {
            o.rk4 = step_options(c);
        } else {
            o.steps = integer(c, "steps", 0);
            o.sample_every = static_cast<int>(integer(c, "sample_every", 1));
        }
        const auto traj = simulate(x0, schedule, p, o);
        out.write("trajectory.csv", to_csv(traj));
        summary["final_max_pairwise_distance"] = max_pairwise_distance(traj.back().state);
        const auto m0 = mean(traj.front().state);
        const auto m1 = mean(traj.back().state);
        summary["mean_drift"] = (m1 - m0).cwiseAbs().maxCoeff();
    } else {
        const CircleSwarm s0 = build_circle_initial(c, n);
        Trajectory<CircleSwarm> traj;
        if (mode == "ct") {
            const CouplingProfile profile = build_profile(c, n);
            const double alpha = positive(c, "alpha");
            traj = integrate(s0, schedule, alpha, profile, step_options(c));
            out.write("trajectory.csv", to_csv(traj));
            out.write("sin.csv", sin_plot_csv(traj));
            out.write("velocity.csv", velocity_plot_csv(traj, schedule, alpha, profile));
        } else {
            const double beta = positive(c, "beta");
            const long steps = integer(c, "steps", 0);
            const int every = static_cast<int>(integer(c, "sample_every", 1));
            CircleSwarm s = s0;
            traj.push(0.0, s);
            for (long t = 0; t < steps; ++t) {
                s = dt_step(s, schedule.at_step(t), beta);
                if ((t + 1) % every == 0 || t + 1 == steps) {
                    traj.push(static_cast<double>(t + 1), s);
                }
            }
            out.write("trajectory.csv", to_csv(traj));
        }
        const double spread = max_pairwise_arc_distance(traj.back().state);
        summary["final_max_pairwise_arc_distance"] = spread;
        summary["final_order_parameter"] = order_parameter(traj.back().state);
        summary["synchronized"] = spread < positive(c, "sync_tolerance");
    }
    out.write("summary.json", summary.dump(2) + "\n");
    log << "simulate: wrote " << out.files.size() << " files to " << out.dir.string() << "\n";
    return kOk;
}

int run_equilibria(const json& c, Outputs& out, std::ostream& log) {
    const WeightedDigraph g = build_graph(c);
    const int n = g.size();
    const CouplingProfile profile = build_profile(c, n);
    std::vector<CircleSwarm> seeds;
    if (boolean(c, "splay_seeds")) {
        for (int a = 0; a < n; ++a) {
            seeds.push_back(spaced_swarm(n, kTwoPi * a / n));
        }
    }
    const long random_seeds = integer(c, "seeds", 0);
    if (random_seeds > 0) {
        const std::uint64_t seed = seed_of(c);
        for (long i = 0; i < random_seeds; ++i) {
            Rng rng = Rng::substream(seed, {static_cast<std::uint64_t>(i)});
            Vector th(n);
            for (int k = 0; k < n; ++k) {
                th[k] = rng.uniform(-kPi, kPi);
            }
            seeds.push_back(CircleSwarm(th));
        }
    }
    SearchOptions opt;
    opt.threads = static_cast<unsigned>(integer(c, "threads", 0));
    const auto reports = critical_point_search(g, profile, seeds, opt);
    json report;
    report["reports"] = json::array();
    long failed = 0;
    for (const auto& r : reports) {
        report["reports"].push_back(to_json(r));
        failed += r.converged ? 0 : 1;
    }
    report["failed_seeds"] = failed;
    if (is_unweighted(g) && is_undirected(g) && g.edge_count() > 0) {
        report["beta_bound"] = beta_bound(g);
    }
    out.write("equilibria.json", report.dump(2) + "\n");
    log << "equilibria: " << reports.size() - static_cast<std::size_t>(failed) << " of " << reports.size()
        << " seeds converged\n";
    return kOk;
}

GossipConfig gossip_config(const json& c) {
    GossipConfig cfg;
    cfg.beta = positive(c, "beta");
    cfg.variant = one_of(c, "variant", {"jump", "moderate"}) == "jump" ? GossipVariant::Jump : GossipVariant::Moderate;
    cfg.alpha = positive(c, "alpha");
    cfg.seed = seed_of(c);
    cfg.max_steps = integer(c, "max_steps", 0);
    cfg.sync_tolerance = positive(c, "sync_tolerance");
    return cfg;
}

int run_gossip(const json& c, Outputs& out, std::ostream& log) {
    const WeightedDigraph g = build_graph(c);
    const GraphSequence schedule = build_schedule(c, g);
    const GossipConfig cfg = gossip_config(c);
    const long trials = integer(c, "trials", 1);
    const auto result = monte_carlo_sync_time(schedule, cfg, trials, static_cast<unsigned>(integer(c, "threads", 0)),
                                              static_cast<int>(integer(c, "histogram_bins", 1)));
    json report = to_json(result);
    if (boolean(c, "exact") && cfg.variant == GossipVariant::Jump && schedule.is_constant()) {
        const int n = schedule.vertex_count();
        const int symbols = c.at("n_symbols").is_null() ? n : static_cast<int>(integer(c, "n_symbols", 1));
        try {
            report["exact_expected_steps"] = expected_sync_time(schedule.segment(0).graph, cfg, symbols);
        } catch (const CapacityError& e) {
            report["exact_expected_steps"] = nullptr;
            report["exact_note"] = e.what();
        } catch (const PreconditionError& e) {
            report["exact_expected_steps"] = nullptr;
            report["exact_note"] = e.what();
        }
    }
    out.write("gossip_report.json", report.dump(2) + "\n");
    if (boolean(c, "per_trial")) {
        out.write("trials.csv", per_trial_csv(result));
    }
    log << "gossip: mean " << format_double(result.mean) << " +/- " << format_double(result.standard_error) << " over "
        << result.synchronized << "/" << result.trials << " synchronized trials\n";
    return result.synchronized == result.trials ? kOk : kTimeout;
}

int run_scenario(const json& c, Outputs& out, std::ostream& log) {
    if (c.at("kind").is_null()) {
        throw ConfigError("kind", "scenario kind required (one of the registered scenarios)");
    }
    const std::string kind = str(c, "kind");
    ScenarioParams params;
    for (const auto& [key, value] : c.at("params").items()) {
        if (!value.is_number()) {
            throw ConfigError("params." + key, "must be a number");
        }
        params[key] = value.get<double>();
    }
    const Scenario sc = field("params", [&] { return make_scenario(kind, params); });
    const auto traj = integrate(sc.initial, sc.schedule, sc.alpha, sc.profile, step_options(c, sc.t_end));
    out.write("trajectory.csv", to_csv(traj));
    out.write("sin.csv", sin_plot_csv(traj));
    out.write("velocity.csv", velocity_plot_csv(traj, sc.schedule, sc.alpha, sc.profile));
    json groups = sc.groups;
    json info = {{"scenario", kind},
                 {"alpha", sc.alpha},
                 {"agents", sc.initial.size()},
                 {"groups", groups},
                 {"graph", graph_to_json(sc.schedule.segment(0).graph)}};
    out.write("scenario.json", info.dump(2) + "\n");
    log << "scenario " << kind << ": " << traj.size() << " samples\n";
    return kOk;
}

int run_vicsek(const json& c, Outputs& out, std::ostream& log) {
    const int n = static_cast<int>(integer(c, "n", 1));
    VicsekState s = field("ring_radius", [&] {
        return vicsek_divergence_setup(n, positive(c, "ring_radius"), positive(c, "radius"));
    });
    const double perturb = num(c, "perturb");
    if (perturb < 0.0) {
        throw ConfigError("perturb", "must be non-negative");
    }
    if (perturb > 0.0) {
        Rng rng = Rng::substream(seed_of(c), {0x7669637365ULL});
        for (int k = 0; k < n; ++k) {
            s.positions(k, 0) += perturb * s.radius * rng.uniform(-1.0, 1.0);
            s.positions(k, 1) += perturb * s.radius * rng.uniform(-1.0, 1.0);
        }
    }
    const long steps = integer(c, "steps", 0);
    std::ostringstream csv;
    csv << "step,edges";
    for (int k = 1; k <= n; ++k) {
        csv << ",x_" << k << ",y_" << k << ",heading_" << k;
    }
    csv << '\n';
    long drop_step = -1;
    for (long t = 0; t <= steps; ++t) {
        const int edges = proximity_graph(s).edge_count();
        if (edges == 0 && drop_step < 0) {
            drop_step = t;
        }
        csv << t << ',' << edges;
        for (int k = 0; k < n; ++k) {
            csv << ',' << format_double(s.positions(k, 0)) << ',' << format_double(s.positions(k, 1)) << ','
                << format_double(s.headings[k]);
        }
        csv << '\n';
        if (t < steps) {
            s = vicsek_step(s);
        }
    }
    out.write("vicsek.csv", csv.str());
    json report = {{"link_drop_step", drop_step < 0 ? json(nullptr) : json(drop_step)}};
    out.write("vicsek_report.json", report.dump(2) + "\n");
    log << "vicsek: links dropped at step " << drop_step << "\n";
    return kOk;
}

int run_aux(const json& c, Outputs& out, std::ostream& log) {
    const WeightedDigraph g = build_graph(c);
    const GraphSequence schedule = build_schedule(c, g);
    const int n = schedule.vertex_count();
    const double alpha = positive(c, "alpha");
    std::optional<double> gain;
    if (!c.at("gain").is_null()) {
        gain = positive(c, "gain");
    }
    const AugmentedState s0 = embed_angles(build_circle_initial(c, n), alpha, gain);
    const AuxRun run = simulate_aux(s0, schedule, alpha, step_options(c));
    out.write("aux.csv", to_csv(run.trajectory));
    const double spread = max_pairwise_arc_distance(run.trajectory.back().state.angles);
    json report = {{"final_max_pairwise_arc_distance", spread},
                   {"synchronized", spread < positive(c, "sync_tolerance")},
                   {"degenerate", run.degenerate}};
    out.write("aux_report.json", report.dump(2) + "\n");
    log << "aux: final spread " << format_double(spread) << "\n";
    return kOk;
}

void add(std::vector<Diagnostic>& out, Diagnostic::Severity sev, std::string field, std::string message) {
    out.push_back({sev, std::move(field), std::move(message)});
}

// Records a failed check and carries on, so one bad field does not hide the others.
template <typename F>
void attempt(std::vector<Diagnostic>& diags, F&& check) {
    try {
        check();
    } catch (const ConfigError& e) {
        add(diags, Diagnostic::Severity::Error, e.field(), e.what());
    } catch (const std::exception& e) {
        add(diags, Diagnostic::Severity::Error, "", e.what());
    }
}

// Checks that go beyond what building the inputs verifies.
void semantic_checks(const std::string& command, const json& c, std::vector<Diagnostic>& diags) {
    if (command == "simulate") {
        const WeightedDigraph g = build_graph(c);
        const GraphSequence schedule = build_schedule(c, g);
        const std::string space = one_of(c, "space", {"circle", "vector"});
        const std::string mode = one_of(c, "mode", {"ct", "dt"});
        attempt(diags, [&] {
            if (space == "vector") {
                build_vector_initial(c, schedule.vertex_count());
            } else {
                build_circle_initial(c, schedule.vertex_count());
            }
        });
        attempt(diags, [&] {
            if (mode == "ct") {
                step_options(c);
                positive(c, "alpha");
                if (space == "circle") {
                    build_profile(c, schedule.vertex_count());
                }
            } else {
                integer(c, "steps", 0);
            }
        });
        if (space == "vector" && mode == "dt") attempt(diags, [&] {
            const double alpha = positive(c, "alpha");
            const double b = positive(c, "bound");
            if (b >= 1.0) {
                add(diags, Diagnostic::Severity::Error, "bound", "contraction bound b must be < 1");
            }
            double dmax = 0.0;
            for (const auto& seg : schedule.segments()) {
                for (int k = 0; k < seg.graph.size(); ++k) {
                    dmax = std::max(dmax, in_degree(seg.graph, k));
                }
            }
            const double load = alpha * dmax;
            if (load >= 1.0) {
                add(diags, Diagnostic::Severity::Error, "alpha",
                    "alpha*d_max = " + format_double(load) + " violates the bound alpha*d_max < 1");
            } else if (load > b) {
                add(diags, Diagnostic::Severity::Error, "alpha",
                    "alpha*d_max = " + format_double(load) + " exceeds the contraction bound b = " + format_double(b));
            }
        });
        if (space == "circle" && mode == "dt") attempt(diags, [&] {
            const double beta = positive(c, "beta");
            for (const auto& seg : schedule.segments()) {
                if (is_unweighted(seg.graph) && is_undirected(seg.graph) && seg.graph.edge_count() > 0) {
                    const double bound = beta_bound(seg.graph);
                    if (beta < bound) {
                        add(diags, Diagnostic::Severity::Warning, "beta",
                            "beta = " + format_double(beta) + " is below the sufficient descent bound " +
                                format_double(bound) + "; V_circ may increase under synchronous updates");
                        break;
                    }
                }
            }
        });
    } else if (command == "equilibria") {
        const WeightedDigraph g = build_graph(c);
        if (!is_undirected(g)) {
            add(diags, Diagnostic::Severity::Error, "graph", "equilibrium search needs an undirected graph");
        }
        build_profile(c, g.size());
        if (integer(c, "seeds", 0) > 0) {
            seed_of(c);
        }
        boolean(c, "splay_seeds");
        integer(c, "threads", 0);
    } else if (command == "gossip") {
        const WeightedDigraph g = build_graph(c);
        build_schedule(c, g);
        gossip_config(c).validate();
        integer(c, "trials", 1);
        integer(c, "threads", 0);
        integer(c, "histogram_bins", 1);
        boolean(c, "exact");
        boolean(c, "per_trial");
        if (!c.at("n_symbols").is_null()) {
            integer(c, "n_symbols", 1);
        }
    } else if (command == "scenario") {
        if (c.at("kind").is_null()) {
            throw ConfigError("kind", "scenario kind required");
        }
        ScenarioParams params;
        if (!c.at("params").is_object()) {
            throw ConfigError("params", "must be an object");
        }
        for (const auto& [key, value] : c.at("params").items()) {
            if (!value.is_number()) {
                throw ConfigError("params." + key, "must be a number");
            }
            params[key] = value.get<double>();
        }
        const Scenario sc = field("params", [&] { return make_scenario(str(c, "kind"), params); });
        step_options(c, sc.t_end);
    } else if (command == "vicsek") {
        const int n = static_cast<int>(integer(c, "n", 1));
        field("ring_radius", [&] { return vicsek_divergence_setup(n, positive(c, "ring_radius"), positive(c, "radius")); });
        integer(c, "steps", 0);
        if (num(c, "perturb") < 0.0) {
            add(diags, Diagnostic::Severity::Error, "perturb", "must be non-negative");
        } else if (num(c, "perturb") > 0.0) {
            seed_of(c);
        }
    } else if (command == "aux") {
        const WeightedDigraph g = build_graph(c);
        const GraphSequence schedule = build_schedule(c, g);
        build_circle_initial(c, schedule.vertex_count());
        positive(c, "alpha");
        if (!c.at("gain").is_null()) {
            positive(c, "gain");
        }
        step_options(c);
    }
}

}  // namespace

std::vector<Diagnostic> validate(const std::string& command, const json& config) {
    std::vector<Diagnostic> diags;
    try {
        if (!config.is_object()) {
            throw ConfigError("", "config must be a JSON object");
        }
        check_keys(command, config);
        if (!config.at("out").is_string()) {
            throw ConfigError("out", "must be a path string");
        }
        semantic_checks(command, config, diags);
    } catch (const ConfigError& e) {
        add(diags, Diagnostic::Severity::Error, e.field(), e.what());
    } catch (const std::exception& e) {
        add(diags, Diagnostic::Severity::Error, "", e.what());
    }
    return diags;
}

json resolve_config(const std::string& command, const json& file_config, const std::vector<std::string>& args,
                    const std::optional<std::string>& seed, const std::optional<std::string>& out) {
    json config = default_config(command);
    json given = file_config;
    if (given.is_object() && given.contains("command") && given.contains("config")) {
        if (given.at("command") != command) {
            throw ConfigError("command", "manifest was written by '" + given.at("command").get<std::string>() +
                                             "', not '" + command + "'");
        }
        given = given.at("config");
    }
    if (!given.is_null()) {
        if (!given.is_object()) {
            throw ConfigError("", "config file must hold a JSON object");
        }
        for (const auto& [key, value] : given.items()) {
            config[key == "N" ? "n" : key] = value;
        }
    }

    std::vector<std::string> rest = args;
    if ((command == "scenario" || command == "validate") && !rest.empty() &&
        rest.front().find('=') == std::string::npos) {
        config[command == "scenario" ? "kind" : "target"] = rest.front();
        rest.erase(rest.begin());
    }
    std::optional<ScenarioParams> scenario_keys;
    if (command == "scenario" && config.at("kind").is_string()) {
        const auto& reg = scenario_registry();
        auto it = reg.find(config.at("kind").get<std::string>());
        if (it != reg.end()) {
            scenario_keys = it->second;
        }
    }
    for (const std::string& arg : rest) {
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ConfigError(arg, "expected key=value");
        }
        std::string key = arg.substr(0, eq);
        const std::string text = arg.substr(eq + 1);
        if (key == "N") {
            key = "n";
        }
        json value = json::parse(text, nullptr, false);
        if (value.is_discarded()) {
            value = text;
        }
        if (scenario_keys && scenario_keys->count(key)) {
            config["params"][key] = value;
        } else {
            config[key] = value;
        }
    }
    if (seed) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(*seed, &used);
            if (used != seed->size() || seed->front() == '-') {
                throw std::invalid_argument("trailing characters");
            }
            config["seed"] = static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw ConfigError("seed", "must be an unsigned 64-bit integer");
        }
    }
    if (out) {
        config["out"] = *out;
    }
    return config;
}

int run(const std::string& command, const json& config, std::ostream& log, bool quiet) {
    std::ostringstream sink;
    std::ostream& msg = quiet ? static_cast<std::ostream&>(sink) : log;

    if (command == "validate") {
        if (config.at("target").is_null()) {
            log << "validate: name the command to check, e.g. 'validate simulate --config run.json'\n";
            return kConfigError;
        }
        const std::string target = config.at("target").get<std::string>();
        json inner = default_config(target);
        for (const auto& [key, value] : config.at("config").items()) {
            inner[key] = value;
        }
        const auto diags = validate(target, inner);
        json list = json::array();
        bool errors = false;
        for (const auto& d : diags) {
            const bool error = d.severity == Diagnostic::Severity::Error;
            errors = errors || error;
            list.push_back({{"severity", error ? "error" : "warning"}, {"field", d.field}, {"message", d.message}});
        }
        log << list.dump(2) << "\n";
        return errors ? kConfigError : kOk;
    }

    const auto diags = validate(command, config);
    bool errors = false;
    for (const auto& d : diags) {
        const bool error = d.severity == Diagnostic::Severity::Error;
        errors = errors || error;
        log << (error ? "error: " : "warning: ") << d.message << "\n";
    }
    if (errors) {
        return kConfigError;
    }

    Outputs out{std::filesystem::path(config.at("out").get<std::string>()), {}};
    int code = kOk;
    try {
        if (command == "simulate") {
            code = run_simulate(config, out, msg);
        } else if (command == "equilibria") {
            code = run_equilibria(config, out, msg);
        } else if (command == "gossip") {
            code = run_gossip(config, out, msg);
        } else if (command == "scenario") {
            code = run_scenario(config, out, msg);
        } else if (command == "vicsek") {
            code = run_vicsek(config, out, msg);
        } else if (command == "aux") {
            code = run_aux(config, out, msg);
        } else {
            throw ConfigError("command", "unknown command '" + command + "'");
        }
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const PreconditionError& e) {
        log << "precondition failed: " << e.what() << "\n";
        return kPreconditionError;
    } catch (const CapacityError& e) {
        log << "capacity exceeded: " << e.what() << "\n";
        return kPreconditionError;
    } catch (const ArgumentError& e) {
        log << "error: " << e.what() << "\n";
        return kConfigError;
    }
    write_manifest(out, command, config);
    return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synchronization and consensus on the circle: simulations, equilibria, gossip."};
    app.set_help_flag("-h,--help", "Print help and exit");
    std::string command;
    std::vector<std::string> args;
    std::string config_path;
    std::string seed;
    std::string out_dir;
    bool quiet = false;
    std::vector<std::string> names = commands();
    names.push_back("run");
    app.add_option("command", command, "simulate | equilibria | gossip | scenario | vicsek | aux | validate | run")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("args", args, "key=value overrides (scenario/validate: kind or command first)");
    app.add_option("--config", config_path, "JSON config or run manifest")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Seed for stochastic parts (unsigned 64-bit)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--quiet", quiet, "Suppress progress messages");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    try {
        json file_config;
        if (!config_path.empty()) {
            const std::string text = read_file(config_path);
            try {
                file_config = json::parse(text);
            } catch (const json::parse_error& e) {
                err << "error: " << config_path << ": " << e.what() << "\n";
                return kConfigError;
            }
        }
        if (command == "run") {
            if (!file_config.is_object() || !file_config.contains("command")) {
                err << "error: 'run' needs --config pointing at a run manifest\n";
                return kConfigError;
            }
            command = file_config.at("command").get<std::string>();
        }
        const json config = resolve_config(command, file_config, args, seed.empty() ? std::nullopt : std::optional(seed),
                                           out_dir.empty() ? std::nullopt : std::optional(out_dir));
        if (command == "validate") {
            // The target's own settings come from the file and overrides.
            json inner = config;
            const json target = inner.at("target");
            inner.erase("target");
            inner.erase("config");
            json wrapped = {{"target", target}, {"config", inner}};
            if (config.contains("config") && config.at("config").is_object()) {
                for (const auto& [key, value] : config.at("config").items()) {
                    wrapped["config"][key] = value;
                }
            }
            return run(command, wrapped, out, quiet);
        }
        return run(command, config, quiet ? err : out, quiet);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
}

}  // namespace circsync::cli
