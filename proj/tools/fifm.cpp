// fifm: simulation and verification toolkit for first-in-first-match
// spatial matching with reneging.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <chrono>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fifm/analytics.hpp"
#include "fifm/bipartite.hpp"
#include "fifm/cftp.hpp"
#include "fifm/errors.hpp"
#include "fifm/euclid.hpp"
#include "fifm/fkg.hpp"
#include "fifm/parallel.hpp"
#include "fifm/rng.hpp"
#include "fifm/simulator.hpp"
#include "fifm/verify.hpp"

namespace {

using json = nlohmann::json;
using namespace fifm;

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write " + path);
    out << text;
}

Space load_space(const std::string& path, double radius = 0.0) {
    Space space = space_from_json(read_file(path));
    if (radius > 0.0) space.radius = radius;
    return space;
}

json event_record_json(const Space& space, const EventLogRecord& rec) {
    (void)space;
    json j;
    j["t"] = rec.time;
    j["kind"] = event_kind_name(rec.kind);
    j["size"] = rec.state_size_after;
    switch (rec.kind) {
        case EventKind::MatchDeparture:
            j["ids"] = {rec.id_a, rec.id_b};
            break;
        case EventKind::Arrival:
            j["id"] = rec.id_a;
            break;
        default:
            j["id"] = rec.id_a;
            break;
    }
    return j;
}

int cmd_simulate(const std::string& space_path, double radius, double intensity, double mu,
                 double t_end, std::uint64_t seed, const std::string& log_path,
                 const std::string& stats_path, const std::string& initial_path,
                 double stats_dt) {
    Space space = load_space(space_path, radius);
    ModelParams params{intensity, mu};
    OrderedConfiguration initial;
    if (!initial_path.empty()) {
        initial = configuration_from_json(space, read_file(initial_path));
        assign_missing_patience(initial, params, seed ^ 0x1717u);
    }
    EventSeq events = generate_driving_process(space, params, 0.0, t_end, seed);
    SimOptions opts;
    opts.log_level = log_path.empty() ? LogLevel::None : LogLevel::Full;
    opts.sample_dt = stats_path.empty() ? 0.0 : stats_dt;
    SimResult result = simulate(space, params, initial, events, t_end, opts);

    if (!log_path.empty()) {
        std::ostringstream os;
        for (const auto& rec : result.log) os << event_record_json(space, rec).dump() << "\n";
        write_file(log_path, os.str());
    }
    if (!stats_path.empty()) {
        std::ostringstream os;
        os << "time,total,reds,blues\r\n";
        for (const auto& row : result.samples)
            os << g17(row.time) << "," << row.total << "," << row.reds << "," << row.blues
               << "\r\n";
        write_file(stats_path, os.str());
    }
    std::cout << "final state: " << result.final_state.size() << " particles, "
              << result.log.size() << " log records\n";
    std::cout << configuration_to_json(space, result.final_state) << "\n";
    return 0;
}

int cmd_cftp_sample(const std::string& space_path, double intensity, double mu,
                    std::int64_t replicas, std::uint64_t seed, const std::string& out_path) {
    Space space = load_space(space_path);
    ModelParams params{intensity, mu};
    std::vector<OrderedConfiguration> samples(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t i) {
        samples[static_cast<std::size_t>(i)] =
            sample_stationary_stream(space, params, seed, static_cast<std::uint64_t>(i) + 1);
    });
    std::ostringstream os;
    for (const auto& s : samples) os << configuration_to_json(space, s) << "\n";
    if (out_path.empty()) std::cout << os.str();
    else write_file(out_path, os.str());
    double mean = 0;
    for (const auto& s : samples) mean += static_cast<double>(s.size());
    mean /= static_cast<double>(replicas);
    std::cerr << replicas << " samples, mean count " << g17(mean) << "\n";
    return 0;
}

int cmd_density(const std::string& space_path, double intensity, double mu,
                const std::string& config_path, const std::string& form,
                const std::string& boundary_name) {
    Space space = load_space(space_path);
    ModelParams params{intensity, mu};
    json cfg = json::parse(read_file(config_path));
    json out;
    if (form == "detailed") {
        DetailedState state;
        for (const auto& item : cfg) {
            DetailedItem di;
            std::string c = item.at("color").get<std::string>();
            di.color = (c == "R" || c == "red") ? Color::Red : Color::Blue;
            if (space.is_finite()) {
                OrderedConfiguration one = configuration_from_json(
                    space, json::array({{{"pos", item.at("pos")}, {"color", c}}}).dump());
                di.pos = one.front().pos;
            } else {
                di.pos.x = item.at("pos").is_array() ? item.at("pos").at(0).get<double>()
                                                     : item.at("pos").get<double>();
                if (space.is_torus()) di.pos.y = item.at("pos").at(1).get<double>();
            }
            di.mark = item.at("mark").get<std::string>() == "u" ? Mark::Unmatched : Mark::Matched;
            state.push_back(di);
        }
        out["log_density"] = pi_hat_detailed(space, params, state).log_value;
    } else {
        OrderedConfiguration config = configuration_from_json(space, cfg.dump());
        if (form == "ordered") {
            out["log_density"] = pi_ordered(space, params, config).log_value;
        } else {
            std::vector<MarkedPoint> pts = marked_points(config);
            if (boundary_name.empty() || boundary_name == "free") {
                out["log_density"] = log_janossy_tilde(space, params, pts);
            } else if (boundary_name == "red") {
                out["log_density"] = log_janossy_boundary(space, params, pts, Boundary::red());
            } else if (boundary_name == "blue") {
                out["log_density"] = log_janossy_boundary(space, params, pts, Boundary::blue());
            } else {
                json bj = json::parse(read_file(boundary_name));
                std::vector<MarkedPoint> bpts;
                for (const auto& item : bj) {
                    MarkedPoint mp;
                    mp.pos.x = item.at("pos").get<double>();
                    std::string c = item.at("color").get<std::string>();
                    mp.color = (c == "R" || c == "red") ? Color::Red : Color::Blue;
                    bpts.push_back(mp);
                }
                out["log_density"] =
                    log_janossy_boundary(space, params, pts, Boundary::of_points(bpts));
            }
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_solve(const std::string& graph_path, double intensity, double mu, int max_len,
              const std::string& out_path) {
    auto graph = CompatibilityGraph::from_json(read_file(graph_path));
    ModelParams params{intensity, mu};
    auto solve = solve_stationary_truncated(graph, params, max_len);
    std::ostringstream os;
    os << "state,probability,product_form\r\n";
    for (std::size_t i = 0; i < solve.states.size(); ++i) {
        std::string name;
        for (int t : solve.states[i]) name += graph.name(t) + " ";
        if (!name.empty()) name.pop_back();
        os << "\"" << name << "\"," << g17(solve.probability[i]) << ","
           << g17(solve.product_form[i]) << "\r\n";
    }
    if (out_path.empty()) std::cout << os.str();
    else write_file(out_path, os.str());
    std::cout << "states: " << solve.states.size() << " (solved " << solve.solved_states
              << "), truncation bound " << g17(solve.truncation_bound) << ", max |diff| "
              << g17(solve.max_abs_diff) << "\n";
    return 0;
}

Boundary boundary_by_name(const std::string& name) {
    if (name == "red") return Boundary::red();
    if (name == "blue") return Boundary::blue();
    return Boundary::free();
}

VerificationReport run_fkg_sweep(const Space& space, const ModelParams& params,
                                 std::int64_t trials, int n_max, std::uint64_t seed) {
    VerificationReport rep;
    rep.check_name = "fkg";
    auto start = std::chrono::steady_clock::now();
    RandomConfigOptions gen;
    gen.max_points = n_max;
    bool pass = true;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        PointSet pool = random_configuration(space, seed, 0x11u, trial, gen);
        Rng rng(seed, 0x12u, trial);
        PointSet xi, gamma;
        for (const auto& p : pool) (rng.coin() ? xi : gamma).push_back(p);
        auto weak = fkg_weak_check(space, params, xi, gamma);
        PointSet lx, lg;
        for (const auto& p : pool) {
            if (rng.coin()) lx.push_back(p);
            if (rng.coin()) lg.push_back(p);
        }
        auto lattice = fkg_lattice_check(space, params, make_lattice_pair(lx, lg));
        auto split = product_split_check(space, params, pool);
        for (const auto* r : {&weak, &lattice, &split}) {
            if (!r->pass) {
                pass = false;
                if (rep.witnesses.size() < 5) rep.witnesses.push_back(r->witness);
            }
        }
    }
    rep.status = pass ? VerificationReport::Status::Pass : VerificationReport::Status::Fail;
    rep.detail = std::to_string(trials) + " randomized trials, n <= " + std::to_string(n_max);
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

VerificationReport run_holley_sweep(const Space& window, const ModelParams& params,
                                    std::int64_t trials, const std::string& zeta1,
                                    const std::string& zeta2, std::uint64_t seed) {
    VerificationReport rep;
    rep.check_name = "holley";
    auto start = std::chrono::steady_clock::now();
    Boundary hi = boundary_by_name(zeta1);
    Boundary lo = boundary_by_name(zeta2);
    bool pass = true;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        PointSet pool = random_configuration(window, seed, 0x21u, trial, {3.0, 4, true});
        Rng rng(seed, 0x22u, trial);
        PointSet eta, gamma;
        for (const auto& p : pool) {
            if (rng.coin()) eta.push_back(p);
            if (rng.coin()) gamma.push_back(p);
        }
        auto r = holley_condition_check(window, params, hi, lo, eta, gamma);
        if (!r.pass) {
            pass = false;
            if (rep.witnesses.size() < 5) rep.witnesses.push_back(r.witness);
        }
    }
    rep.status = pass ? VerificationReport::Status::Pass : VerificationReport::Status::Fail;
    rep.detail = std::to_string(trials) + " trials, zeta1=" + zeta1 + " zeta2=" + zeta2;
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

int report_exit(const std::vector<VerificationReport>& reports, const std::string& out_path) {
    bool all_pass = true;
    for (const auto& r : reports) {
        std::cout << r.line() << "\n";
        all_pass = all_pass && r.passed();
    }
    if (!out_path.empty()) write_file(out_path, reports_to_json(reports));
    return all_pass ? 0 : 1;
}

int cmd_decay(double side, double intensity, double mu, double t_end, std::int64_t replicas,
              std::uint64_t seed, const std::string& out_path) {
    Space space = make_torus(side);
    ModelParams params{intensity, mu};
    const double area = total_measure(space);
    std::vector<std::vector<double>> special(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t r) {
        Rng rng(seed, 0x31u, r);
        OrderedConfiguration init2;
        int n = rng.poisson(0.2 * area);
        for (int i = 0; i < n; ++i) {
            Particle p;
            p.pos = {rng.uniform(0.0, side), rng.uniform(0.0, side), -1};
            p.color = Color::Red;
            p.patience = rng.exponential(mu);
            p.id = -(i + 1);
            init2.push_back(p);
        }
        CoupledOptions copts;
        copts.sample_dt = 0.1;
        auto res = coupled_simulate(space, params, {}, init2, t_end, seed,
                                    static_cast<std::uint64_t>(r) + 1, copts);
        for (std::size_t k = 0; k < res.trace.times.size(); ++k)
            special[static_cast<std::size_t>(r)].push_back(res.trace.special_density(k));
    });
    std::size_t nt = special.empty() ? 0 : special[0].size();
    std::ostringstream os;
    os << "t,beta_S_mean,beta_S_ci_lo,beta_S_ci_hi,bound\r\n";
    double beta0 = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        double t = 0.1 * static_cast<double>(k);
        double mean = 0.0;
        for (const auto& row : special) mean += row[k];
        mean /= static_cast<double>(replicas);
        double var = 0.0;
        for (const auto& row : special) var += (row[k] - mean) * (row[k] - mean);
        var /= std::max<double>(1.0, static_cast<double>(replicas - 1));
        double se = std::sqrt(var / static_cast<double>(replicas));
        if (k == 0) beta0 = mean;
        os << g17(t) << "," << g17(mean) << "," << g17(mean - 1.96 * se) << ","
           << g17(mean + 1.96 * se) << "," << g17(beta0 * std::exp(-mu * t)) << "\r\n";
    }
    if (out_path.empty()) std::cout << os.str();
    else write_file(out_path, os.str());
    return 0;
}

int cmd_tau(double side, double k_side, double intensity, double mu, int replicas,
            std::uint64_t seed, double t_max, double confirm, const std::string& out_path) {
    Space space = make_torus(side);
    ModelParams params{intensity, mu};
    TorusWindow window{k_side};
    CouplingTimeOptions opts;
    opts.t_max = t_max;
    opts.confirm = confirm;
    auto res = estimate_coupling_time(space, params, window, replicas, seed, opts);
    std::ostringstream os;
    os << "replica,tau,censored\r\n";
    for (std::size_t i = 0; i < res.tau.size(); ++i)
        os << i << "," << g17(res.tau[i]) << "," << (res.censored[i] ? 1 : 0) << "\r\n";
    if (out_path.empty()) std::cout << os.str();
    else write_file(out_path, os.str());
    std::cout << "mean tau " << g17(res.mean) << " (se " << g17(res.stderr_mean)
              << "), censored " << res.censored_count << "/" << replicas
              << ", residual reappearance bound " << g17(std::exp(-mu * confirm)) << "\n";
    return 0;
}

int cmd_regen(const std::string& space_path, double intensity, double mu,
              std::int64_t trials, std::uint64_t seed) {
    Space space = load_space(space_path);
    ModelParams params{intensity, mu};
    auto [p, se] = estimate_regeneration_probability(space, params, trials, seed);
    double exact = std::exp(-arrival_rate(space, params) / mu);
    json out;
    out["estimate"] = p;
    out["stderr"] = se;
    out["exact"] = exact;
    std::cout << out.dump(2) << "\n";
    return std::fabs(p - exact) <= 4.0 * se ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-in-first-match spatial matching: simulation and verification"};
    app.require_subcommand(1);

    std::string space_path, graph_path, config_path, out_path, log_path, stats_path;
    std::string initial_path, boundary_name, form = "ordered", report_path;
    double intensity = 1.0, mu = 1.0, t_end = 10.0, stats_dt = 1.0;
    double side = 20.0, k_side = 2.0, t_max = 20.0, confirm = 5.0, radius = 0.0;
    std::uint64_t seed = 42;
    std::int64_t replicas = 1000, trials = 1000;
    int max_len = 5, n_max = 5;
    bool quick = false;

    auto* sim = app.add_subcommand("simulate", "run the forward construction");
    sim->add_option("--space", space_path)->required();
    sim->add_option("--intensity", intensity);
    sim->add_option("--mu", mu);
    sim->add_option("--t-end", t_end);
    sim->add_option("--seed", seed);
    sim->add_option("--radius", radius);
    sim->add_option("--log", log_path);
    sim->add_option("--stats", stats_path);
    sim->add_option("--stats-dt", stats_dt);
    sim->add_option("--initial", initial_path);

    auto* cftp = app.add_subcommand("cftp-sample", "perfect stationary samples");
    cftp->add_option("--space", space_path)->required();
    cftp->add_option("--intensity", intensity);
    cftp->add_option("--mu", mu);
    cftp->add_option("--replicas", replicas);
    cftp->add_option("--seed", seed);
    cftp->add_option("--out", out_path);

    auto* dens = app.add_subcommand("density", "evaluate stationary densities");
    dens->add_option("--space", space_path)->required();
    dens->add_option("--intensity", intensity);
    dens->add_option("--mu", mu);
    dens->add_option("--config", config_path)->required();
    dens->add_option("--form", form)->check(CLI::IsMember({"ordered", "detailed", "janossy"}));
    dens->add_option("--boundary", boundary_name);

    auto* solve = app.add_subcommand("solve", "truncated stationary solve on a graph");
    solve->add_option("--graph", graph_path)->required();
    solve->add_option("--intensity", intensity);
    solve->add_option("--mu", mu);
    solve->add_option("--max-len", max_len);
    solve->add_option("--out", out_path);

    auto* verify = app.add_subcommand("verify", "run verification checks");
    verify->require_subcommand(1);
    auto* v_balance = verify->add_subcommand("local-balance");
    v_balance->add_option("--graph", graph_path);
    v_balance->add_option("--intensity", intensity);
    v_balance->add_option("--mu", mu);
    v_balance->add_option("--max-len", max_len);
    auto* v_fkg = verify->add_subcommand("fkg");
    v_fkg->add_option("--space", space_path);
    v_fkg->add_option("--mu", mu);
    v_fkg->add_option("--intensity", intensity);
    v_fkg->add_option("--trials", trials);
    v_fkg->add_option("--n-max", n_max);
    v_fkg->add_option("--seed", seed);
    v_fkg->add_option("--report", report_path);
    auto* v_holley = verify->add_subcommand("holley");
    std::string zeta1 = "red", zeta2 = "free", window_path;
    v_holley->add_option("--window", window_path);
    v_holley->add_option("--zeta1", zeta1)->check(CLI::IsMember({"red", "free", "blue"}));
    v_holley->add_option("--zeta2", zeta2)->check(CLI::IsMember({"red", "free", "blue"}));
    v_holley->add_option("--trials", trials);
    v_holley->add_option("--mu", mu);
    v_holley->add_option("--seed", seed);
    auto* v_lemma = verify->add_subcommand("lemma-aux");
    v_lemma->add_option("--seed", seed);
    auto* v_pf = verify->add_subcommand("product-form");
    v_pf->add_option("--graph", graph_path);
    v_pf->add_option("--intensity", intensity);
    v_pf->add_option("--mu", mu);
    v_pf->add_option("--max-len", max_len);
    auto* v_all = verify->add_subcommand("all");
    v_all->add_flag("--quick", quick);
    v_all->add_option("--seed", seed);
    v_all->add_option("--report", report_path);

    auto* decay = app.add_subcommand("decay", "discrepancy decay on a torus");
    decay->add_option("--side", side);
    decay->add_option("--mu", mu);
    decay->add_option("--intensity", intensity);
    decay->add_option("--t-end", t_end);
    decay->add_option("--replicas", replicas);
    decay->add_option("--seed", seed);
    decay->add_option("--out", out_path);

    auto* tau = app.add_subcommand("tau", "coupling-time experiment");
    tau->add_option("--side", side);
    tau->add_option("--k-side", k_side);
    tau->add_option("--mu", mu);
    tau->add_option("--intensity", intensity);
    tau->add_option("--replicas", replicas);
    tau->add_option("--seed", seed);
    tau->add_option("--t-max", t_max);
    tau->add_option("--confirm", confirm);
    tau->add_option("--out", out_path);

    auto* regen = app.add_subcommand("regen", "regeneration-probability estimate");
    regen->add_option("--space", space_path)->required();
    regen->add_option("--intensity", intensity);
    regen->add_option("--mu", mu);
    regen->add_option("--trials", trials);
    regen->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(space_path, radius, intensity, mu, t_end, seed, log_path,
                                stats_path, initial_path, stats_dt);
        if (cftp->parsed())
            return cmd_cftp_sample(space_path, intensity, mu, replicas, seed, out_path);
        if (dens->parsed())
            return cmd_density(space_path, intensity, mu, config_path, form, boundary_name);
        if (solve->parsed()) return cmd_solve(graph_path, intensity, mu, max_len, out_path);
        if (decay->parsed())
            return cmd_decay(side, intensity, mu, t_end, replicas, seed, out_path);
        if (tau->parsed())
            return cmd_tau(side, k_side, intensity, mu, static_cast<int>(replicas), seed, t_max,
                           confirm, out_path);
        if (regen->parsed()) return cmd_regen(space_path, intensity, mu, trials, seed);
        if (verify->parsed()) {
            VerifyOptions vopts;
            vopts.seed = seed;
            if (v_balance->parsed() || v_pf->parsed()) {
                ModelParams params{intensity, mu};
                auto graph = graph_path.empty()
                                 ? CompatibilityGraph::make({"c"}, {"s"}, {{0, 0}}, {1.0, 1.0})
                                 : CompatibilityGraph::from_json(read_file(graph_path));
                if (v_balance->parsed()) {
                    auto rep = check_local_balance(graph, params, max_len);
                    std::cout << (rep.pass ? "PASS" : "FAIL") << " local-balance: max rel err "
                              << g17(rep.max_rel_err) << " over " << rep.transitions_checked
                              << " transitions\n";
                    if (!rep.pass) std::cout << "witness: " << rep.witness << "\n";
                    return rep.pass ? 0 : 1;
                }
                auto sres = solve_stationary_truncated(graph, params, max_len);
                bool ok = sres.max_abs_diff <= std::max(sres.truncation_bound, 1e-6);
                std::cout << (ok ? "PASS" : "FAIL") << " product-form: max |diff| "
                          << g17(sres.max_abs_diff) << " bound " << g17(sres.truncation_bound)
                          << "\n";
                return ok ? 0 : 1;
            }
            if (v_lemma->parsed()) return report_exit({verify_lemma_aux(vopts)}, report_path);
            if (v_fkg->parsed()) {
                Space space = space_path.empty() ? make_circle(4.0) : load_space(space_path);
                ModelParams params{intensity, mu};
                VerificationReport rep = run_fkg_sweep(space, params, trials, n_max, seed);
                return report_exit({rep}, report_path);
            }
            if (v_holley->parsed()) {
                Space window = window_path.empty() ? make_interval(3.0) : load_space(window_path);
                ModelParams params{intensity, mu};
                VerificationReport rep =
                    run_holley_sweep(window, params, trials, zeta1, zeta2, seed);
                return report_exit({rep}, report_path);
            }
            VerifyOptions o;
            o.seed = seed;
            if (quick) o.scale = 0.02;
            return report_exit(verify_all(o), report_path);
        }
    } catch (const capability_error& e) {
        std::cerr << "capability error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
