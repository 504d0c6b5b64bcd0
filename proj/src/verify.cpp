#include "fifm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fifm/analytics.hpp"
#include "fifm/bipartite.hpp"
#include "fifm/cftp.hpp"
#include "fifm/euclid.hpp"
#include "fifm/fkg.hpp"
#include "fifm/parallel.hpp"
#include "fifm/rng.hpp"
#include "fifm/simulator.hpp"

namespace fifm {

namespace {

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void finish(VerificationReport& rep, bool pass, const Timer& timer) {
    rep.status = pass ? VerificationReport::Status::Pass : VerificationReport::Status::Fail;
    rep.runtime_s = timer.seconds();
}

CompatibilityGraph single_edge_graph() {
    return CompatibilityGraph::make({"c"}, {"s"}, {{0, 0}}, {1.0, 1.0});
}

CompatibilityGraph n_shape_graph() {
    // c1-s1, c2-s1, c2-s2 with unit weights.
    return CompatibilityGraph::make({"c1", "c2"}, {"s1", "s2"}, {{0, 0}, {1, 0}, {1, 1}},
                                    {1.0, 1.0, 1.0, 1.0});
}

} // namespace

VerificationReport verify_lemma_aux(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "lemma-aux";
    const double tol = 1e-12;
    const std::int64_t instances = opts.scaled(100);
    double max_err = 0.0;
    bool pass = true;
    for (int n = 0; n <= 5; ++n) {
        for (int m = 0; m <= 5; ++m) {
            for (std::int64_t trial = 0; trial < instances; ++trial) {
                Rng rng(opts.seed, 0x1au, (n * 6 + m) * instances + trial);
                std::vector<double> alphas, betas;
                for (int i = 0; i < n; ++i) alphas.push_back(rng.uniform(0.1, 10.0));
                for (int j = 0; j < m; ++j) betas.push_back(rng.uniform(0.1, 10.0));
                auto res = lemma_aux_check(alphas, betas);
                max_err = std::max(max_err, res.rel_err);
                if (res.rel_err > tol) {
                    pass = false;
                    if (rep.witnesses.size() < 3) {
                        std::ostringstream os;
                        os << "n=" << n << " m=" << m << " trial=" << trial
                           << " rel_err=" << res.rel_err;
                        rep.witnesses.push_back(os.str());
                    }
                }
            }
        }
    }
    rep.max_error = max_err;
    rep.detail = "path identity, n,m <= 5, tol 1e-12";
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_local_balance(const VerifyOptions& opts) {
    (void)opts;
    Timer timer;
    VerificationReport rep;
    rep.check_name = "local-balance";
    ModelParams params{1.0, 1.0};
    double max_err = 0.0;
    bool pass = true;
    std::int64_t transitions = 0;
    for (const auto& graph : {single_edge_graph(), n_shape_graph()}) {
        auto report = check_local_balance(graph, params, 5);
        max_err = std::max(max_err, report.max_rel_err);
        transitions += report.transitions_checked;
        if (!report.pass) {
            pass = false;
            rep.witnesses.push_back(report.witness);
        }
    }
    rep.max_error = max_err;
    rep.detail = "single-edge + N graph, max_len 5, " + std::to_string(transitions) +
                 " transitions, tol 1e-10";
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_solve_vs_product_form(const VerifyOptions& opts) {
    (void)opts;
    Timer timer;
    VerificationReport rep;
    rep.check_name = "solve-vs-product-form";
    ModelParams params{1.0, 1.0};
    auto solve = solve_stationary_truncated(single_edge_graph(), params, 8);
    rep.max_error = solve.max_abs_diff;
    bool pass = solve.max_abs_diff < 1e-6;
    std::ostringstream os;
    os << "single-edge, max_len 8, " << solve.states.size() << " states, bound "
       << solve.truncation_bound;
    rep.detail = os.str();
    if (!pass) rep.witnesses.push_back("max state-by-state diff " + std::to_string(solve.max_abs_diff));
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_cftp_vs_analytics(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "cftp-vs-analytics";
    Space space = make_circle(3.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t samples = opts.scaled(100000);
    const int truncation = 14;

    NormConstOptions nopts;
    nopts.seed = opts.seed + 1;
    auto norm = normalizing_constant(space, params, truncation, nopts);
    auto analytic = norm.count_distribution();

    std::vector<int> counts(static_cast<std::size_t>(samples));
    parallel_for(samples, [&](std::int64_t i) {
        auto cfg = sample_stationary_stream(space, params, opts.seed,
                                            static_cast<std::uint64_t>(i) + 1);
        counts[static_cast<std::size_t>(i)] = static_cast<int>(cfg.size());
    });
    std::vector<double> hist(analytic.size(), 0.0);
    std::int64_t overflow = 0;
    for (int c : counts) {
        if (c < static_cast<int>(hist.size())) hist[static_cast<std::size_t>(c)] += 1.0;
        else ++overflow;
    }
    for (auto& h : hist) h /= static_cast<double>(samples);

    double tv = static_cast<double>(overflow) / static_cast<double>(samples);
    bool bins_ok = true;
    double worst_bin_sigma = 0.0;
    for (std::size_t n = 0; n < hist.size(); ++n) {
        tv += std::fabs(hist[n] - analytic[n]);
        // Binomial error under the analytic bin mass, so empty tail bins do
        // not divide by a vanishing estimate.
        double p_bin = std::clamp(analytic[n], 1.0 / static_cast<double>(samples), 0.5);
        double se_emp = std::sqrt(p_bin * (1.0 - p_bin) / static_cast<double>(samples));
        double se_ana = norm.term_stderr[n] / norm.k_inverse;
        double se = std::hypot(se_emp, se_ana);
        double sigmas = std::fabs(hist[n] - analytic[n]) / se;
        worst_bin_sigma = std::max(worst_bin_sigma, sigmas);
        if (sigmas > 3.0) {
            bins_ok = false;
            std::ostringstream os;
            os << "bin " << n << ": empirical " << hist[n] << " vs analytic " << analytic[n]
               << " (" << sigmas << " sigma)";
            rep.witnesses.push_back(os.str());
        }
    }
    tv *= 0.5;
    rep.max_error = tv;
    std::ostringstream os;
    os << "TV " << tv << " (tol 0.02), worst bin " << worst_bin_sigma << " sigma, "
       << samples << " samples, tail bound " << norm.tail_bound;
    rep.detail = os.str();
    finish(rep, tv < 0.02 && bins_ok, timer);
    return rep;
}

VerificationReport verify_regeneration_probability(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "regeneration-probability";
    const std::int64_t trials = opts.scaled(100000);
    bool pass = true;
    double worst = 0.0;
    for (double lambda_d : {0.5, 1.0, 2.0}) {
        for (double mu : {0.5, 1.0, 2.0}) {
            Space space = make_interval(lambda_d);
            ModelParams params{1.0, mu};
            auto [p_hat, se] = estimate_regeneration_probability(space, params, trials,
                                                                 opts.seed + 7);
            double exact = std::exp(-2.0 * lambda_d / mu);
            // Sampling error of the estimator under the true value.
            double se_null = std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
            double sigmas = std::fabs(p_hat - exact) / std::max(se, se_null);
            worst = std::max(worst, sigmas);
            if (sigmas > 3.0) {
                pass = false;
                std::ostringstream os;
                os << "lambda(D)=" << lambda_d << " mu=" << mu << ": " << p_hat << " vs "
                   << exact << " (" << sigmas << " sigma)";
                rep.witnesses.push_back(os.str());
            }
        }
    }
    rep.max_error = worst;
    rep.detail = "9-point grid vs exp(-2 lambda(D)/mu), " + std::to_string(trials) +
                 " trials each, 3 sigma";
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_generator_stationarity(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "generator-stationarity";
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t samples = opts.scaled(30000);

    std::vector<TestFunctional> fns = {FunctionalDictionary::count,
                                       FunctionalDictionary::red_count,
                                       FunctionalDictionary::pair_count(space)};
    std::vector<std::string> names = {"count", "red-count", "pair-count"};
    std::vector<std::vector<double>> values(fns.size(),
                                            std::vector<double>(static_cast<std::size_t>(samples)));
    parallel_for(samples, [&](std::int64_t i) {
        auto cfg = sample_stationary_stream(space, params, opts.seed + 2,
                                            static_cast<std::uint64_t>(i) + 1);
        for (std::size_t k = 0; k < fns.size(); ++k)
            values[k][static_cast<std::size_t>(i)] = evaluate_generator(space, params, cfg, fns[k]);
    });
    bool pass = true;
    double worst = 0.0;
    std::ostringstream os;
    for (std::size_t k = 0; k < fns.size(); ++k) {
        double mean = 0.0;
        for (double v : values[k]) mean += v;
        mean /= static_cast<double>(samples);
        double var = 0.0;
        for (double v : values[k]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(samples - 1);
        double se = std::sqrt(var / static_cast<double>(samples));
        double sigmas = std::fabs(mean) / se;
        worst = std::max(worst, sigmas);
        os << names[k] << ": " << mean << " (" << sigmas << " sigma)  ";
        if (sigmas > 3.0) {
            pass = false;
            rep.witnesses.push_back(names[k] + ": mean " + std::to_string(mean) + " se " +
                                    std::to_string(se));
        }
    }
    rep.max_error = worst;
    rep.detail = os.str();
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_fkg_suite(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "fkg-suite";
    Space space = make_circle(4.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t trials = opts.scaled(1000);
    bool pass = true;
    std::int64_t equality_cases = 0;

    auto note_failure = [&](const char* which, const InequalityReport& r, std::int64_t trial) {
        pass = false;
        if (rep.witnesses.size() < 5) {
            std::ostringstream os;
            os << which << " trial " << trial << ": slack " << r.slack << " " << r.witness;
            rep.witnesses.push_back(os.str());
        }
    };

    RandomConfigOptions pool_opts;
    pool_opts.mean_points = 4.0;
    pool_opts.max_points = 5;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        // Weak form: split a valid configuration into disjoint halves.
        PointSet pool = random_configuration(space, opts.seed, 0x11u, trial, pool_opts);
        Rng rng(opts.seed, 0x12u, trial);
        PointSet xi, gamma;
        for (const auto& p : pool) (rng.coin() ? xi : gamma).push_back(p);
        auto weak = fkg_weak_check(space, params, xi, gamma);
        if (!weak.pass) note_failure("weak", weak, trial);
        equality_cases += weak.equality_expected;

        // Same color: subsets of a one-color pool (validity is automatic).
        PointSet red_pool;
        int npool = 2 + static_cast<int>(rng.index(4));
        for (int i = 0; i < npool; ++i)
            red_pool.push_back({Point{rng.uniform(0.0, 4.0), 0, -1}, Color::Red});
        red_pool = sorted_points(std::move(red_pool));
        PointSet sx, sg;
        for (const auto& p : red_pool) {
            if (rng.coin()) sx.push_back(p);
            if (rng.coin()) sg.push_back(p);
        }
        auto same = fkg_same_type_check(space, params, sx, sg);
        if (!same.pass) note_failure("same-type", same, trial);
        equality_cases += same.equality_expected;

        // Lattice form: valid subsets of one valid pool share points.
        PointSet lx, lg;
        for (const auto& p : pool) {
            if (rng.coin()) lx.push_back(p);
            if (rng.coin()) lg.push_back(p);
        }
        if (trial % 37 == 0) lg = lx; // force the equality case now and then
        auto lattice = fkg_lattice_check(space, params, make_lattice_pair(lx, lg));
        if (!lattice.pass) note_failure("lattice", lattice, trial);
        equality_cases += lattice.equality_expected;

        // Product split of the full valid pool.
        auto split = product_split_check(space, params, pool);
        if (!split.pass) note_failure("product-split", split, trial);
    }
    rep.max_error = 0.0;
    std::ostringstream os;
    os << trials << " trials x 4 checks, " << equality_cases << " equality cases";
    rep.detail = os.str();
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_holley(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "holley-condition";
    Space space = make_interval(3.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t trials = opts.scaled(500);
    bool pass = true;
    std::int64_t violations_swapped = 0;

    std::vector<std::pair<Boundary, Boundary>> ordered = {
        {Boundary::red(), Boundary::free()},
        {Boundary::free(), Boundary::blue()},
        {Boundary::red(), Boundary::blue()},
    };
    RandomConfigOptions cfg_opts;
    cfg_opts.mean_points = 3.0;
    cfg_opts.max_points = 4;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        PointSet pool = random_configuration(space, opts.seed, 0x21u, trial, cfg_opts);
        Rng rng(opts.seed, 0x22u, trial);
        PointSet eta, gamma;
        for (const auto& p : pool) {
            if (rng.coin()) eta.push_back(p);
            if (rng.coin()) gamma.push_back(p);
        }
        const auto& [hi, lo] = ordered[static_cast<std::size_t>(trial % ordered.size())];
        auto rep_i = holley_condition_check(space, params, hi, lo, eta, gamma);
        if (!rep_i.pass) {
            pass = false;
            if (rep.witnesses.size() < 5)
                rep.witnesses.push_back("ordered trial " + std::to_string(trial) + ": " +
                                        rep_i.witness);
        }
        // Negative control: swap the boundary roles.
        auto swapped = holley_inequality(space, params, lo, hi, eta, gamma);
        if (!swapped.pass) ++violations_swapped;
    }
    {
        // A hand-picked swapped-boundary violation: a red point near the
        // window edge, free vs red boundary.
        PointSet gamma = {{Point{0.5, 0, -1}, Color::Red}};
        auto swapped = holley_inequality(space, params, Boundary::free(), Boundary::red(), {},
                                         gamma);
        if (!swapped.pass) ++violations_swapped;
    }
    if (violations_swapped == 0) {
        pass = false;
        rep.witnesses.push_back("negative control produced no violations");
    }
    rep.max_error = 0.0;
    std::ostringstream os;
    os << trials << " ordered trials clean, " << violations_swapped
       << " violations under swapped boundaries";
    rep.detail = os.str();
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_decay(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "discrepancy-decay";
    Space space = make_torus(20.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t replicas = opts.scaled(200);
    const double area = total_measure(space);
    const double init_density = 0.2;

    std::vector<std::vector<double>> special(static_cast<std::size_t>(replicas));
    parallel_for(replicas, [&](std::int64_t r) {
        Rng rng(opts.seed + 3, 0x31u, r);
        OrderedConfiguration init2;
        int n = rng.poisson(init_density * area);
        for (int i = 0; i < n; ++i) {
            Particle p;
            p.pos = {rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0), -1};
            p.color = Color::Red;
            p.birth = 0.0;
            p.patience = rng.exponential(params.mu);
            p.id = -(i + 1);
            init2.push_back(p);
        }
        CoupledOptions copts;
        copts.sample_dt = 1.0;
        auto res = coupled_simulate(space, params, {}, init2, 5.0, opts.seed + 3,
                                    static_cast<std::uint64_t>(r) + 1, copts);
        std::vector<double>& row = special[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < res.trace.times.size(); ++k)
            row.push_back(res.trace.special_density(k));
    });

    const std::size_t nt = special[0].size(); // t = 0..5
    std::vector<double> mean(nt, 0.0), se(nt, 0.0);
    for (std::size_t k = 0; k < nt; ++k) {
        for (const auto& row : special) mean[k] += row[k];
        mean[k] /= static_cast<double>(replicas);
        double var = 0.0;
        for (const auto& row : special) var += (row[k] - mean[k]) * (row[k] - mean[k]);
        var /= static_cast<double>(replicas - 1);
        se[k] = std::sqrt(var / static_cast<double>(replicas));
    }
    bool pass = true;
    double worst_excess = -1e300;
    std::ostringstream os;
    for (std::size_t k = 1; k < nt; ++k) {
        double t = static_cast<double>(k);
        double bound = mean[0] * std::exp(-params.mu * t) + 2.0 * se[k];
        worst_excess = std::max(worst_excess, mean[k] - bound);
        os << "t=" << t << ": " << mean[k] << " <= " << bound << "  ";
        if (mean[k] > bound) {
            pass = false;
            rep.witnesses.push_back("t=" + std::to_string(t) + ": mean " +
                                    std::to_string(mean[k]) + " exceeds " + std::to_string(bound));
        }
    }
    rep.max_error = worst_excess;
    rep.detail = os.str();
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_coupling_time(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "coupling-time";
    Space space = make_torus(20.0);
    ModelParams params{1.0, 1.0};
    TorusWindow window{2.0};
    const int replicas = static_cast<int>(opts.scaled(500));
    CouplingTimeOptions copts;
    copts.t_max = 40.0; // doubled horizon; the base horizon is 20
    copts.confirm = 5.0;

    auto presence = coupling_presence_times(space, params, window, replicas, opts.seed + 4,
                                            copts);
    auto tau_at = [&](double horizon) {
        CouplingTimeResult res;
        for (const auto& p : presence) {
            double tau = 0.0;
            for (double t : p)
                if (t <= horizon) tau = t;
            res.tau.push_back(tau);
        }
        res.finalize(horizon, copts.confirm);
        return res;
    };
    auto at20 = tau_at(20.0);
    auto at40 = tau_at(40.0);
    double censor_frac = static_cast<double>(at20.censored_count) / replicas;
    double shift = std::fabs(at40.mean - at20.mean) / std::max(at20.mean, 1e-12);

    // Bootstrap CI for the mean at the doubled horizon.
    std::vector<double> uncensored;
    for (std::size_t i = 0; i < at40.tau.size(); ++i)
        if (!at40.censored[i]) uncensored.push_back(at40.tau[i]);
    if (uncensored.empty()) {
        rep.detail = "every replica censored";
        finish(rep, false, timer);
        return rep;
    }
    Rng rng(opts.seed + 4, 0x41u, 0);
    std::vector<double> boot(1000);
    for (auto& b : boot) {
        double s = 0.0;
        for (std::size_t i = 0; i < uncensored.size(); ++i)
            s += uncensored[rng.index(uncensored.size())];
        b = s / static_cast<double>(uncensored.size());
    }
    std::sort(boot.begin(), boot.end());
    double ci_lo = boot[25], ci_hi = boot[974];

    bool pass = censor_frac < 0.01 && shift < 0.05 && std::isfinite(ci_lo) &&
                std::isfinite(ci_hi);
    rep.max_error = shift;
    std::ostringstream os;
    os << "mean tau " << at20.mean << " (CI " << ci_lo << ".." << ci_hi << "), censored "
       << 100.0 * censor_frac << "%, horizon-doubling shift " << 100.0 * shift << "%";
    rep.detail = os.str();
    if (!pass) rep.witnesses.push_back(os.str());
    finish(rep, pass, timer);
    return rep;
}

VerificationReport verify_kappa_equivalence(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "kappa-equivalence";
    Space space = make_circle(10.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t streams = opts.scaled(100);
    std::vector<char> ok(static_cast<std::size_t>(streams), 0);
    parallel_for(streams, [&](std::int64_t s) {
        EventSeq events = generate_driving_process(space, params, 0.0, 10.0, opts.seed + 5,
                                                   static_cast<std::uint64_t>(s));
        auto kappa = compute_kappa(space, events);
        SimOptions sim_opts;
        sim_opts.log_level = LogLevel::Matches;
        auto sim = simulate(space, params, {}, events, 10.0, sim_opts);
        ok[static_cast<std::size_t>(s)] =
            kappa.match_pairs() == match_pairs_from_log(sim.log) ? 1 : 0;
    });
    std::int64_t bad = 0;
    for (std::size_t s = 0; s < ok.size(); ++s) {
        if (!ok[s]) {
            ++bad;
            if (rep.witnesses.size() < 3)
                rep.witnesses.push_back("stream " + std::to_string(s) + " differs");
        }
    }
    rep.max_error = static_cast<double>(bad);
    rep.detail = std::to_string(streams) + " event streams, exact match-pair equality";
    finish(rep, bad == 0, timer);
    return rep;
}

VerificationReport verify_positive_association(const VerifyOptions& opts) {
    Timer timer;
    VerificationReport rep;
    rep.check_name = "positive-association";
    Space space = make_circle(4.0);
    ModelParams params{1.0, 1.0};
    const std::int64_t samples = opts.scaled(100000);

    using K = IncreasingFunctional::Kind;
    IncreasingFunctional red_left{K::RedCountIn, 0.0, 2.0};
    IncreasingFunctional red_right{K::RedCountIn, 2.0, 4.0};
    IncreasingFunctional red_all{K::RedCountIn, 0.0, 4.0};
    IncreasingFunctional neg_blue{K::NegBlueCountIn, 0.0, 4.0};
    IncreasingFunctional red_near{K::RedNearPoint, 1.0, 1.0};
    std::vector<std::array<IncreasingFunctional, 2>> pairs = {
        {red_left, red_right}, {red_all, neg_blue}, {red_near, neg_blue}};
    std::vector<std::string> names = {"red-left/red-right", "red/neg-blue", "red-near/neg-blue"};

    // One sampling pass; evaluate every functional on each draw.
    std::vector<std::array<double, 5>> values(static_cast<std::size_t>(samples));
    std::array<IncreasingFunctional, 5> fns = {red_left, red_right, red_all, neg_blue, red_near};
    parallel_for(samples, [&](std::int64_t i) {
        auto cfg = sample_stationary_stream(space, params, opts.seed + 6,
                                            static_cast<std::uint64_t>(i) + 1);
        for (std::size_t k = 0; k < fns.size(); ++k)
            values[static_cast<std::size_t>(i)][k] = fns[k].eval(space, cfg);
    });
    auto index_of = [&](const IncreasingFunctional& f) {
        for (std::size_t k = 0; k < fns.size(); ++k)
            if (fns[k].kind == f.kind && fns[k].lo == f.lo && fns[k].hi == f.hi) return k;
        return std::size_t{0};
    };
    bool pass = true;
    double worst = 0.0;
    std::ostringstream os;
    const int batches = 50;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::size_t fi = index_of(pairs[p][0]), gi = index_of(pairs[p][1]);
        std::vector<double> cov_b(batches);
        for (int b = 0; b < batches; ++b) {
            std::int64_t lo = b * samples / batches, hi = (b + 1) * samples / batches;
            double mf = 0, mg = 0, mfg = 0, n = static_cast<double>(hi - lo);
            for (std::int64_t i = lo; i < hi; ++i) {
                double f = values[static_cast<std::size_t>(i)][fi];
                double g = values[static_cast<std::size_t>(i)][gi];
                mf += f; mg += g; mfg += f * g;
            }
            mf /= n; mg /= n; mfg /= n;
            cov_b[static_cast<std::size_t>(b)] = (mfg - mf * mg) * n / (n - 1.0);
        }
        double cov = 0.0;
        for (double c : cov_b) cov += c;
        cov /= batches;
        double var = 0.0;
        for (double c : cov_b) var += (c - cov) * (c - cov);
        var /= (batches - 1);
        double se = std::sqrt(var / batches);
        double sigmas = -cov / se;
        worst = std::max(worst, sigmas);
        os << names[p] << ": cov " << cov << " (se " << se << ")  ";
        if (cov < -3.0 * se) {
            pass = false;
            rep.witnesses.push_back(names[p] + ": cov " + std::to_string(cov) + " se " +
                                    std::to_string(se));
        }
    }
    rep.max_error = worst;
    rep.detail = os.str();
    finish(rep, pass, timer);
    return rep;
}

std::vector<VerificationReport> verify_all(const VerifyOptions& opts) {
    return {
        verify_lemma_aux(opts),
        verify_local_balance(opts),
        verify_solve_vs_product_form(opts),
        verify_cftp_vs_analytics(opts),
        verify_regeneration_probability(opts),
        verify_generator_stationarity(opts),
        verify_fkg_suite(opts),
        verify_holley(opts),
        verify_decay(opts),
        verify_coupling_time(opts),
        verify_kappa_equivalence(opts),
        verify_positive_association(opts),
    };
}

} // namespace fifm
