#include "fifm/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "fifm/errors.hpp"
#include "fifm/parallel.hpp"
#include "fifm/rng.hpp"

namespace fifm {

double rho(int n, const Space& space, const ModelParams& params) {
    require_params(params, /*need_positive_mu=*/false);
    return params.intensity * lambda_bar_total(space) + n * params.mu;
}

DensityValue pi_ordered(const Space& space, const ModelParams& params,
                        const OrderedConfiguration& config) {
    require_params(params, /*need_positive_mu=*/false);
    if (!is_valid_configuration(space, config)) return {};
    auto pts = marked_points(config);
    double log_value = 0.0;
    for (std::size_t i = 1; i <= pts.size(); ++i) {
        std::span<const MarkedPoint> prefix(pts.data(), i);
        double den = params.intensity * neighborhood_measure(space, prefix) +
                     static_cast<double>(i) * params.mu;
        log_value -= std::log(den);
    }
    return {log_value, std::nullopt};
}

DensityValue pi_hat_detailed(const Space& space, const ModelParams& params,
                             const DetailedState& state) {
    require_params(params, /*need_positive_mu=*/false);
    if (!is_valid_detailed(space, state)) return {};
    double log_value = 0.0;
    int q_u = 0;
    log_value -= std::log(rho(0, space, params)); // i = 0 factor
    for (const auto& item : state) {
        if (item.mark == Mark::Unmatched) ++q_u;
        log_value -= std::log(rho(q_u, space, params));
    }
    return {log_value, std::nullopt};
}

namespace {

// Permutation sum over orderings of `pts`, with the per-side neighborhood
// mass clipped by `clip` (empty clip = free boundary). 1D and finite spaces.
double permutation_sum(const Space& space, const ModelParams& params,
                       std::span<const MarkedPoint> pts, const BoundaryClip* clip, int cap) {
    const int n = static_cast<int>(pts.size());
    if (n == 0) return 0.0; // log 1
    if (n > cap)
        throw capability_error(
            "permutation sum over " + std::to_string(n) +
            " points exceeds the cap; split by color when neighborhoods separate");
    if (space.is_torus())
        throw capability_error("permutation-summed densities unsupported on the torus");
    for (const auto& mp : pts) require_point(space, mp.pos);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    LogSumAcc acc;
    do {
        double log_term = 0.0;
        if (space.is_finite()) {
            const auto& f = space.finite();
            std::uint64_t side_bits[2] = {0, 0};
            for (int i = 0; i < n; ++i) {
                const auto& mp = pts[order[i]];
                side_bits[static_cast<int>(opposite(mp.color))] |= f.adjacency[mp.pos.type];
                double mass = finite_mass(f, side_bits[0]) + finite_mass(f, side_bits[1]);
                log_term -= std::log(params.intensity * mass + (i + 1) * params.mu);
            }
        } else {
            IntervalSet side[2];
            for (int i = 0; i < n; ++i) {
                const auto& mp = pts[order[i]];
                std::span<const MarkedPoint> one(&mp, 1);
                int s = static_cast<int>(opposite(mp.color));
                IntervalSet ball = covered_side_1d(space, one, opposite(mp.color));
                for (auto [lo, hi] : ball.parts()) side[s].add(lo, hi);
                double mass = 0.0;
                for (int k = 0; k < 2; ++k) {
                    if (clip) mass += side[k].subtract(clip->side[k]).measure();
                    else mass += side[k].measure();
                }
                log_term -= std::log(params.intensity * mass + (i + 1) * params.mu);
            }
        }
        acc.add(log_term);
    } while (std::next_permutation(order.begin(), order.end()));
    return acc.value();
}

} // namespace

double log_janossy_tilde(const Space& space, const ModelParams& params,
                         std::span<const MarkedPoint> pts, int cap) {
    require_params(params, /*need_positive_mu=*/false);
    return permutation_sum(space, params, pts, nullptr, cap);
}

BoundaryClip boundary_clip(const Space& space, const Boundary& zeta) {
    BoundaryClip clip;
    if (zeta.preset == Boundary::Preset::Free) return clip;
    if (!space.is_interval())
        throw std::invalid_argument("boundary conditions require an interval window");
    const double L = std::get<SpaceInterval>(space.kind).length;
    const double r = space.radius;
    auto collar = [&](Color side) {
        clip.side[static_cast<int>(side)].add(0.0, std::min(r, L));
        clip.side[static_cast<int>(side)].add(std::max(0.0, L - r), L);
    };
    switch (zeta.preset) {
        case Boundary::Preset::Red:
            collar(Color::Blue); // red boundary points cover the blue mark side
            break;
        case Boundary::Preset::Blue:
            collar(Color::Red);
            break;
        case Boundary::Preset::Points: {
            for (const auto& mp : zeta.points)
                if (mp.pos.x >= 0.0 && mp.pos.x <= L)
                    throw std::invalid_argument("boundary points must lie outside the window");
            // zeta must itself be valid: no opposite-color pair within radius.
            for (std::size_t i = 0; i < zeta.points.size(); ++i)
                for (std::size_t j = i + 1; j < zeta.points.size(); ++j)
                    if (zeta.points[i].color != zeta.points[j].color &&
                        std::fabs(zeta.points[i].pos.x - zeta.points[j].pos.x) <= r)
                        throw std::invalid_argument("boundary configuration is invalid");
            for (const auto& mp : zeta.points) {
                double lo = std::max(0.0, mp.pos.x - r);
                double hi = std::min(L, mp.pos.x + r);
                clip.side[static_cast<int>(opposite(mp.color))].add(lo, hi);
            }
            break;
        }
        case Boundary::Preset::Free:
            break;
    }
    return clip;
}

double log_janossy_boundary(const Space& space, const ModelParams& params,
                            std::span<const MarkedPoint> pts, const Boundary& zeta,
                            int cap) {
    require_params(params, /*need_positive_mu=*/false);
    if (zeta.preset == Boundary::Preset::Free)
        return permutation_sum(space, params, pts, nullptr, cap);
    BoundaryClip clip = boundary_clip(space, zeta);
    return permutation_sum(space, params, pts, &clip, cap);
}

bool valid_under_boundary(const Space& space, std::span<const MarkedPoint> pts,
                          const Boundary& zeta) {
    if (!is_valid_marked_set(space, pts)) return false;
    if (zeta.preset == Boundary::Preset::Free) return true;
    if (!space.is_interval())
        throw std::invalid_argument("boundary conditions require an interval window");
    const double L = std::get<SpaceInterval>(space.kind).length;
    const double r = space.radius;
    for (const auto& mp : pts) {
        if (zeta.preset == Boundary::Preset::Points) {
            for (const auto& bp : zeta.points)
                if (bp.color != mp.color && std::fabs(bp.pos.x - mp.pos.x) <= r) return false;
        } else {
            Color boundary_color =
                zeta.preset == Boundary::Preset::Red ? Color::Red : Color::Blue;
            if (mp.color != boundary_color && (mp.pos.x < r || L - mp.pos.x < r)) return false;
        }
    }
    return true;
}

namespace {

// Smallest lambda_bar mass a single particle's neighborhood can have; every
// nonempty prefix has at least this much, which drives the tail bound.
double min_single_neighborhood(const Space& space, const ModelParams& params) {
    if (space.is_interval())
        return params.intensity * std::min(space.radius, std::get<SpaceInterval>(space.kind).length);
    if (space.is_circle())
        return params.intensity *
               std::min(2.0 * space.radius, std::get<SpaceCircle>(space.kind).length);
    if (space.is_finite()) {
        const auto& f = space.finite();
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < f.names.size(); ++t)
            b = std::min(b, finite_mass(f, f.adjacency[t]));
        return params.intensity * b;
    }
    return 0.0;
}

// Closed-form bound on sum_{n>T} r^n / prod_{i<=n}(b + i mu), geometric
// domination once r / (b + n mu) < 1.
double ordered_tail_bound(double r, double b, double mu, int T) {
    double t = 1.0;
    for (int i = 1; i <= T; ++i) t *= r / (b + i * mu);
    int n = T;
    double tail = 0.0;
    while (true) {
        ++n;
        t *= r / (b + n * mu);
        tail += t;
        double q = r / (b + (n + 1) * mu);
        if (q < 1.0) {
            tail += t * q / (1.0 - q);
            break;
        }
        if (n > T + 100000) throw std::logic_error("tail bound failed to converge");
    }
    return tail;
}

void finite_enumerate(const Space& space, const ModelParams& params, int truncation,
                      std::int64_t node_cap, std::vector<double>& terms) {
    const auto& f = space.finite();
    const int ntypes = static_cast<int>(f.names.size());
    std::vector<int> seq;
    std::int64_t nodes = 0;
    // DFS over valid plain sequences; `present` is the set of types in the
    // prefix, `covered` the union of their neighborhoods.
    std::function<void(std::uint64_t, std::uint64_t, double, int)> dfs =
        [&](std::uint64_t present, std::uint64_t covered, double product, int depth) {
            if (depth == truncation) return;
            for (int t = 0; t < ntypes; ++t) {
                if (f.adjacency[t] & present) continue; // incompatible with someone present
                if (++nodes > node_cap)
                    throw capability_error("finite-space enumeration exceeds the node cap");
                std::uint64_t covered2 = covered | f.adjacency[t];
                double den = params.intensity * finite_mass(f, covered2) +
                             (depth + 1) * params.mu;
                // The base measure weights each chosen type by its mass.
                double product2 = product * params.intensity * f.weights[t] / den;
                terms[depth + 1] += product2;
                dfs(present | (1ull << t), covered2, product2, depth + 1);
            }
        };
    dfs(0, 0, 1.0, 0);
}

} // namespace

NormConstResult normalizing_constant(const Space& space, const ModelParams& params,
                                     int truncation, const NormConstOptions& opts) {
    require_params(params);
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    if (space.is_torus())
        throw capability_error("normalizing_constant: torus unsupported");

    NormConstResult out;
    out.terms.assign(truncation + 1, 0.0);
    out.term_stderr.assign(truncation + 1, 0.0);
    out.terms[0] = 1.0;

    if (space.is_finite()) {
        finite_enumerate(space, params, truncation, opts.node_cap, out.terms);
    } else {
        // Sequential importance sampling: grow ordered configurations by
        // drawing each particle uniformly from the current acceptance
        // region; the telescoped weights estimate every term at once.
        const double L = total_measure(space);
        const std::int64_t paths = std::max<std::int64_t>(1, opts.mc_paths);
        const int levels = truncation;
        const int nchunks = 256;
        std::vector<std::vector<double>> chunk_sum(nchunks), chunk_sq(nchunks);
        parallel_for(nchunks, [&](std::int64_t chunk) {
            std::vector<double>& sums = chunk_sum[chunk];
            std::vector<double>& sqs = chunk_sq[chunk];
            sums.assign(levels + 1, 0.0);
            sqs.assign(levels + 1, 0.0);
            std::int64_t lo = chunk * paths / nchunks;
            std::int64_t hi = (chunk + 1) * paths / nchunks;
            for (std::int64_t p = lo; p < hi; ++p) {
                Rng rng(opts.seed, 0x6e43u, p);
                IntervalSet side[2];
                std::vector<MarkedPoint> prefix;
                double w = 1.0;
                for (int i = 1; i <= levels; ++i) {
                    double free_mass[2];
                    for (int s = 0; s < 2; ++s) free_mass[s] = L - side[s].measure();
                    double m = params.intensity * (free_mass[0] + free_mass[1]);
                    if (m <= 0.0) break;
                    // Color choice proportional to free mass on its side.
                    double u = rng.uniform() * (free_mass[0] + free_mass[1]);
                    int cs = u < free_mass[0] ? 0 : 1;
                    IntervalSet allowed = side[cs].complement(L);
                    double x = allowed.point_at(rng.uniform() * free_mass[cs]);
                    MarkedPoint mp{Point{x, 0, -1}, static_cast<Color>(cs)};
                    prefix.push_back(mp);
                    std::span<const MarkedPoint> one(&prefix.back(), 1);
                    IntervalSet ball = covered_side_1d(space, one, opposite(mp.color));
                    int bs = static_cast<int>(opposite(mp.color));
                    for (auto [blo, bhi] : ball.parts()) side[bs].add(blo, bhi);
                    double den = params.intensity * (side[0].measure() + side[1].measure()) +
                                 i * params.mu;
                    w *= m / den;
                    sums[i] += w;
                    sqs[i] += w * w;
                }
                prefix.clear();
            }
        });
        double n = static_cast<double>(paths);
        for (int i = 1; i <= levels; ++i) {
            double s = 0.0, sq = 0.0;
            for (int c = 0; c < nchunks; ++c) {
                s += chunk_sum[c][i];
                sq += chunk_sq[c][i];
            }
            out.terms[i] = s / n;
            double var = std::max(0.0, sq / n - out.terms[i] * out.terms[i]);
            out.term_stderr[i] = std::sqrt(var / n);
        }
    }

    out.k_inverse = 0.0;
    double var_sum = 0.0;
    for (int i = 0; i <= truncation; ++i) {
        out.k_inverse += out.terms[i];
        var_sum += out.term_stderr[i] * out.term_stderr[i];
    }
    out.mc_stderr = std::sqrt(var_sum);
    out.tail_bound = ordered_tail_bound(params.intensity * lambda_bar_total(space),
                                        min_single_neighborhood(space, params), params.mu,
                                        truncation);
    return out;
}

std::vector<double> NormConstResult::count_distribution() const {
    std::vector<double> p(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) p[i] = terms[i] / k_inverse;
    return p;
}

} // namespace fifm
