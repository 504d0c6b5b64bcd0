#include "fifm/fkg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "fifm/cftp.hpp"
#include "fifm/errors.hpp"
#include "fifm/parallel.hpp"
#include "fifm/rng.hpp"

namespace fifm {

LemmaAuxResult lemma_aux_check(std::span<const double> alphas, std::span<const double> betas) {
    const int n = static_cast<int>(alphas.size());
    const int m = static_cast<int>(betas.size());
    if (n + m > 16) throw std::invalid_argument("lemma_aux_check: n + m must be <= 16");
    for (double a : alphas)
        if (!(a > 0)) throw std::invalid_argument("alphas must be positive");
    for (double b : betas)
        if (!(b > 0)) throw std::invalid_argument("betas must be positive");

    // Enumerate monotone paths as 0/1 step sequences (0: alpha step).
    std::vector<char> steps;
    steps.insert(steps.end(), static_cast<std::size_t>(n), 0);
    steps.insert(steps.end(), static_cast<std::size_t>(m), 1);
    std::sort(steps.begin(), steps.end());
    double lhs = 0.0;
    do {
        int i = 0, j = 0;
        double term = 1.0;
        for (char s : steps) {
            if (s == 0) ++i; else ++j;
            double a = i > 0 ? alphas[static_cast<std::size_t>(i - 1)] : 0.0;
            double b = j > 0 ? betas[static_cast<std::size_t>(j - 1)] : 0.0;
            term /= a + b;
        }
        lhs += term;
    } while (std::next_permutation(steps.begin(), steps.end()));

    double rhs = 1.0;
    for (double a : alphas) rhs /= a;
    for (double b : betas) rhs /= b;
    double rel = std::fabs(lhs - rhs) / std::max(std::fabs(rhs), 1e-300);
    return {lhs, rhs, rel};
}

double lemma_aux_dp(std::span<const double> alphas, std::span<const double> betas) {
    const int n = static_cast<int>(alphas.size());
    const int m = static_cast<int>(betas.size());
    std::vector<std::vector<double>> s(static_cast<std::size_t>(n) + 1,
                                       std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
    s[0][0] = 1.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= m; ++j) {
            if (i == 0 && j == 0) continue;
            double inflow = 0.0;
            if (i > 0) inflow += s[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)];
            if (j > 0) inflow += s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)];
            double a = i > 0 ? alphas[static_cast<std::size_t>(i - 1)] : 0.0;
            double b = j > 0 ? betas[static_cast<std::size_t>(j - 1)] : 0.0;
            s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = inflow / (a + b);
        }
    }
    return s[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
}

namespace {

bool point_less(const MarkedPoint& a, const MarkedPoint& b) {
    return std::tie(a.pos.x, a.pos.y, a.pos.type, a.color) <
           std::tie(b.pos.x, b.pos.y, b.pos.type, b.color);
}

bool point_eq(const MarkedPoint& a, const MarkedPoint& b) {
    return !point_less(a, b) && !point_less(b, a);
}

} // namespace

PointSet sorted_points(PointSet pts) {
    std::sort(pts.begin(), pts.end(), point_less);
    pts.erase(std::unique(pts.begin(), pts.end(), point_eq), pts.end());
    return pts;
}

PointSet set_union(const PointSet& a, const PointSet& b) {
    PointSet out = a;
    out.insert(out.end(), b.begin(), b.end());
    return sorted_points(std::move(out));
}

PointSet set_intersect(const PointSet& a, const PointSet& b) {
    PointSet sa = sorted_points(a), sb = sorted_points(b), out;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out),
                          point_less);
    return out;
}

PointSet set_difference(const PointSet& a, const PointSet& b) {
    PointSet sa = sorted_points(a), sb = sorted_points(b), out;
    std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out),
                        point_less);
    return out;
}

PointSet color_part(const PointSet& pts, Color c) {
    PointSet out;
    for (const auto& p : pts)
        if (p.color == c) out.push_back(p);
    return out;
}

bool sets_disjoint(const PointSet& a, const PointSet& b) {
    return set_intersect(a, b).empty();
}

LatticePair make_lattice_pair(const PointSet& xi, const PointSet& gamma) {
    LatticePair pair;
    pair.xi = sorted_points(xi);
    pair.gamma = sorted_points(gamma);
    PointSet xr = color_part(pair.xi, Color::Red), xb = color_part(pair.xi, Color::Blue);
    PointSet gr = color_part(pair.gamma, Color::Red), gb = color_part(pair.gamma, Color::Blue);
    pair.join = set_union(set_union(xr, gr), set_intersect(xb, gb));
    pair.meet = set_union(set_intersect(xr, gr), set_union(xb, gb));
    return pair;
}

bool neighborhoods_disjoint(const Space& space, const PointSet& a, const PointSet& b) {
    if (space.is_finite()) {
        for (Color side : {Color::Red, Color::Blue})
            if (covered_side_finite(space, a, side) & covered_side_finite(space, b, side))
                return false;
        return true;
    }
    for (Color side : {Color::Red, Color::Blue}) {
        IntervalSet ia = covered_side_1d(space, a, side);
        IntervalSet ib = covered_side_1d(space, b, side);
        if (ia.intersect(ib).measure() > 0.0) return false;
    }
    return true;
}

namespace {

std::string describe(const PointSet& pts) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) os << ", ";
        os << "(" << pts[i].pos.x;
        if (pts[i].pos.type >= 0) os << "#" << pts[i].pos.type;
        os << "," << color_name(pts[i].color) << ")";
    }
    os << "}";
    return os.str();
}

InequalityReport compare(double log_lhs, double log_rhs, bool equality_expected,
                         std::string witness) {
    InequalityReport rep;
    rep.log_lhs = log_lhs;
    rep.log_rhs = log_rhs;
    rep.equality_expected = equality_expected;
    double lhs = std::isfinite(log_lhs) ? std::exp(log_lhs) : 0.0;
    double rhs = std::isfinite(log_rhs) ? std::exp(log_rhs) : 0.0;
    rep.slack = lhs - rhs;
    double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
    rep.pass = rep.slack >= -kInequalitySlack * scale;
    if (equality_expected && rep.pass)
        rep.pass = std::fabs(rep.slack) <= kEqualityTol * scale;
    rep.witness = std::move(witness);
    return rep;
}

} // namespace

InequalityReport fkg_weak_check(const Space& space, const ModelParams& params,
                                const PointSet& xi, const PointSet& gamma, int cap) {
    PointSet sx = sorted_points(xi), sg = sorted_points(gamma);
    if (!sets_disjoint(sx, sg))
        throw std::invalid_argument("fkg_weak_check: xi and gamma must be disjoint");
    PointSet uni = set_union(sx, sg);
    if (!is_valid_marked_set(space, uni))
        throw std::invalid_argument("fkg_weak_check: xi union gamma must be valid");
    double log_lhs = log_janossy_tilde(space, params, uni, cap);
    double log_rhs = log_janossy_tilde(space, params, sx, cap) +
                     log_janossy_tilde(space, params, sg, cap);
    bool equality = neighborhoods_disjoint(space, sx, sg);
    return compare(log_lhs, log_rhs, equality,
                   "xi=" + describe(sx) + " gamma=" + describe(sg));
}

InequalityReport fkg_same_type_check(const Space& space, const ModelParams& params,
                                     const PointSet& xi, const PointSet& gamma, int cap) {
    Color c = !xi.empty() ? xi.front().color
                          : (!gamma.empty() ? gamma.front().color : Color::Red);
    for (const auto& p : xi)
        if (p.color != c) throw std::invalid_argument("fkg_same_type_check: one color only");
    for (const auto& p : gamma)
        if (p.color != c) throw std::invalid_argument("fkg_same_type_check: one color only");
    PointSet sx = sorted_points(xi), sg = sorted_points(gamma);
    double log_lhs = log_janossy_tilde(space, params, set_union(sx, sg), cap) +
                     log_janossy_tilde(space, params, set_intersect(sx, sg), cap);
    double log_rhs = log_janossy_tilde(space, params, sx, cap) +
                     log_janossy_tilde(space, params, sg, cap);
    bool equality = sx == sg || neighborhoods_disjoint(space, sx, sg);
    return compare(log_lhs, log_rhs, equality,
                   "xi=" + describe(sx) + " gamma=" + describe(sg));
}

InequalityReport fkg_lattice_check(const Space& space, const ModelParams& params,
                                   const LatticePair& pair, int cap) {
    double log_lhs = log_janossy_tilde(space, params, pair.join, cap) +
                     log_janossy_tilde(space, params, pair.meet, cap);
    double log_rhs = log_janossy_tilde(space, params, pair.xi, cap) +
                     log_janossy_tilde(space, params, pair.gamma, cap);
    bool equality = pair.xi == pair.gamma;
    return compare(log_lhs, log_rhs, equality,
                   "xi=" + describe(pair.xi) + " gamma=" + describe(pair.gamma));
}

InequalityReport product_split_check(const Space& space, const ModelParams& params,
                                     const PointSet& gamma, int cap) {
    PointSet sg = sorted_points(gamma);
    if (!is_valid_marked_set(space, sg))
        throw std::invalid_argument("product_split_check: gamma must be valid");
    double log_lhs = log_janossy_tilde(space, params, sg, cap);
    double log_rhs = log_janossy_tilde(space, params, color_part(sg, Color::Red), cap) +
                     log_janossy_tilde(space, params, color_part(sg, Color::Blue), cap);
    return compare(log_lhs, log_rhs, /*equality_expected=*/true, "gamma=" + describe(sg));
}

bool boundary_geq(const Boundary& a, const Boundary& b) {
    // Per color: Full (the whole complement) or a finite point set. a >= b
    // needs a^R to contain b^R and a^B to be contained in b^B.
    struct Side {
        bool full = false;
        PointSet pts;
    };
    auto side_of = [](const Boundary& z, Color c) {
        Side s;
        if ((z.preset == Boundary::Preset::Red && c == Color::Red) ||
            (z.preset == Boundary::Preset::Blue && c == Color::Blue))
            s.full = true;
        else if (z.preset == Boundary::Preset::Points)
            s.pts = color_part(sorted_points(z.points), c);
        return s;
    };
    auto contains = [](const Side& big, const Side& small) {
        if (big.full) return true;
        if (small.full) return false;
        return set_difference(small.pts, big.pts).empty();
    };
    return contains(side_of(a, Color::Red), side_of(b, Color::Red)) &&
           contains(side_of(b, Color::Blue), side_of(a, Color::Blue));
}

InequalityReport holley_inequality(const Space& space, const ModelParams& params,
                                   const Boundary& zeta_hi, const Boundary& zeta_lo,
                                   const PointSet& eta, const PointSet& gamma, int cap) {
    LatticePair pair = make_lattice_pair(eta, gamma);
    bool eta_ok = valid_under_boundary(space, pair.xi, zeta_hi);
    bool gamma_ok = valid_under_boundary(space, pair.gamma, zeta_lo);
    InequalityReport rep;
    rep.witness = "eta=" + describe(pair.xi) + " gamma=" + describe(pair.gamma);
    if (!eta_ok || !gamma_ok) {
        rep.pass = true; // right side vanishes; inequality is vacuous
        rep.log_lhs = rep.log_rhs = -std::numeric_limits<double>::infinity();
        return rep;
    }
    double log_rhs = log_janossy_boundary(space, params, pair.xi, zeta_hi, cap) +
                     log_janossy_boundary(space, params, pair.gamma, zeta_lo, cap);
    bool join_ok = valid_under_boundary(space, pair.join, zeta_hi);
    bool meet_ok = valid_under_boundary(space, pair.meet, zeta_lo);
    double log_lhs = -std::numeric_limits<double>::infinity();
    if (join_ok && meet_ok)
        log_lhs = log_janossy_boundary(space, params, pair.join, zeta_hi, cap) +
                  log_janossy_boundary(space, params, pair.meet, zeta_lo, cap);
    return compare(log_lhs, log_rhs, false, rep.witness);
}

InequalityReport holley_condition_check(const Space& space, const ModelParams& params,
                                        const Boundary& zeta_hi, const Boundary& zeta_lo,
                                        const PointSet& eta, const PointSet& gamma, int cap) {
    if (!boundary_geq(zeta_hi, zeta_lo))
        throw std::invalid_argument("holley_condition_check: boundary order violated");
    return holley_inequality(space, params, zeta_hi, zeta_lo, eta, gamma, cap);
}

double IncreasingFunctional::eval(const Space& space, const OrderedConfiguration& config) const {
    auto in_region = [&](const Particle& p) {
        if (kind == Kind::RedNearPoint) {
            Point center{lo, 0, -1};
            return distance(space, p.pos, center) <= hi;
        }
        return p.pos.x >= lo && p.pos.x < hi;
    };
    switch (kind) {
        case Kind::RedCountIn: {
            double n = 0;
            for (const auto& p : config)
                if (p.color == Color::Red && in_region(p)) n += 1;
            return n;
        }
        case Kind::NegBlueCountIn: {
            double n = 0;
            for (const auto& p : config)
                if (p.color == Color::Blue && in_region(p)) n += 1;
            return -n;
        }
        case Kind::RedNearPoint: {
            for (const auto& p : config)
                if (p.color == Color::Red && in_region(p)) return 1.0;
            return 0.0;
        }
    }
    return 0.0;
}

std::pair<double, double> positive_association_estimate(const Space& space,
                                                        const ModelParams& params,
                                                        const IncreasingFunctional& f,
                                                        const IncreasingFunctional& g,
                                                        std::int64_t samples,
                                                        std::uint64_t seed) {
    require_params(params);
    if (samples < 100) throw std::invalid_argument("need at least 100 samples");
    const int batches = 50;
    std::vector<double> cov_b(batches, 0.0);
    std::vector<double> fs(static_cast<std::size_t>(samples)), gs(static_cast<std::size_t>(samples));
    parallel_for(samples, [&](std::int64_t i) {
        OrderedConfiguration sample =
            sample_stationary_stream(space, params, seed, static_cast<std::uint64_t>(i) + 1);
        fs[static_cast<std::size_t>(i)] = f.eval(space, sample);
        gs[static_cast<std::size_t>(i)] = g.eval(space, sample);
    });
    // Batch-means covariance estimates over independent sample batches.
    for (int b = 0; b < batches; ++b) {
        std::int64_t lo = b * samples / batches;
        std::int64_t hi = (b + 1) * samples / batches;
        double mf = 0, mg = 0, mfg = 0;
        double n = static_cast<double>(hi - lo);
        for (std::int64_t i = lo; i < hi; ++i) {
            mf += fs[static_cast<std::size_t>(i)];
            mg += gs[static_cast<std::size_t>(i)];
            mfg += fs[static_cast<std::size_t>(i)] * gs[static_cast<std::size_t>(i)];
        }
        mf /= n; mg /= n; mfg /= n;
        cov_b[static_cast<std::size_t>(b)] = (mfg - mf * mg) * n / (n - 1.0);
    }
    double mean = 0.0;
    for (double c : cov_b) mean += c;
    mean /= batches;
    double var = 0.0;
    for (double c : cov_b) var += (c - mean) * (c - mean);
    var /= (batches - 1);
    return {mean, std::sqrt(var / batches)};
}

PointSet random_configuration(const Space& space, std::uint64_t seed, std::uint64_t stream,
                              std::int64_t index, const RandomConfigOptions& opts) {
    Rng rng(seed, stream, index);
    const double L = space.is_finite() ? 0.0 : total_measure(space);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        int n = std::min(opts.max_points, rng.poisson(opts.mean_points));
        PointSet pts;
        for (int i = 0; i < n; ++i) {
            MarkedPoint mp;
            if (space.is_finite()) {
                mp.pos.type = static_cast<int>(rng.index(space.finite().names.size()));
                mp.color = finite_type_color(space.finite(), mp.pos.type);
            } else {
                mp.pos.x = rng.uniform(0.0, L);
                if (space.is_torus()) mp.pos.y = rng.uniform(0.0, L);
                mp.color = rng.coin() ? Color::Red : Color::Blue;
            }
            pts.push_back(mp);
        }
        pts = sorted_points(std::move(pts));
        if (!opts.require_valid || is_valid_marked_set(space, pts)) return pts;
    }
    throw sampling_error("random_configuration: rejection sampling failed");
}

} // namespace fifm
