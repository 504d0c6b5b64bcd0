#include "fifm/space.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fifm/errors.hpp"

namespace fifm {

namespace {

using json = nlohmann::json;

double wrap_delta(double a, double b, double period) {
    double d = std::fabs(a - b);
    d = std::fmod(d, period);
    return std::min(d, period - d);
}

} // namespace

Space make_interval(double length, double radius) {
    if (length <= 0 || radius <= 0) throw std::invalid_argument("interval: length and radius must be positive");
    return Space{SpaceInterval{length}, radius};
}

Space make_circle(double length, double radius) {
    if (length <= 0 || radius <= 0) throw std::invalid_argument("circle: length and radius must be positive");
    return Space{SpaceCircle{length}, radius};
}

Space make_torus(double side, double radius, int grid_resolution) {
    if (side <= 0 || radius <= 0) throw std::invalid_argument("torus: side and radius must be positive");
    if (grid_resolution < 2) throw std::invalid_argument("torus: grid resolution too small");
    return Space{SpaceTorus2D{side, grid_resolution}, radius};
}

Space make_finite(std::vector<std::string> names, std::vector<double> weights,
                  const std::vector<std::pair<int, int>>& edges, double radius) {
    const int n = static_cast<int>(names.size());
    if (n == 0) throw std::invalid_argument("finite space: needs at least one type");
    if (n > 64) throw capability_error("finite space: at most 64 types supported");
    if (weights.size() != names.size()) throw std::invalid_argument("finite space: one weight per type");
    for (double w : weights)
        if (w <= 0) throw std::invalid_argument("finite space: weights must be positive");

    SpaceFinite f;
    f.names = std::move(names);
    f.weights = std::move(weights);
    f.adjacency.assign(n, 0);
    // Side assignment: an edge [i, j] puts i on the customer side and j on
    // the server side. Types untouched by any edge default to customers.
    std::vector<int> side(n, -1);
    for (auto [i, j] : edges) {
        if (i < 0 || i >= n || j < 0 || j >= n || i == j)
            throw std::invalid_argument("finite space: bad edge");
        if (side[i] == 1 || side[j] == 0)
            throw std::invalid_argument("finite space: edges do not form a bipartite customer/server graph");
        side[i] = 0;
        side[j] = 1;
        f.adjacency[i] |= (1ull << j);
        f.adjacency[j] |= (1ull << i);
    }
    f.customer.resize(n);
    for (int i = 0; i < n; ++i) f.customer[i] = side[i] != 1;
    return Space{std::move(f), radius};
}

Space space_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("space descriptor: invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument("space descriptor: missing \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    const double radius = j.value("radius", 1.0);
    if (kind == "interval") return make_interval(j.at("length").get<double>(), radius);
    if (kind == "circle") return make_circle(j.at("length").get<double>(), radius);
    if (kind == "torus2d")
        return make_torus(j.at("side").get<double>(), radius, j.value("grid_resolution", 256));
    if (kind == "finite") {
        std::vector<std::string> names;
        if (j.contains("types")) {
            for (const auto& t : j.at("types")) {
                if (t.is_string()) names.push_back(t.get<std::string>());
                else names.push_back(t.dump());
            }
        }
        std::vector<double> weights = j.value("weights", std::vector<double>(names.size(), 1.0));
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : j.at("edges"))
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        return make_finite(std::move(names), std::move(weights), edges, radius);
    }
    throw std::invalid_argument("space descriptor: unknown kind \"" + kind + "\"");
}

std::string space_to_json(const Space& space) {
    json j;
    j["radius"] = space.radius;
    if (space.is_interval()) {
        j["kind"] = "interval";
        j["length"] = std::get<SpaceInterval>(space.kind).length;
    } else if (space.is_circle()) {
        j["kind"] = "circle";
        j["length"] = std::get<SpaceCircle>(space.kind).length;
    } else if (space.is_torus()) {
        const auto& t = std::get<SpaceTorus2D>(space.kind);
        j["kind"] = "torus2d";
        j["side"] = t.side;
        j["grid_resolution"] = t.grid_resolution;
    } else {
        const auto& f = space.finite();
        j["kind"] = "finite";
        j["types"] = f.names;
        j["weights"] = f.weights;
        json edges = json::array();
        for (size_t i = 0; i < f.names.size(); ++i)
            for (size_t k = i + 1; k < f.names.size(); ++k)
                if (f.adjacency[i] & (1ull << k)) edges.push_back({f.customer[i] ? i : k, f.customer[i] ? k : i});
        j["edges"] = edges;
    }
    return j.dump();
}

double total_measure(const Space& space) {
    if (space.is_interval()) return std::get<SpaceInterval>(space.kind).length;
    if (space.is_circle()) return std::get<SpaceCircle>(space.kind).length;
    if (space.is_torus()) {
        double s = std::get<SpaceTorus2D>(space.kind).side;
        return s * s;
    }
    double sum = 0.0;
    for (double w : space.finite().weights) sum += w;
    return sum;
}

double lambda_bar_total(const Space& space) {
    return space.is_finite() ? total_measure(space) : 2.0 * total_measure(space);
}

bool contains_point(const Space& space, const Point& p) {
    if (space.is_interval()) {
        double L = std::get<SpaceInterval>(space.kind).length;
        return p.x >= 0.0 && p.x <= L;
    }
    if (space.is_circle()) {
        double L = std::get<SpaceCircle>(space.kind).length;
        return p.x >= 0.0 && p.x < L + 1e-12;
    }
    if (space.is_torus()) {
        double L = std::get<SpaceTorus2D>(space.kind).side;
        return p.x >= 0.0 && p.x < L + 1e-12 && p.y >= 0.0 && p.y < L + 1e-12;
    }
    return p.type >= 0 && p.type < static_cast<int>(space.finite().names.size());
}

void require_point(const Space& space, const Point& p) {
    if (!contains_point(space, p)) throw std::domain_error("point outside domain");
}

double distance(const Space& space, const Point& p, const Point& q) {
    require_point(space, p);
    require_point(space, q);
    if (space.is_interval()) return std::fabs(p.x - q.x);
    if (space.is_circle()) return wrap_delta(p.x, q.x, std::get<SpaceCircle>(space.kind).length);
    if (space.is_torus()) {
        double L = std::get<SpaceTorus2D>(space.kind).side;
        return std::hypot(wrap_delta(p.x, q.x, L), wrap_delta(p.y, q.y, L));
    }
    const auto& f = space.finite();
    if (p.type == q.type) return 0.0;
    return (f.adjacency[p.type] >> q.type) & 1u ? 1.0 : 2.0;
}

Color finite_type_color(const SpaceFinite& f, int type) {
    return f.customer[type] ? Color::Red : Color::Blue;
}

namespace {

void add_ball_1d(IntervalSet& set, const Space& space, double p, double r) {
    if (space.is_interval()) {
        double L = std::get<SpaceInterval>(space.kind).length;
        set.add(std::max(0.0, p - r), std::min(L, p + r));
        return;
    }
    double L = std::get<SpaceCircle>(space.kind).length;
    if (2.0 * r >= L) {
        set.add(0.0, L);
        return;
    }
    double lo = std::fmod(p - r, L);
    if (lo < 0) lo += L;
    double hi = lo + 2.0 * r;
    if (hi <= L) {
        set.add(lo, hi);
    } else {
        set.add(lo, L);
        set.add(0.0, hi - L);
    }
}

} // namespace

IntervalSet covered_side_1d(const Space& space, std::span<const MarkedPoint> pts, Color side) {
    IntervalSet set;
    for (const auto& mp : pts) {
        if (opposite(mp.color) != side) continue;
        require_point(space, mp.pos);
        add_ball_1d(set, space, mp.pos.x, space.radius);
    }
    return set;
}

std::uint64_t covered_side_finite(const Space& space, std::span<const MarkedPoint> pts, Color side) {
    const auto& f = space.finite();
    std::uint64_t bits = 0;
    for (const auto& mp : pts) {
        if (opposite(mp.color) != side) continue;
        require_point(space, mp.pos);
        bits |= f.adjacency[mp.pos.type];
    }
    // Restrict to types whose own side-color equals `side`; bipartiteness
    // makes this a no-op but it keeps degenerate graphs consistent.
    std::uint64_t side_mask = 0;
    for (size_t i = 0; i < f.names.size(); ++i)
        if (finite_type_color(f, static_cast<int>(i)) == side) side_mask |= (1ull << i);
    return bits & side_mask;
}

double finite_mass(const SpaceFinite& f, std::uint64_t bits) {
    double m = 0.0;
    while (bits) {
        int i = std::countr_zero(bits);
        m += f.weights[i];
        bits &= bits - 1;
    }
    return m;
}

namespace {

struct TorusGrid {
    double side = 0.0;
    double h = 0.0;
    int cells = 0;
};

TorusGrid torus_grid(const Space& space) {
    const auto& t = std::get<SpaceTorus2D>(space.kind);
    TorusGrid g;
    g.side = t.side;
    double target_h = space.radius / static_cast<double>(t.grid_resolution);
    g.cells = std::max(2, static_cast<int>(std::ceil(t.side / target_h)));
    g.h = t.side / g.cells;
    return g;
}

// Classify each grid cell center against the union of radius balls around
// `centers`; count interior cells, and cells near any ball boundary for the
// error bound (a cell is only misclassified if the boundary crosses it,
// which requires its center within half a cell diagonal of the boundary).
MeasureWithError torus_union_area(const Space& space, const std::vector<Point>& centers) {
    if (centers.empty()) return {0.0, 0.0};
    TorusGrid g = torus_grid(space);
    const double r = space.radius;
    const double half_diag = 0.5 * g.h * std::sqrt(2.0);
    std::int64_t inside = 0, uncertain = 0;
    for (int ix = 0; ix < g.cells; ++ix) {
        double cx = (ix + 0.5) * g.h;
        for (int iy = 0; iy < g.cells; ++iy) {
            double cy = (iy + 0.5) * g.h;
            double best = 1e300;
            for (const auto& c : centers) {
                double d = std::hypot(wrap_delta(cx, c.x, g.side), wrap_delta(cy, c.y, g.side));
                best = std::min(best, d);
                if (best <= r - half_diag) break;
            }
            if (best <= r) ++inside;
            if (std::fabs(best - r) <= half_diag) ++uncertain;
        }
    }
    double cell_area = g.h * g.h;
    return {static_cast<double>(inside) * cell_area, static_cast<double>(uncertain) * cell_area};
}

} // namespace

MeasureWithError neighborhood_measure_with_error(const Space& space,
                                                 std::span<const MarkedPoint> pts) {
    if (space.is_one_dimensional()) {
        double v = covered_side_1d(space, pts, Color::Red).measure() +
                   covered_side_1d(space, pts, Color::Blue).measure();
        return {v, 0.0};
    }
    if (space.is_finite()) {
        const auto& f = space.finite();
        double v = finite_mass(f, covered_side_finite(space, pts, Color::Red)) +
                   finite_mass(f, covered_side_finite(space, pts, Color::Blue));
        return {v, 0.0};
    }
    MeasureWithError out;
    for (Color side : {Color::Red, Color::Blue}) {
        std::vector<Point> centers;
        for (const auto& mp : pts) {
            if (opposite(mp.color) != side) continue;
            require_point(space, mp.pos);
            centers.push_back(mp.pos);
        }
        auto [v, e] = torus_union_area(space, centers);
        out.value += v;
        out.error_bound += e;
    }
    return out;
}

double neighborhood_measure(const Space& space, std::span<const MarkedPoint> pts) {
    return neighborhood_measure_with_error(space, pts).value;
}

double priority_region_measure(const Space& space, std::span<const MarkedPoint> prefix,
                               const MarkedPoint& x) {
    require_point(space, x.pos);
    const Color side = opposite(x.color); // mark side where N(x) lives
    if (space.is_one_dimensional()) {
        IntervalSet own;
        add_ball_1d(own, space, x.pos.x, space.radius);
        return own.subtract(covered_side_1d(space, prefix, side)).measure();
    }
    if (space.is_finite()) {
        const auto& f = space.finite();
        std::uint64_t own = f.adjacency[x.pos.type];
        return finite_mass(f, own & ~covered_side_finite(space, prefix, side));
    }
    // Torus: grid quadrature of ball(x) minus the same-side prefix balls.
    TorusGrid g = torus_grid(space);
    const double r = space.radius;
    std::vector<Point> sub;
    for (const auto& mp : prefix)
        if (opposite(mp.color) == side) sub.push_back(mp.pos);
    std::int64_t count = 0;
    // Scan only the bounding box of ball(x).
    int lo_x = static_cast<int>(std::floor((x.pos.x - r) / g.h)) - 1;
    int hi_x = static_cast<int>(std::ceil((x.pos.x + r) / g.h)) + 1;
    int lo_y = static_cast<int>(std::floor((x.pos.y - r) / g.h)) - 1;
    int hi_y = static_cast<int>(std::ceil((x.pos.y + r) / g.h)) + 1;
    for (int ix = lo_x; ix <= hi_x; ++ix) {
        double cx = (ix + 0.5) * g.h;
        for (int iy = lo_y; iy <= hi_y; ++iy) {
            double cy = (iy + 0.5) * g.h;
            double d = std::hypot(wrap_delta(cx, x.pos.x, g.side), wrap_delta(cy, x.pos.y, g.side));
            if (d > r) continue;
            bool covered = false;
            for (const auto& c : sub) {
                if (std::hypot(wrap_delta(cx, c.x, g.side), wrap_delta(cy, c.y, g.side)) <= r) {
                    covered = true;
                    break;
                }
            }
            if (!covered) ++count;
        }
    }
    return static_cast<double>(count) * g.h * g.h;
}

} // namespace fifm
