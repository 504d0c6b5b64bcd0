#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fifm/geometry.hpp"

namespace fifm {

enum class Color : std::uint8_t { Red = 0, Blue = 1 };

constexpr Color opposite(Color c) { return c == Color::Red ? Color::Blue : Color::Red; }

inline const char* color_name(Color c) { return c == Color::Red ? "R" : "B"; }

/// A location in whichever domain is in use. 1D domains use x, the torus
/// uses (x, y), finite type spaces use the type index.
struct Point {
    double x = 0.0;
    double y = 0.0;
    int type = -1;

    bool operator==(const Point&) const = default;
};

struct MarkedPoint {
    Point pos;
    Color color = Color::Red;

    bool operator==(const MarkedPoint&) const = default;
};

struct SpaceInterval {
    double length = 1.0;
};

struct SpaceCircle {
    double length = 1.0; // circumference
};

struct SpaceTorus2D {
    double side = 1.0;
    int grid_resolution = 256; // grid cells per interaction radius for area quadrature
};

/// Finite type space backed by a bipartite compatibility graph. Customer
/// types carry color Red, server types Blue; compatibility (graph edges)
/// is encoded as distance 1 so that "distance <= radius" means matchable.
struct SpaceFinite {
    std::vector<std::string> names;
    std::vector<double> weights;       // lambda mass per type
    std::vector<bool> customer;        // side of each type (true = customer/Red)
    std::vector<std::uint64_t> adjacency; // bitset of compatible types, per type
};

struct Space {
    std::variant<SpaceInterval, SpaceCircle, SpaceTorus2D, SpaceFinite> kind;
    double radius = 1.0; // interaction radius

    bool is_interval() const { return std::holds_alternative<SpaceInterval>(kind); }
    bool is_circle() const { return std::holds_alternative<SpaceCircle>(kind); }
    bool is_torus() const { return std::holds_alternative<SpaceTorus2D>(kind); }
    bool is_finite() const { return std::holds_alternative<SpaceFinite>(kind); }
    bool is_one_dimensional() const { return is_interval() || is_circle(); }

    const SpaceFinite& finite() const { return std::get<SpaceFinite>(kind); }
};

Space make_interval(double length, double radius = 1.0);
Space make_circle(double length, double radius = 1.0);
Space make_torus(double side, double radius = 1.0, int grid_resolution = 256);
Space make_finite(std::vector<std::string> names, std::vector<double> weights,
                  const std::vector<std::pair<int, int>>& edges, double radius = 1.0);

/// Parse the JSON space descriptor, e.g. {"kind":"interval","length":5.0}.
Space space_from_json(const std::string& text);
std::string space_to_json(const Space& space);

/// lambda(D): total mass of the base measure on positions.
double total_measure(const Space& space);

/// lambda_bar(D x C): total mass including color marks. Twice lambda(D) on
/// continuum domains; equal to the weight sum on finite type spaces, where
/// the color is determined by the type's side.
double lambda_bar_total(const Space& space);

bool contains_point(const Space& space, const Point& p);
void require_point(const Space& space, const Point& p);

/// Metric distance. Wrap-around on circle/torus. On finite type spaces:
/// 0 for equal types, 1 for compatible types, 2 otherwise.
double distance(const Space& space, const Point& p, const Point& q);

/// Color of an arrival at p: free on continuum domains, determined by the
/// type's side on finite spaces.
Color finite_type_color(const SpaceFinite& f, int type);

/// Region of D covered on mark-side `side` by the neighborhoods N(x) of the
/// given marked points, i.e. the union of radius balls around points of
/// color opposite(side). 1D spaces only.
IntervalSet covered_side_1d(const Space& space, std::span<const MarkedPoint> pts, Color side);

/// Same for finite type spaces, as a bitset over types.
std::uint64_t covered_side_finite(const Space& space, std::span<const MarkedPoint> pts, Color side);

double finite_mass(const SpaceFinite& f, std::uint64_t bits);

/// lambda_bar(N(A)) for A the given marked points: mass of the union of
/// radius balls around red points plus the same for blue points.
double neighborhood_measure(const Space& space, std::span<const MarkedPoint> pts);

struct MeasureWithError {
    double value = 0.0;
    double error_bound = 0.0;
};

/// Torus quadrature variant reporting a rigorous cell-diagonal error bound.
MeasureWithError neighborhood_measure_with_error(const Space& space,
                                                 std::span<const MarkedPoint> pts);

/// lambda_bar(W_x) = lambda_bar(N(x) \ N(prefix)) where prefix ranks
/// strictly below x.
double priority_region_measure(const Space& space, std::span<const MarkedPoint> prefix,
                               const MarkedPoint& x);

} // namespace fifm
