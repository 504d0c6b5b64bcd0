#include "fifm/core.hpp"

#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fifm {

using json = nlohmann::json;

void require_params(const ModelParams& p, bool need_positive_mu) {
    if (!(p.intensity > 0)) throw std::invalid_argument("intensity must be positive");
    if (p.mu < 0 || !std::isfinite(p.mu)) throw std::invalid_argument("mu must be nonnegative");
    if (need_positive_mu && !(p.mu > 0)) throw std::invalid_argument("mu must be positive");
}

std::vector<MarkedPoint> marked_points(const OrderedConfiguration& config) {
    std::vector<MarkedPoint> pts;
    pts.reserve(config.size());
    for (const auto& p : config) pts.push_back(p.marked());
    return pts;
}

bool is_valid_marked_set(const Space& space, std::span<const MarkedPoint> pts) {
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            if (pts[i].color != pts[j].color &&
                distance(space, pts[i].pos, pts[j].pos) <= space.radius)
                return false;
    return true;
}

bool is_valid_configuration(const Space& space, const OrderedConfiguration& config) {
    auto pts = marked_points(config);
    return is_valid_marked_set(space, pts);
}

bool is_valid_detailed(const Space& space, const DetailedState& state) {
    if (!state.empty() && state.front().mark != Mark::Unmatched) return false;
    const std::size_t n = state.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto& a = state[i];
            const auto& b = state[j];
            if (a.color == b.color) continue;
            bool uu = a.mark == Mark::Unmatched && b.mark == Mark::Unmatched;
            bool um = a.mark == Mark::Unmatched && b.mark == Mark::Matched;
            if (!uu && !um) continue;
            if (distance(space, a.pos, b.pos) <= space.radius) return false;
        }
    }
    return true;
}

MatchOutcome fifm_match(const Space& space, const OrderedConfiguration& config,
                        const MarkedPoint& arrival) {
    require_point(space, arrival.pos);
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (config[i].color == arrival.color) continue;
        if (distance(space, config[i].pos, arrival.pos) <= space.radius)
            return MatchOutcome{i};
    }
    return MatchOutcome{};
}

namespace {

json point_to_json(const Space& space, const Point& p) {
    if (space.is_torus()) return json::array({p.x, p.y});
    if (space.is_finite()) return json(space.finite().names[p.type]);
    return json(p.x);
}

Point point_from_json(const Space& space, const json& j) {
    Point p;
    if (space.is_torus()) {
        p.x = j.at(0).get<double>();
        p.y = j.at(1).get<double>();
    } else if (space.is_finite()) {
        const auto& names = space.finite().names;
        std::string name = j.is_string() ? j.get<std::string>() : j.dump();
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) { p.type = static_cast<int>(i); return p; }
        throw std::invalid_argument("unknown type name: " + name);
    } else {
        p.x = j.get<double>();
    }
    return p;
}

} // namespace

std::string configuration_to_json(const Space& space, const OrderedConfiguration& config) {
    json arr = json::array();
    for (const auto& p : config) {
        arr.push_back({{"pos", point_to_json(space, p.pos)},
                       {"color", color_name(p.color)},
                       {"birth", p.birth},
                       {"patience", p.patience},
                       {"id", p.id}});
    }
    return arr.dump();
}

OrderedConfiguration configuration_from_json(const Space& space, const std::string& text) {
    json arr = json::parse(text);
    OrderedConfiguration config;
    std::int64_t next_id = -static_cast<std::int64_t>(arr.size());
    for (const auto& j : arr) {
        Particle p;
        p.pos = point_from_json(space, j.at("pos"));
        require_point(space, p.pos);
        std::string c = j.at("color").get<std::string>();
        if (c == "R" || c == "red") p.color = Color::Red;
        else if (c == "B" || c == "blue") p.color = Color::Blue;
        else throw std::invalid_argument("bad color: " + c);
        p.birth = j.value("birth", 0.0);
        p.patience = j.value("patience", std::numeric_limits<double>::quiet_NaN());
        p.id = j.value("id", next_id);
        ++next_id;
        config.push_back(p);
    }
    return config;
}

} // namespace fifm
