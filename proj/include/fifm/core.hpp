#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fifm/space.hpp"

namespace fifm {

/// Model parameters: `intensity` scales the base measure of the space
/// (arrival rates and all neighborhood masses), `mu` is the reneging rate.
/// The interaction radius lives on the Space.
struct ModelParams {
    double intensity = 1.0;
    double mu = 1.0;
};

void require_params(const ModelParams& p, bool need_positive_mu = true);

/// Effective lambda_bar(N(A)) under the model's intensity.
inline double nbhd_mass(const Space& space, const ModelParams& params,
                        std::span<const MarkedPoint> pts) {
    return params.intensity * neighborhood_measure(space, pts);
}

struct Particle {
    Point pos;
    Color color = Color::Red;
    double birth = 0.0;
    double patience = 0.0;
    std::int64_t id = 0;

    double expiry() const { return birth + patience; }
    MarkedPoint marked() const { return {pos, color}; }
};

/// Process state: particles in arrival/priority order.
using OrderedConfiguration = std::vector<Particle>;

std::vector<MarkedPoint> marked_points(const OrderedConfiguration& config);

enum class Mark : std::uint8_t { Unmatched = 0, Matched = 1 }; // "u" / "m"

struct DetailedItem {
    Point pos;
    Color color = Color::Red;
    Mark mark = Mark::Unmatched;
};

/// State of a backward or forward detailed process.
using DetailedState = std::vector<DetailedItem>;

/// True iff no opposite-color pair sits within the interaction radius.
bool is_valid_configuration(const Space& space, const OrderedConfiguration& config);
bool is_valid_marked_set(const Space& space, std::span<const MarkedPoint> pts);

/// Validity of a backward detailed state: leading element unmatched, no
/// compatible unmatched pair, and no matched item compatible with an
/// earlier unmatched one.
bool is_valid_detailed(const Space& space, const DetailedState& state);

struct MatchOutcome {
    std::optional<std::size_t> matched_index; // empty means accepted

    bool accepted() const { return !matched_index.has_value(); }
};

/// Apply the matching rule to one arrival: match the lowest-ranked particle
/// of opposite color within the interaction radius, else accept.
MatchOutcome fifm_match(const Space& space, const OrderedConfiguration& config,
                        const MarkedPoint& arrival);

/// JSON (de)serialization of configurations; arrays of
/// {pos, color, birth, patience, id}.
std::string configuration_to_json(const Space& space, const OrderedConfiguration& config);
OrderedConfiguration configuration_from_json(const Space& space, const std::string& text);

} // namespace fifm
