#pragma once

#include <cstdint>
#include <vector>

#include "fifm/core.hpp"

namespace fifm {

/// Events of the marked Poisson arrival process, sorted by birth time.
using EventSeq = std::vector<Particle>;

/// Ids pack (block, index-within-block) so that lazily generated blocks
/// carry consistent identities and ids stay monotone in birth time.
constexpr std::int64_t kEventsPerBlock = 1ll << 20;

/// Arrivals falling in the unit time block (block, block + 1], a pure
/// function of (seed, stream, block). Positions are base-measure uniform,
/// colors fair coins (side-determined on finite spaces), patience Exp(mu).
EventSeq generate_block(const Space& space, const ModelParams& params,
                        std::uint64_t seed, std::uint64_t stream, std::int64_t block);

/// Arrivals with birth in [t0, t1), assembled from unit blocks.
EventSeq generate_driving_process(const Space& space, const ModelParams& params,
                                  double t0, double t1, std::uint64_t seed,
                                  std::uint64_t stream = 0);

/// Total arrival rate intensity * lambda_bar(D x C).
double arrival_rate(const Space& space, const ModelParams& params);

/// Draw i.i.d. Exp(mu) patience marks for particles that lack one (NaN).
void assign_missing_patience(OrderedConfiguration& config, const ModelParams& params,
                             std::uint64_t seed);

} // namespace fifm
