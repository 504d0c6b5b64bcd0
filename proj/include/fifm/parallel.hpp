#pragma once

#include <cstdint>
#include <functional>

namespace fifm {

/// Worker count: FIFM_WORKERS when set, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, n) across workers. Callers keep determinism by
/// writing to disjoint, index-addressed slots and reducing in index order.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

} // namespace fifm
