#pragma once

#include <algorithm>
#include <cassert>
#include <utility>
#include <vector>

namespace fifm {

/// Union of disjoint closed intervals on the real line, kept sorted and merged.
/// All 1D region bookkeeping (neighborhoods, priority regions, acceptance
/// regions) reduces to operations on this type.
class IntervalSet {
public:
    IntervalSet() = default;

    void add(double lo, double hi) {
        if (hi <= lo) {
            if (hi < lo) return;
            // zero-length interval carries no measure; drop it
            return;
        }
        parts_.emplace_back(lo, hi);
        normalize();
    }

    double measure() const {
        double m = 0.0;
        for (const auto& [lo, hi] : parts_) m += hi - lo;
        return m;
    }

    bool empty() const { return parts_.empty(); }

    bool contains(double p) const {
        for (const auto& [lo, hi] : parts_) {
            if (p < lo) return false;
            if (p <= hi) return true;
        }
        return false;
    }

    /// Complement within the base interval [0, length].
    IntervalSet complement(double length) const {
        IntervalSet out;
        double cursor = 0.0;
        for (const auto& [lo, hi] : parts_) {
            if (lo > cursor) out.parts_.emplace_back(cursor, std::min(lo, length));
            cursor = std::max(cursor, hi);
            if (cursor >= length) break;
        }
        if (cursor < length) out.parts_.emplace_back(cursor, length);
        return out;
    }

    IntervalSet intersect(const IntervalSet& other) const {
        IntervalSet out;
        auto a = parts_.begin();
        auto b = other.parts_.begin();
        while (a != parts_.end() && b != other.parts_.end()) {
            double lo = std::max(a->first, b->first);
            double hi = std::min(a->second, b->second);
            if (hi > lo) out.parts_.emplace_back(lo, hi);
            if (a->second < b->second) ++a; else ++b;
        }
        return out;
    }

    /// Set difference this \ other.
    IntervalSet subtract(const IntervalSet& other) const {
        IntervalSet out;
        for (auto [lo, hi] : parts_) {
            double cursor = lo;
            for (const auto& [olo, ohi] : other.parts_) {
                if (ohi <= cursor) continue;
                if (olo >= hi) break;
                if (olo > cursor) out.parts_.emplace_back(cursor, std::min(olo, hi));
                cursor = std::max(cursor, ohi);
                if (cursor >= hi) break;
            }
            if (cursor < hi) out.parts_.emplace_back(cursor, hi);
        }
        return out;
    }

    /// Point at cumulative length u from the left, u in [0, measure()].
    /// Used for inverse-cdf sampling of uniform points on the set.
    double point_at(double u) const {
        assert(!parts_.empty());
        for (const auto& [lo, hi] : parts_) {
            double len = hi - lo;
            if (u <= len) return lo + u;
            u -= len;
        }
        return parts_.back().second;
    }

    const std::vector<std::pair<double, double>>& parts() const { return parts_; }

private:
    void normalize() {
        std::sort(parts_.begin(), parts_.end());
        std::vector<std::pair<double, double>> merged;
        for (const auto& iv : parts_) {
            if (!merged.empty() && iv.first <= merged.back().second) {
                merged.back().second = std::max(merged.back().second, iv.second);
            } else {
                merged.push_back(iv);
            }
        }
        parts_ = std::move(merged);
    }

    std::vector<std::pair<double, double>> parts_;
};

} // namespace fifm
