#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "fifm/core.hpp"

namespace fifm {

/// Unnormalized densities are carried in log space; exponentiate only at
/// reporting boundaries.
struct DensityValue {
    double log_value = -std::numeric_limits<double>::infinity();
    std::optional<double> normalized;

    bool is_zero() const { return !std::isfinite(log_value); }
    double value() const { return is_zero() ? 0.0 : std::exp(log_value); }
};

/// Streaming log-sum-exp accumulator for permutation sums.
class LogSumAcc {
public:
    void add(double x) {
        if (!std::isfinite(x)) return;
        if (x <= max_) {
            sum_ += std::exp(x - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - x) + 1.0;
            max_ = x;
        }
    }
    double value() const {
        return sum_ <= 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
    }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double sum_ = 0.0;
};

/// rho(n) = intensity * lambda_bar(D x C) + n * mu.
double rho(int n, const Space& space, const ModelParams& params);

/// Ordered product form: prod_i 1 / (lambda_bar(N(gamma_1^i)) + i*mu);
/// zero on invalid configurations, one on the empty one.
DensityValue pi_ordered(const Space& space, const ModelParams& params,
                        const OrderedConfiguration& config);

/// Backward-detailed product form: prod_{i=0}^{n} 1 / rho(Q_u^i) with Q_u^i
/// the number of unmatched items among the first i; zero on invalid states.
DensityValue pi_hat_detailed(const Space& space, const ModelParams& params,
                             const DetailedState& state);

inline constexpr int kDefaultPermutationCap = 9;

/// log of the permutation-summed (unordered) density
/// sum_{orderings} prod_i 1 / (lambda_bar(N(X_1^i)) + i*mu).
/// The validity indicator is *not* included here.
double log_janossy_tilde(const Space& space, const ModelParams& params,
                         std::span<const MarkedPoint> pts,
                         int cap = kDefaultPermutationCap);

/// Boundary condition: a valid configuration outside the window, or one of
/// the red / free / blue presets covering the whole complement.
struct Boundary {
    enum class Preset : std::uint8_t { Free, Red, Blue, Points };
    Preset preset = Preset::Free;
    std::vector<MarkedPoint> points; // Points preset only; positions outside the window

    static Boundary free() { return {}; }
    static Boundary red() { return {Preset::Red, {}}; }
    static Boundary blue() { return {Preset::Blue, {}}; }
    static Boundary of_points(std::vector<MarkedPoint> pts) {
        return {Preset::Points, std::move(pts)};
    }
};

/// Region of the window covered by N(zeta), per mark side.
struct BoundaryClip {
    IntervalSet side[2]; // indexed by Color
};

/// Validates the boundary (it must itself be a valid configuration with all
/// points outside the window) and returns its clip regions.
BoundaryClip boundary_clip(const Space& space, const Boundary& zeta);

/// Boundary-conditioned permutation sum: every neighborhood mass is clipped
/// to the complement of N(zeta).
double log_janossy_boundary(const Space& space, const ModelParams& params,
                            std::span<const MarkedPoint> pts, const Boundary& zeta,
                            int cap = kDefaultPermutationCap);

/// Validity of an interior configuration under a boundary condition:
/// N(x_1^n) must avoid both the configuration and zeta.
bool valid_under_boundary(const Space& space, std::span<const MarkedPoint> pts,
                          const Boundary& zeta);

struct NormConstOptions {
    std::int64_t mc_paths = 4'000'000; // 1D Monte Carlo paths
    std::uint64_t seed = 1;
    std::int64_t node_cap = 50'000'000; // finite-space enumeration guard
};

struct NormConstResult {
    double k_inverse = 1.0;  // sum of the computed terms c_0..c_T
    double tail_bound = 0.0; // rigorous bound on the discarded n > T mass
    double mc_stderr = 0.0;  // statistical error (zero for exact evaluation)
    std::vector<double> terms;
    std::vector<double> term_stderr;

    /// P(|eta| = n) for n = 0..T under the truncated normalization.
    std::vector<double> count_distribution() const;
};

/// K^{-1} = sum_n integral over valid ordered n-tuples of the ordered
/// product form. Exact enumeration on finite type spaces; sequential
/// importance sampling with reported stderr on 1D domains, where nested
/// quadrature would be exponential in the truncation depth. The tail
/// bound is analytic either way.
NormConstResult normalizing_constant(const Space& space, const ModelParams& params,
                                     int truncation, const NormConstOptions& opts = {});

} // namespace fifm
