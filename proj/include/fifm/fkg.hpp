#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fifm/analytics.hpp"

namespace fifm {

struct LemmaAuxResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_err = 0.0;
};

/// Increasing-path identity: sum over monotone lattice paths of
/// prod 1/(alpha_{x(i)} + beta_{y(i)}) equals prod 1/alpha * prod 1/beta,
/// with alpha_0 = beta_0 = 0. Brute-force path enumeration; n + m <= 16.
LemmaAuxResult lemma_aux_check(std::span<const double> alphas, std::span<const double> betas);

/// Same identity evaluated by dynamic programming over the grid; used as an
/// independent route against the path enumeration.
double lemma_aux_dp(std::span<const double> alphas, std::span<const double> betas);

/// Configurations as sorted multisets of marked points (exact comparison).
using PointSet = std::vector<MarkedPoint>;

PointSet sorted_points(PointSet pts);
PointSet set_union(const PointSet& a, const PointSet& b);
PointSet set_intersect(const PointSet& a, const PointSet& b);
PointSet set_difference(const PointSet& a, const PointSet& b);
PointSet color_part(const PointSet& pts, Color c);
bool sets_disjoint(const PointSet& a, const PointSet& b);

/// The two-color lattice: xi >= gamma iff xi has more reds and fewer blues.
/// join = (red union, blue intersection); meet = (red intersection, blue union).
struct LatticePair {
    PointSet xi, gamma, join, meet;
};
LatticePair make_lattice_pair(const PointSet& xi, const PointSet& gamma);

/// True iff N(a) and N(b) are disjoint subsets of D x C.
bool neighborhoods_disjoint(const Space& space, const PointSet& a, const PointSet& b);

struct InequalityReport {
    bool pass = false;
    bool equality_expected = false;
    double log_lhs = 0.0;
    double log_rhs = 0.0;
    double slack = 0.0; // lhs - rhs in linear scale
    std::string witness;
};

inline constexpr double kInequalitySlack = 1e-12; // absorbs permutation-sum roundoff
inline constexpr double kEqualityTol = 1e-10;

/// Weak lattice property: for disjoint xi, gamma with valid union,
/// Pi(xi u gamma) >= Pi(xi) Pi(gamma), with equality when the
/// neighborhoods do not meet.
InequalityReport fkg_weak_check(const Space& space, const ModelParams& params,
                                const PointSet& xi, const PointSet& gamma,
                                int cap = kDefaultPermutationCap);

/// Same-color lattice property: Pi(xi u gamma) Pi(xi n gamma) >= Pi(xi) Pi(gamma).
InequalityReport fkg_same_type_check(const Space& space, const ModelParams& params,
                                     const PointSet& xi, const PointSet& gamma,
                                     int cap = kDefaultPermutationCap);

/// Two-color lattice property with the join/meet of LatticePair.
InequalityReport fkg_lattice_check(const Space& space, const ModelParams& params,
                                   const LatticePair& pair, int cap = kDefaultPermutationCap);

/// Product split Pi(gamma) = Pi(gamma_R) Pi(gamma_B) for valid gamma.
InequalityReport product_split_check(const Space& space, const ModelParams& params,
                                     const PointSet& gamma, int cap = kDefaultPermutationCap);

/// Raw cross-boundary inequality
///   pi_{zeta_hi}(eta v gamma) pi_{zeta_lo}(eta ^ gamma)
///     >= pi_{zeta_hi}(eta) pi_{zeta_lo}(gamma),
/// vacuous when the right side vanishes (invalid states under their
/// boundaries). Does not require zeta_hi >= zeta_lo.
InequalityReport holley_inequality(const Space& space, const ModelParams& params,
                                   const Boundary& zeta_hi, const Boundary& zeta_lo,
                                   const PointSet& eta, const PointSet& gamma,
                                   int cap = kDefaultPermutationCap);

/// Checked variant: requires zeta_hi >= zeta_lo in the boundary order
/// (more red, less blue).
InequalityReport holley_condition_check(const Space& space, const ModelParams& params,
                                        const Boundary& zeta_hi, const Boundary& zeta_lo,
                                        const PointSet& eta, const PointSet& gamma,
                                        int cap = kDefaultPermutationCap);

bool boundary_geq(const Boundary& a, const Boundary& b);

/// Closed dictionary of functionals increasing for the two-color lattice
/// order (more reds, fewer blues).
struct IncreasingFunctional {
    enum class Kind : std::uint8_t { RedCountIn, NegBlueCountIn, RedNearPoint };
    Kind kind = Kind::RedCountIn;
    double lo = 0.0;
    double hi = 0.0; // region [lo, hi); for RedNearPoint: center lo, radius hi

    double eval(const Space& space, const OrderedConfiguration& config) const;
};

/// Sample covariance of two increasing functionals over perfect stationary
/// samples, with a batch-means standard error.
std::pair<double, double> positive_association_estimate(const Space& space,
                                                        const ModelParams& params,
                                                        const IncreasingFunctional& f,
                                                        const IncreasingFunctional& g,
                                                        std::int64_t samples,
                                                        std::uint64_t seed);

struct RandomConfigOptions {
    double mean_points = 3.0;
    int max_points = 5;
    bool require_valid = true;
};

/// Poisson-count, uniform-position, uniform-color configurations,
/// rejection-sampled to validity when asked.
PointSet random_configuration(const Space& space, std::uint64_t seed, std::uint64_t stream,
                              std::int64_t index, const RandomConfigOptions& opts = {});

} // namespace fifm
