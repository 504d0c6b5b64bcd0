#pragma once

#include <cstdint>
#include <vector>

#include "fifm/report.hpp"

namespace fifm {

/// Scale < 1 shrinks replica counts for quick desk checks; tolerances and
/// model parameters never change.
struct VerifyOptions {
    double scale = 1.0;
    std::uint64_t seed = 20240711;

    std::int64_t scaled(std::int64_t n) const {
        auto s = static_cast<std::int64_t>(static_cast<double>(n) * scale);
        return s < 1 ? 1 : s;
    }
};

VerificationReport verify_lemma_aux(const VerifyOptions& opts = {});
VerificationReport verify_local_balance(const VerifyOptions& opts = {});
VerificationReport verify_solve_vs_product_form(const VerifyOptions& opts = {});
VerificationReport verify_cftp_vs_analytics(const VerifyOptions& opts = {});
VerificationReport verify_regeneration_probability(const VerifyOptions& opts = {});
VerificationReport verify_generator_stationarity(const VerifyOptions& opts = {});
VerificationReport verify_fkg_suite(const VerifyOptions& opts = {});
VerificationReport verify_holley(const VerifyOptions& opts = {});
VerificationReport verify_decay(const VerifyOptions& opts = {});
VerificationReport verify_coupling_time(const VerifyOptions& opts = {});
VerificationReport verify_kappa_equivalence(const VerifyOptions& opts = {});
VerificationReport verify_positive_association(const VerifyOptions& opts = {});

std::vector<VerificationReport> verify_all(const VerifyOptions& opts = {});

} // namespace fifm
