#pragma once

#include <string>
#include <vector>

namespace fifm {

struct VerificationReport {
    enum class Status { Pass, Fail, Skipped };

    std::string check_name;
    Status status = Status::Skipped;
    double max_error = 0.0;
    std::vector<std::string> witnesses; // populated on failure
    double runtime_s = 0.0;
    std::string detail;

    bool passed() const { return status == Status::Pass; }
    std::string status_name() const;
    std::string line() const;    // one-line terminal summary
    std::string to_json() const;
};

std::string reports_to_json(const std::vector<VerificationReport>& reports);

} // namespace fifm
