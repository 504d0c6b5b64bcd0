#include "fifm/report.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace fifm {

std::string VerificationReport::status_name() const {
    switch (status) {
        case Status::Pass: return "PASS";
        case Status::Fail: return "FAIL";
        case Status::Skipped: return "SKIPPED";
    }
    return "?";
}

std::string VerificationReport::line() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%-7s %-28s max_err=%-12.3g %6.1fs  %s",
                  status_name().c_str(), check_name.c_str(), max_error, runtime_s,
                  detail.c_str());
    return buf;
}

std::string VerificationReport::to_json() const {
    nlohmann::json j;
    j["check_name"] = check_name;
    j["status"] = status_name();
    j["max_error"] = max_error;
    j["witnesses"] = witnesses;
    j["runtime_s"] = runtime_s;
    j["detail"] = detail;
    return j.dump();
}

std::string reports_to_json(const std::vector<VerificationReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(nlohmann::json::parse(r.to_json()));
    return arr.dump(2);
}

} // namespace fifm
