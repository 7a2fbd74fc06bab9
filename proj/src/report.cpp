#include "oukit/report.hpp"

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "oukit/errors.hpp"

namespace oukit {

namespace {

nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double from_number(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

VerificationRecord upper_bound_record(std::string property, std::string anchor, double measured, double bound,
                                      double tolerance, double est_error, std::string detail) {
    VerificationRecord r;
    r.property = std::move(property);
    r.anchor = std::move(anchor);
    r.measured = measured;
    r.bound = bound;
    r.tolerance = tolerance;
    r.est_error = est_error;
    r.detail = std::move(detail);
    r.pass = std::isfinite(measured) && std::isfinite(bound) && measured <= bound * (1.0 + tolerance);
    return r;
}

VerificationRecord failure_record(std::string property, std::string anchor, std::string detail) {
    VerificationRecord r;
    r.property = std::move(property);
    r.anchor = std::move(anchor);
    r.measured = std::numeric_limits<double>::quiet_NaN();
    r.bound = std::numeric_limits<double>::quiet_NaN();
    r.pass = false;
    r.detail = std::move(detail);
    return r;
}

std::string records_to_json(const std::vector<VerificationRecord>& records, bool include_runtime) {
    nlohmann::json arr = nlohmann::json::array();
    for (const VerificationRecord& r : records) {
        nlohmann::json j;
        j["property"] = r.property;
        j["anchor"] = r.anchor;
        j["suite"] = r.suite;
        j["measured"] = number(r.measured);
        j["bound"] = number(r.bound);
        j["tolerance"] = number(r.tolerance);
        j["pass"] = r.pass;
        j["est_error"] = number(r.est_error);
        if (include_runtime) j["runtime_ms"] = number(r.runtime_ms);
        j["detail"] = r.detail;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

std::vector<VerificationRecord> records_from_json(const std::string& text) {
    std::vector<VerificationRecord> out;
    try {
        const nlohmann::json arr = nlohmann::json::parse(text);
        for (const auto& j : arr) {
            VerificationRecord r;
            r.property = j.at("property").get<std::string>();
            r.anchor = j.value("anchor", "");
            r.suite = j.value("suite", "");
            r.measured = from_number(j.at("measured"));
            r.bound = from_number(j.at("bound"));
            r.tolerance = from_number(j.at("tolerance"));
            r.pass = j.at("pass").get<bool>();
            r.est_error = from_number(j.at("est_error"));
            if (j.contains("runtime_ms")) r.runtime_ms = from_number(j.at("runtime_ms"));
            r.detail = j.value("detail", "");
            out.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("report parse error: ") + e.what());
    }
    return out;
}

std::string records_summary(const std::vector<VerificationRecord>& records) {
    std::ostringstream os;
    std::size_t failed = 0;
    for (const VerificationRecord& r : records) {
        if (!r.pass) ++failed;
        os << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(12) << r.suite << std::setw(44) << r.property
           << std::right << std::scientific << std::setprecision(4) << std::setw(13) << r.measured << " <= "
           << std::setw(11) << r.bound;
        if (!r.detail.empty()) os << "  " << r.detail;
        os << "\n";
    }
    os << records.size() << " records, " << failed << " failed\n";
    return os.str();
}

}  // namespace oukit
