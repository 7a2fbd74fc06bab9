#pragma once

#include <string>
#include <vector>

namespace oukit {

/// One checked property. pass means measured <= bound * (1 + tolerance) unless the check says otherwise.
struct VerificationRecord {
    std::string property;
    std::string anchor;
    std::string suite;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double est_error = 0.0;
    double runtime_ms = 0.0;
    std::string detail;
};

/// Record for measured <= bound * (1 + tolerance).
VerificationRecord upper_bound_record(std::string property, std::string anchor, double measured, double bound,
                                      double tolerance, double est_error = 0.0, std::string detail = {});

/// Record for a failed computation; the message goes into detail.
VerificationRecord failure_record(std::string property, std::string anchor, std::string detail);

/// JSON array of records; runtime_ms is written unless include_runtime is false.
std::string records_to_json(const std::vector<VerificationRecord>& records, bool include_runtime = true);
std::vector<VerificationRecord> records_from_json(const std::string& text);

/// Human-readable summary table.
std::string records_summary(const std::vector<VerificationRecord>& records);

}  // namespace oukit
