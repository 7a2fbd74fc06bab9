#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oukit/report.hpp"
#include "oukit/semigroup.hpp"

namespace oukit {

/// Names accepted in SuiteConfig::suites, in report order.
const std::vector<std::string>& suite_names();

struct SuiteConfig {
    std::string system_path;                 // empty selects the scalar heat system in d = 2
    std::vector<std::string> suites;         // empty selects every suite
    std::optional<GridSpec> grid;            // default: [-6, 6]^2 with 61 nodes per axis, [-8, 8]^d with 33 for d >= 3
    std::optional<GridSpec> resolvent_grid;  // default: [-6, 6]^d with 41 (d = 2) or 21 (d >= 3) nodes per axis
    std::vector<double> t_grid{0.1, 0.5, 1.0, 2.0};
    std::vector<cplx> lambdas;               // explicit resolvent parameters
    std::vector<double> lambda_offsets{1.0, 2.0, 4.0};  // used when lambdas is empty: lambda = omega + offset
    std::vector<WeightFunction> weights{unit_weight(), make_weight(WeightKind::cosh_abs, 0.3),
                                        make_weight(WeightKind::exp_smooth, 0.3)};
    std::vector<double> p_values{1.0, 2.0};
    double resolvent_mu = 0.1;               // exp_smooth exponent of the resolvent target weight
    double tol = 1e-6;
    std::string out_dir = ".";
    std::uint64_t seed = kDefaultSeed;
};

/// Reads a JSON configuration; every present key overrides the matching field of base.
/// Relative system paths resolve against the directory of config_path.
SuiteConfig suite_config_from_json(const std::string& text, const SuiteConfig& base = {},
                                   const std::string& config_path = {});

/// Checks names, tolerances and referenced files; raises ConfigInvalid.
void validate_config(const SuiteConfig& cfg);

/// Scalar heat operator A = 1, B = 0, S = 0.
OUSystem default_heat_system(int d = 2);

/// Runs one suite on a validated system. Errors inside a check become failure records.
std::vector<VerificationRecord> run_suite(const std::string& name, const OUSystem& sys, const SuiteConfig& cfg);

/// Loads the system and runs the selected suites (in parallel up to thread_count()).
/// A system that fails validation yields a single failure record named after the error code.
/// Records are ordered by suite name.
std::vector<VerificationRecord> run_verify(const SuiteConfig& cfg);

/// True iff every record passes and there is at least one record.
bool all_pass(const std::vector<VerificationRecord>& records);

/// CSV t,C1..C6 for the given times, weight exponent eta and exponent p.
std::string eval_bounds_csv(const OUSystem& sys, const std::vector<double>& t_values, double eta, double p,
                            double C_theta = 1.0);

/// Log-spaced sequence of count values from a to b.
std::vector<double> logspace(double a, double b, int count);

}  // namespace oukit
