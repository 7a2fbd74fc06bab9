#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <functional>

#include "oukit/errors.hpp"
#include "oukit/io.hpp"
#include "oukit/suite.hpp"

using namespace oukit;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::InvalidInput;
}

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "oukit_test_io";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("system documents") {
    const OUSystem sys = system_from_json(R"({"A": [[[1.0, 0.3], 0.5], [0, [1.5, -0.2]]],
                                             "B": [[0.5, 0], [0, 0.5]],
                                             "S": [[0, 1], [-1, 0]]})");
    CHECK(sys.N == 2);
    CHECK(sys.d == 2);
    CHECK(sys.A(0, 0) == cplx(1.0, 0.3));
    CHECK(sys.S(0, 1) == 1.0);
    const OUSystem back = system_from_json(system_to_json(sys));
    CHECK(back.A == sys.A);
    CHECK(back.B == sys.B);
    CHECK(back.S == sys.S);

    const OUSystem scalar = system_from_json(R"({"A": [1.0, 0.2], "B": 0.1, "d": 3})");
    CHECK(scalar.N == 1);
    CHECK(scalar.d == 3);
    CHECK(scalar.S.isZero());

    CHECK(code_of([] { system_from_json("{"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { system_from_json(R"({"A": 1, "B": 0})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { system_from_json(R"({"B": 0, "d": 2})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { system_from_json(R"({"A": 1, "B": 0, "S": [[0, [1, 1]], [-1, 0]]})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { system_from_json(R"({"A": [[1, 0], [0]], "B": 0, "d": 2})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { system_from_json(R"({"A": -1, "B": 0, "d": 2})"); }) == ErrorCode::NonEllipticA);
    CHECK(code_of([] { system_from_json(R"({"A": 1, "B": 0, "S": [[0, 1], [1, 0]]})"); }) == ErrorCode::NotSkew);
}

TEST_CASE("grid headers") {
    const GridSpec g = cube_grid(2, -1.5, 2.0, 8);
    const GridSpec back = grid_spec_from_json(grid_spec_to_json(g));
    CHECK(back.min == g.min);
    CHECK(back.max == g.max);
    CHECK(back.count == g.count);
    CHECK(code_of([] { grid_spec_from_json(R"({"min": [0], "max": [1]})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { grid_spec_from_json(R"({"min": [1], "max": [0], "count": [3]})"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("grid function CSV round trip") {
    const GridSpec g = cube_grid(2, -1.0, 1.0, 5);
    const GridFunction v = sample(g, 2, [](const VectorXr& x) {
        VectorXc z(2);
        z << cplx(x(0) / 3.0, x(1) * 0.1), cplx(std::exp(x(0)), -1e-300);
        return z;
    });
    const std::string csv = grid_function_to_csv(v);
    CHECK(csv.rfind("x0,x1,re0,im0,re1,im1\r\n", 0) == 0);
    const GridFunction back = grid_function_from_csv(csv, g);
    CHECK(back.N == 2);
    CHECK(back.values == v.values);

    CHECK(code_of([&] { grid_function_from_csv(csv, cube_grid(2, -1.0, 2.0, 5)); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { grid_function_from_csv(csv, cube_grid(2, -1.0, 1.0, 4)); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([&] { grid_function_from_csv("x0,re0,im0\r\n0,abc,0\r\n1,0,0\r\n", cube_grid(1, 0.0, 1.0, 2)); }) ==
          ErrorCode::ConfigInvalid);
}

TEST_CASE("kernel slice") {
    const OUSystem heat = default_heat_system(2);
    const std::string csv = kernel_slice_csv(heat, 1.0, 1, {-1.0, 0.0, 1.0});
    CHECK(csv.rfind("t,psi,re_00,im_00\r\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    CHECK(code_of([&] { kernel_slice_csv(heat, 1.0, 2, {0.0}); }) == ErrorCode::InvalidInput);
}

TEST_CASE("text files") {
    const std::string path = (scratch_dir() / "note.txt").string();
    write_text_file(path, "a\r\nb");
    CHECK(read_text_file(path) == "a\r\nb");
    CHECK(code_of([] { read_text_file("/nonexistent/oukit/file"); }) == ErrorCode::ConfigInvalid);
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
}

TEST_CASE("suite configuration") {
    const auto dir = scratch_dir();
    write_text_file((dir / "sys.json").string(), R"({"A": 1, "B": 0.5, "d": 2})");
    const std::string cfg_path = (dir / "cfg.json").string();
    const SuiteConfig cfg = suite_config_from_json(R"({"system": "sys.json", "suites": ["chapman", "riccati"],
        "grid": "-4:4:21,-4:4:21", "t_grid": [0.5, 1.5], "lambdas": [2, [3, -1]],
        "weights": ["unit", {"kind": "cosh_abs", "mu": 0.2}], "p_values": [2], "tol": 1e-5, "seed": 7})",
                                                   SuiteConfig{}, cfg_path);
    CHECK(cfg.system_path == (dir / "sys.json").string());
    CHECK(cfg.suites == std::vector<std::string>{"chapman", "riccati"});
    REQUIRE(cfg.grid.has_value());
    CHECK(cfg.grid->count == std::vector<int>{21, 21});
    CHECK(cfg.t_grid == std::vector<double>{0.5, 1.5});
    CHECK(cfg.lambdas == std::vector<cplx>{cplx(2.0, 0.0), cplx(3.0, -1.0)});
    CHECK(cfg.weights.size() == 2);
    CHECK(cfg.weights[1].kind == WeightKind::cosh_abs);
    CHECK(cfg.tol == 1e-5);
    CHECK(cfg.seed == 7);
    validate_config(cfg);

    CHECK(code_of([] { suite_config_from_json(R"({"colour": 1})"); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { suite_config_from_json(R"({"t_grid": "soon"})"); }) == ErrorCode::ConfigInvalid);
    SuiteConfig bad;
    bad.suites = {"nonsense"};
    CHECK(code_of([&] { validate_config(bad); }) == ErrorCode::ConfigInvalid);
    bad = SuiteConfig{};
    bad.tol = 0.0;
    CHECK(code_of([&] { validate_config(bad); }) == ErrorCode::ConfigInvalid);
    bad = SuiteConfig{};
    bad.system_path = "/nonexistent/system.json";
    CHECK(code_of([&] { validate_config(bad); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("suite selection and reports") {
    CHECK(std::is_sorted(suite_names().begin(), suite_names().end()));
    SuiteConfig cfg;
    cfg.suites = {"riccati", "chapman"};
    const std::vector<VerificationRecord> records = run_verify(cfg);
    REQUIRE(!records.empty());
    for (const VerificationRecord& r : records) CHECK((r.suite == "chapman" || r.suite == "riccati"));
    CHECK(records.front().suite == "chapman");
    CHECK(all_pass(records));
    CHECK_FALSE(all_pass({}));

    const std::vector<VerificationRecord> again = run_verify(cfg);
    CHECK(records_to_json(records, false) == records_to_json(again, false));

    const auto dir = scratch_dir();
    write_text_file((dir / "bad.json").string(), R"({"A": -1, "B": 0, "d": 2})");
    cfg.system_path = (dir / "bad.json").string();
    const std::vector<VerificationRecord> bad = run_verify(cfg);
    REQUIRE(bad.size() == 1);
    CHECK(bad[0].property == "NonEllipticA");
    CHECK_FALSE(bad[0].pass);

    const std::vector<VerificationRecord> unknown = run_suite("nonsense", default_heat_system(2), SuiteConfig{});
    REQUIRE(unknown.size() == 1);
    CHECK_FALSE(unknown[0].pass);
}

TEST_CASE("bounds CSV and logspace") {
    const std::vector<double> ts = logspace(0.01, 100.0, 5);
    CHECK(ts.front() == 0.01);
    CHECK(ts.back() == 100.0);
    CHECK(ts[2] == doctest::Approx(1.0).epsilon(1e-15));
    const std::string csv = eval_bounds_csv(default_heat_system(2), ts, 0.1, 2.0);
    CHECK(csv.rfind("t,C1,C2,C3,C4,C5,C6", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
}
