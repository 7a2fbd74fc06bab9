#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "oukit/errors.hpp"
#include "oukit/io.hpp"
#include "oukit/suite.hpp"

using namespace oukit;

namespace {

constexpr int kExitFailures = 1;
constexpr int kExitConfig = 2;

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else write_text_file(path, text);
}

OUSystem system_or_default(const std::string& path, int d) {
    return path.empty() ? default_heat_system(d) : load_system(path);
}

// "re" or "re:im".
cplx parse_complex(const std::string& s) {
    const auto colon = s.find(':');
    try {
        if (colon == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigInvalid, "cannot parse complex value \"" + s + "\"");
    }
}

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) raise(ErrorCode::ConfigInvalid, "count must be positive");
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
    return out;
}

struct VerifyArgs {
    std::string system;
    std::vector<std::string> suites;
    std::string out = ".";
    std::uint64_t seed = kDefaultSeed;
    double tol = 1e-6;
    std::string grid;
    std::string config;
};

int cmd_verify(const VerifyArgs& a) {
    SuiteConfig cfg;
    cfg.system_path = a.system;
    cfg.suites = a.suites;
    cfg.out_dir = a.out;
    cfg.seed = a.seed;
    cfg.tol = a.tol;
    if (!a.grid.empty()) cfg.grid = parse_grid_spec(a.grid);
    if (!a.config.empty()) cfg = suite_config_from_json(read_text_file(a.config), cfg, a.config);
    const std::vector<VerificationRecord> records = run_verify(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    write_text_file((std::filesystem::path(cfg.out_dir) / "report.json").string(), records_to_json(records));
    const std::string summary = records_summary(records);
    write_text_file((std::filesystem::path(cfg.out_dir) / "summary.txt").string(), summary);
    std::cout << summary;
    return all_pass(records) ? 0 : kExitFailures;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Complex Ornstein-Uhlenbeck kernel, semigroup and resolvent toolkit"};
    app.require_subcommand(1);

    VerifyArgs va;
    CLI::App* verify = app.add_subcommand("verify", "Run verification suites and write report.json and summary.txt");
    verify->add_option("--system", va.system, "System JSON file (default: scalar heat operator in d = 2)");
    verify->add_option("--suite", va.suites, "Suites to run (comma separated)")->delimiter(',');
    verify->add_option("--out", va.out, "Output directory");
    verify->add_option("--seed", va.seed, "Random seed");
    verify->add_option("--tol", va.tol, "Relative tolerance of upper-bound checks");
    verify->add_option("--grid", va.grid, "Grid \"min:max:count,...\"");
    verify->add_option("--config", va.config, "JSON configuration; its keys override the flags");

    std::string subject, system, out, grid_text, input, grid_header;
    double t = 1.0, t_min = 1e-2, t_max = 1e2, eta = 0.0, p = 1.0, c_theta = 1.0, psi_min = -5.0, psi_max = 5.0,
           margin = 0.5;
    int t_count = 41, axis = 0, count = 101, dim = 2;
    std::string lambda_text;
    std::vector<std::string> constant;
    double width = 1.0;
    CLI::App* eval = app.add_subcommand("eval", "Write CSV evaluations for plotting");
    eval->add_option("subject", subject, "kernel | semigroup | resolvent | bounds")
        ->required()
        ->check(CLI::IsMember({"kernel", "semigroup", "resolvent", "bounds"}));
    eval->add_option("--system", system, "System JSON file (default: scalar heat operator)");
    eval->add_option("--dim", dim, "Dimension of the default system");
    eval->add_option("--out", out, "Output CSV path (default: stdout)");
    eval->add_option("--t", t, "Time for kernel and semigroup");
    eval->add_option("--t-min", t_min, "bounds: first time");
    eval->add_option("--t-max", t_max, "bounds: last time");
    eval->add_option("--t-count", t_count, "bounds: number of log-spaced times");
    eval->add_option("--eta", eta, "bounds: weight exponent");
    eval->add_option("--p", p, "bounds: integrability exponent");
    eval->add_option("--c-theta", c_theta, "bounds: weight constant");
    eval->add_option("--axis", axis, "kernel: slice axis (0-based)");
    eval->add_option("--psi-min", psi_min, "kernel: first coordinate");
    eval->add_option("--psi-max", psi_max, "kernel: last coordinate");
    eval->add_option("--count", count, "kernel: number of slice points");
    eval->add_option("--grid", grid_text, "semigroup/resolvent: grid \"min:max:count,...\"");
    eval->add_option("--input", input, "semigroup: input GridFunction CSV (needs --grid-header)");
    eval->add_option("--grid-header", grid_header, "semigroup: GridSpec JSON of the input CSV");
    eval->add_option("--width", width, "Width of the default Gaussian input");
    eval->add_option("--lambda", lambda_text, "resolvent: spectral parameter \"re\" or \"re:im\"");
    eval->add_option("--margin", margin, "resolvent: Re(lambda) - omega when --lambda is absent");
    eval->add_option("--constant", constant, "resolvent: constant input, one \"re:im\" per component")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(va);

        const OUSystem sys = system_or_default(system, dim);
        if (subject == "bounds") {
            emit(out, eval_bounds_csv(sys, logspace(t_min, t_max, t_count), eta, p, c_theta));
        } else if (subject == "kernel") {
            emit(out, kernel_slice_csv(sys, t, axis, linspace(psi_min, psi_max, count)));
        } else if (subject == "semigroup") {
            GridFunction v;
            if (!input.empty()) {
                if (grid_header.empty()) raise(ErrorCode::ConfigInvalid, "--input needs --grid-header");
                v = grid_function_from_csv(read_text_file(input), grid_spec_from_json(read_text_file(grid_header)));
            } else {
                const GridSpec g = grid_text.empty() ? cube_grid(sys.d, -6.0, 6.0, 61) : parse_grid_spec(grid_text);
                v = sample(g, sys.N, [&](const VectorXr& x) {
                    return VectorXc(VectorXc::Ones(sys.N) * std::exp(-x.squaredNorm() / (width * width)));
                });
            }
            if (v.spec.dim() != sys.d) raise(ErrorCode::ConfigInvalid, "grid dimension differs from the system dimension");
            emit(out, grid_function_to_csv(apply_semigroup(sys, v, t)));
        } else {
            const GridSpec g = grid_text.empty() ? cube_grid(sys.d, -4.0, 4.0, 9) : parse_grid_spec(grid_text);
            if (g.dim() != sys.d) raise(ErrorCode::ConfigInvalid, "grid dimension differs from the system dimension");
            Field f;
            if (!constant.empty()) {
                VectorXc c(sys.N);
                if (constant.size() != 1 && static_cast<int>(constant.size()) != sys.N)
                    raise(ErrorCode::ConfigInvalid, "--constant needs one value or one per component");
                for (int m = 0; m < sys.N; ++m)
                    c(m) = parse_complex(constant[constant.size() == 1 ? 0 : static_cast<std::size_t>(m)]);
                f = constant_field(c, sys.d);
            } else {
                f = gaussian_field(VectorXc::Ones(sys.N), VectorXr::Zero(sys.d), width);
            }
            cplx lambda;
            if (!lambda_text.empty()) lambda = parse_complex(lambda_text);
            else lambda = -spectral_quantities(sys, 0.0, 1.0).b0 + margin;
            std::vector<VectorXr> pts(g.nodes());
            for (std::size_t k = 0; k < pts.size(); ++k) pts[k] = g.node(k);
            const std::vector<VectorXc> vals = resolvent_at(sys, lambda, f, pts);
            GridFunction r;
            r.spec = g;
            r.N = sys.N;
            r.values.assign(g.nodes() * static_cast<std::size_t>(sys.N), 0.0);
            for (std::size_t k = 0; k < vals.size(); ++k) r.set(k, vals[k]);
            emit(out, grid_function_to_csv(r));
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
