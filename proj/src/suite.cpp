#include "oukit/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "oukit/errors.hpp"
#include "oukit/io.hpp"
#include "oukit/parallel.hpp"

namespace oukit {

namespace {

using nlohmann::json;

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::mt19937_64 suite_rng(const SuiteConfig& cfg, const std::string& name) {
    std::uint64_t h = cfg.seed;
    for (char c : name) h = h * 1099511628211ULL + static_cast<unsigned char>(c);
    return std::mt19937_64(h);
}

VectorXr random_point(std::mt19937_64& rng, int d, double r) {
    std::uniform_real_distribution<double> u(-r, r);
    VectorXr x(d);
    for (int a = 0; a < d; ++a) x(a) = u(rng);
    return x;
}

GridSpec default_grid(int d) {
    if (d <= 2) return cube_grid(d, -6.0, 6.0, 61);
    return cube_grid(d, -8.0, 8.0, 33);
}

GridSpec suite_grid(const SuiteConfig& cfg, int d) {
    if (!cfg.grid) return default_grid(d);
    if (cfg.grid->dim() != d) raise(ErrorCode::ConfigInvalid, "grid dimension differs from the system dimension");
    return *cfg.grid;
}

GridSpec resolvent_grid(const SuiteConfig& cfg, int d) {
    if (!cfg.resolvent_grid) return cube_grid(d, -6.0, 6.0, d <= 2 ? 41 : 21);
    if (cfg.resolvent_grid->dim() != d) raise(ErrorCode::ConfigInvalid, "resolvent grid dimension differs from the system dimension");
    return *cfg.resolvent_grid;
}

double input_width(const GridSpec& g) {
    double h = 0.0;
    for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.h(a));
    return std::max(1.0, 4.0 * h);
}

VectorXc input_amplitude(int N) {
    VectorXc c(N);
    for (int k = 0; k < N; ++k) c(k) = cplx(1.0 + k, 0.5 * k);
    return c;
}

GridFunction gaussian_input(const GridSpec& g, int N) {
    const double w = input_width(g);
    const VectorXc c = input_amplitude(N);
    return sample(g, N, [&](const VectorXr& x) { return VectorXc(c * std::exp(-x.squaredNorm() / (w * w))); });
}

std::string tstr(double t) { return "t=" + format_double(t); }

// Every check runs inside guard so that an exception becomes a failure record.
template <class F>
void guard(std::vector<VerificationRecord>& out, const std::string& property, const std::string& anchor, F&& body) {
    try {
        body();
    } catch (const std::exception& e) {
        out.push_back(failure_record(property, anchor, e.what()));
    }
}

std::vector<VerificationRecord> kernel_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    auto rng = suite_rng(cfg, "kernel");
    const int d = sys.d;
    guard(out, "kernel.derivative_fd", "kernel.first_derivative", [&] {
        double worst1 = 0.0, worst2 = 0.0, worst_rot = 0.0;
        for (double t : cfg.t_grid) {
            const KernelEvaluator ev(sys, t);
            const double sig = ev.sigma();
            const double h = 1e-4 * sig;
            for (int s = 0; s < 3; ++s) {
                const VectorXr x = random_point(rng, d, sig);
                const VectorXr xi = random_point(rng, d, sig);
                const VectorXr psi = ev.rotation() * x - xi;
                const double scale = spectral_norm(ev.K(VectorXr::Zero(d)));
                // K^i and K^{ji} are x-derivatives of H(x, xi, t).
                for (int i = 0; i < d; ++i) {
                    VectorXr e = VectorXr::Zero(d);
                    e(i) = h;
                    const MatrixXc fd = (ev.H(x + e, xi) - ev.H(x - e, xi)) / (2.0 * h);
                    worst1 = std::max(worst1, spectral_norm(fd - ev.Ki(psi, i)) * sig / scale);
                    for (int j = 0; j < d; ++j) {
                        VectorXr f = VectorXr::Zero(d);
                        f(j) = h;
                        const MatrixXc fd2 = (ev.Ki(ev.rotation() * (x + f) - xi, i) - ev.Ki(ev.rotation() * (x - f) - xi, i)) / (2.0 * h);
                        worst2 = std::max(worst2, spectral_norm(fd2 - ev.Kji(psi, i, j)) * sig * sig / scale);
                    }
                }
                const MatrixXr R = rotation(sys.S, 0.7);
                const MatrixXc H = ev.H(x, xi);
                worst_rot = std::max(worst_rot, spectral_norm(ev.H(R * x, R * xi) - H) / scale);
            }
        }
        out.push_back(upper_bound_record("kernel.derivative_fd", "kernel.first_derivative", worst1, 1e-6, 0.0, 0.0,
                                         "central differences, scaled by sigma/|K(0)|"));
        out.push_back(upper_bound_record("kernel.second_derivative_fd", "kernel.second_derivative", worst2, 1e-6, 0.0,
                                         0.0, "central differences, scaled by sigma^2/|K(0)|"));
        out.push_back(upper_bound_record("kernel.rotation_invariance", "kernel.rotation_invariance", worst_rot, 1e-12,
                                         0.0, 0.0, "H(Rx, R xi) against H(x, xi)"));
    });
    return out;
}

std::vector<VerificationRecord> riccati_suite(const OUSystem& sys, const SuiteConfig&) {
    std::vector<VerificationRecord> out;
    for (int m = 0; m < sys.N; ++m) {
        const std::string mode = "riccati.mode" + std::to_string(m);
        guard(out, mode, "riccati.closed_form", [&] {
            const OUSystem scalar = make_scalar_system(sys.lambdaA(m), sys.lambdaB(m), sys.S);
            double rn = 0.0, rp = 0.0;
            for (double t : logspace(0.1, 10.0, 12)) {
                const RiccatiResidual r = riccati_residual(scalar, t);
                rn = std::max(rn, r.res_N);
                rp = std::max(rp, r.res_phi);
            }
            out.push_back(upper_bound_record(mode + ".N", "riccati.matrix_equation", rn, 1e-7, 0.0, 0.0, "t in [0.1, 10]"));
            out.push_back(upper_bound_record(mode + ".phi", "riccati.scalar_equation", rp, 1e-7, 0.0, 0.0, "t in [0.1, 10]"));
        });
    }
    return out;
}

std::vector<VerificationRecord> moments_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    for (double t : cfg.t_grid) {
        guard(out, "moments." + tstr(t), "kernel.moments", [&] {
            const KernelMoments km = kernel_moments_all(sys, t);
            const MatrixXc eB = matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B);
            const MatrixXc eBA = eB * sys.A;
            double m1 = 0.0, m2 = 0.0;
            for (int i = 0; i < sys.d; ++i) {
                m1 = std::max(m1, spectral_norm(km.m1[static_cast<std::size_t>(i)]));
                for (int j = 0; j < sys.d; ++j) {
                    const MatrixXc ref = i == j ? MatrixXc(2.0 * t * eBA) : MatrixXc::Zero(sys.N, sys.N);
                    m2 = std::max(m2, spectral_norm(km.m2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] - ref));
                }
            }
            out.push_back(upper_bound_record("moments.order0", "kernel.moment_order0", spectral_norm(km.m0 - eB), 1e-6,
                                             0.0, km.est_error, tstr(t)));
            out.push_back(upper_bound_record("moments.order1", "kernel.moment_order1", m1, 1e-6, 0.0, km.est_error, tstr(t)));
            out.push_back(upper_bound_record("moments.order2", "kernel.moment_order2", m2, 1e-6, 0.0, km.est_error, tstr(t)));
        });
    }
    return out;
}

std::vector<VerificationRecord> chapman_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    auto rng = suite_rng(cfg, "chapman");
    for (std::size_t k = 0; k + 1 < cfg.t_grid.size() && k < 3; ++k) {
        const double t1 = cfg.t_grid[k], t2 = cfg.t_grid[k + 1];
        const VectorXr x = random_point(rng, sys.d, 1.5);
        const VectorXr xi = random_point(rng, sys.d, 1.5);
        const std::string detail = "t1=" + format_double(t1) + " t2=" + format_double(t2);
        guard(out, "chapman.residual", "kernel.chapman_kolmogorov", [&] {
            const ResidualResult r = chapman_kolmogorov_residual(sys, x, xi, t1, t2);
            out.push_back(upper_bound_record("chapman.residual", "kernel.chapman_kolmogorov", r.residual, 1e-5, 0.0,
                                             r.est_error, detail));
        });
    }
    return out;
}

std::vector<VerificationRecord> bounds_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    for (double etap : {0.0, 0.1, 0.2}) {
        const SpectralQuantities sq = spectral_quantities(sys, etap, 1.0);
        for (double t : cfg.t_grid) {
            const std::string detail = tstr(t) + " eta_p=" + format_double(etap);
            guard(out, "bounds.kernel_l1", "kernel.weighted_l1_bounds", [&] {
                const ScalarQuadrature l1 = weighted_kernel_l1(sys, 0, etap, t);
                out.push_back(upper_bound_record("bounds.kernel_l1.C1", "kernel.weighted_l1_le_C1", l1.value,
                                                 bound_C(1, sq, t), cfg.tol, l1.est_error, detail));
                const ScalarQuadrature l2 = weighted_kernel_l1(sys, 1, etap, t, 0);
                out.push_back(upper_bound_record("bounds.kernel_l1.C2", "kernel.weighted_l1_le_C2", l2.value,
                                                 bound_C(2, sq, t), cfg.tol, l2.est_error, detail));
                BoundExtras diag, off;
                off.delta_ij = false;
                const ScalarQuadrature l3 = weighted_kernel_l1(sys, 2, etap, t, 0, 0);
                out.push_back(upper_bound_record("bounds.kernel_l1.C3.ii", "kernel.weighted_l1_le_C3", l3.value,
                                                 bound_C(3, sq, t, diag), cfg.tol, l3.est_error, detail));
                if (sys.d > 1) {
                    const ScalarQuadrature l3o = weighted_kernel_l1(sys, 2, etap, t, 0, 1);
                    out.push_back(upper_bound_record("bounds.kernel_l1.C3.ij", "kernel.weighted_l1_le_C3", l3o.value,
                                                     bound_C(3, sq, t, off), cfg.tol, l3o.est_error, detail));
                }
            });
        }
    }
    guard(out, "bounds.boundedness", "semigroup.norm_le_C4", [&] {
        const GridFunction v = gaussian_input(suite_grid(cfg, sys.d), sys.N);
        for (const WeightFunction& w : cfg.weights)
            for (double p : cfg.p_values) {
                NormSpec n;
                n.weight = w;
                n.p = p;
                guard(out, "bounds.boundedness", "semigroup.norm_le_C4", [&] {
                    for (VerificationRecord& r : boundedness_check(sys, v, n, cfg.t_grid, cfg.tol)) out.push_back(r);
                });
            }
    });
    return out;
}

std::vector<VerificationRecord> semigroup_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    const GridSpec g = suite_grid(cfg, sys.d);
    const GridFunction v = gaussian_input(g, sys.N);
    const double t1 = cfg.t_grid.front();
    const double t2 = cfg.t_grid.size() > 1 ? cfg.t_grid[1] : cfg.t_grid.front();
    guard(out, "semigroup.identity", "semigroup.identity_at_zero", [&] {
        const GridFunction z = apply_semigroup(sys, v, 0.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < v.values.size(); ++k) worst = std::max(worst, std::abs(z.values[k] - v.values[k]));
        out.push_back(upper_bound_record("semigroup.identity", "semigroup.identity_at_zero", worst, 0.0, 0.0));
    });
    guard(out, "semigroup.composition", "semigroup.composition", [&] {
        out.push_back(upper_bound_record("semigroup.composition", "semigroup.composition",
                                         semigroup_composition_residual(sys, v, t1, t2), 1e-4, 0.0, 0.0,
                                         "s=" + format_double(t1) + " t=" + format_double(t2)));
    });
    guard(out, "semigroup.factorization", "semigroup.diffusion_after_rotation", [&] {
        out.push_back(upper_bound_record("semigroup.factorization", "semigroup.diffusion_after_rotation",
                                         factorization_residual(sys, v, t2), 1e-8, 0.0, 0.0, tstr(t2)));
    });
    guard(out, "semigroup.constant_input", "semigroup.constant_eigenrelation", [&] {
        const VectorXc c = input_amplitude(sys.N);
        double worst = 0.0;
        for (double t : cfg.t_grid) {
            const VectorXc ref = matrix_function(sys, [t](cplx z) { return std::exp(-z * t); }, Which::B) * c;
            const VectorXc val = semigroup_at(sys, constant_field(c, sys.d), t, VectorXr::Constant(sys.d, 0.3));
            worst = std::max(worst, (val - ref).norm() / ref.norm());
        }
        out.push_back(upper_bound_record("semigroup.constant_input", "semigroup.constant_eigenrelation", worst, 1e-10, 0.0));
    });
    return out;
}

std::vector<VerificationRecord> continuity_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    const GridFunction v = gaussian_input(suite_grid(cfg, sys.d), sys.N);
    const std::vector<double> ts{0.2, 0.1, 0.05, 0.01};
    for (const WeightFunction& w : cfg.weights) {
        const std::string tag = to_string(w.kind);
        guard(out, "continuity." + tag, "semigroup.strong_continuity", [&] {
            NormSpec n;
            n.weight = w;
            n.p = 2.0;
            const std::vector<double> r = strong_continuity_probe(sys, v, n, ts);
            double ratio = 0.0;
            for (std::size_t k = 1; k < r.size(); ++k) ratio = std::max(ratio, r[k] / r[k - 1]);
            VerificationRecord mono = upper_bound_record("continuity.decrease", "semigroup.strong_continuity", ratio, 1.0,
                                                         0.0, 0.0, tag + " max successive ratio, t in {0.2,0.1,0.05,0.01}");
            mono.pass = ratio < 1.0;
            out.push_back(mono);
            out.push_back(upper_bound_record("continuity.final_fraction", "semigroup.strong_continuity",
                                             r.back() / grid_norm(v, n), 0.05, 0.0, 0.0, tag + " t=0.01"));
        });
    }
    return out;
}

std::vector<VerificationRecord> resolvent_suite(const OUSystem& sys, const SuiteConfig& cfg) {
    std::vector<VerificationRecord> out;
    const GridSpec g = resolvent_grid(cfg, sys.d);
    const GridFunction gv = gaussian_input(g, sys.N);
    const double w = input_width(g);
    const Field gf = gaussian_field(input_amplitude(sys.N), VectorXr::Zero(sys.d), w);
    const WeightFunction theta = make_weight(WeightKind::exp_smooth, cfg.resolvent_mu);
    ResolventOptions ro;
    for (bool sup : {false, true}) {
        const double p = 2.0;
        double omega = 0.0;
        if (sup) {
            omega = -spectral_quantities(sys, 0.0, 1.0).b0;
        } else {
            const SpectralQuantities sq = spectral_quantities(sys, theta.eta, p);
            omega = -sq.b0 + (1.0 + ro.epsilon) * sq.nu / p;
        }
        std::vector<cplx> lambdas = cfg.lambdas;
        if (lambdas.empty())
            for (double off : cfg.lambda_offsets) lambdas.emplace_back(omega + off, 0.0);
        for (cplx lambda : lambdas) {
            const std::string tag = std::string(sup ? "sup" : "p=2") + " lambda=(" + format_double(lambda.real()) + "," +
                                    format_double(lambda.imag()) + ")";
            guard(out, "resolvent.estimate", "resolvent.C7_bound", [&] {
                ResolventQuery q;
                q.sys = &sys;
                q.lambda = lambda;
                q.g = gv;
                q.g_field = gf;
                q.theta1 = theta;
                q.theta2 = theta;
                q.p = p;
                q.sup_mode = sup;
                q.tolerance = cfg.tol;
                for (VerificationRecord& r : resolvent_estimate_check(q)) out.push_back(r);
            });
            if (sup) continue;
            guard(out, "resolvent.constant_closed_form", "resolvent.constant_input", [&] {
                const VectorXc c = input_amplitude(sys.N);
                const MatrixXc M = matrix_function(sys, [lambda](cplx z) { return 1.0 / (lambda + z); }, Which::B);
                const VectorXc ref = M * c;
                const VectorXc val = resolvent_at(sys, lambda, constant_field(c, sys.d), {VectorXr::Constant(sys.d, 0.4)})[0];
                out.push_back(upper_bound_record("resolvent.constant_closed_form", "resolvent.constant_input",
                                                 (val - ref).norm() / ref.norm(), 1e-8, 0.0, 0.0, tag));
            });
        }
    }
    return out;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"bounds",   "chapman",   "continuity", "kernel",
                                                "moments",  "resolvent", "riccati",    "semigroup"};
    return names;
}

std::vector<double> logspace(double a, double b, int count) {
    if (!(a > 0.0 && b > 0.0) || count < 1) raise(ErrorCode::InvalidInput, "logspace needs positive ends and a count");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double f = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
        out[static_cast<std::size_t>(k)] = a * std::pow(b / a, f);
    }
    out.back() = count == 1 ? a : b;
    return out;
}

OUSystem default_heat_system(int d) { return make_scalar_system(1.0, 0.0, MatrixXr::Zero(d, d)); }

SuiteConfig suite_config_from_json(const std::string& text, const SuiteConfig& base, const std::string& config_path) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) raise(ErrorCode::ConfigInvalid, "configuration must be a JSON object");
    SuiteConfig cfg = base;
    try {
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            const std::string& key = it.key();
            const json& v = it.value();
            if (key == "system") {
                std::filesystem::path p(v.get<std::string>());
                if (p.is_relative() && !config_path.empty()) p = std::filesystem::path(config_path).parent_path() / p;
                cfg.system_path = p.string();
            } else if (key == "suites") {
                cfg.suites = v.get<std::vector<std::string>>();
            } else if (key == "grid") {
                cfg.grid = v.is_string() ? parse_grid_spec(v.get<std::string>()) : grid_spec_from_json(v.dump());
            } else if (key == "resolvent_grid") {
                cfg.resolvent_grid = v.is_string() ? parse_grid_spec(v.get<std::string>()) : grid_spec_from_json(v.dump());
            } else if (key == "t_grid") {
                cfg.t_grid = v.get<std::vector<double>>();
            } else if (key == "lambdas") {
                cfg.lambdas.clear();
                for (const json& e : v) {
                    if (e.is_number()) cfg.lambdas.emplace_back(e.get<double>(), 0.0);
                    else cfg.lambdas.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
                }
            } else if (key == "lambda_offsets") {
                cfg.lambda_offsets = v.get<std::vector<double>>();
            } else if (key == "weights") {
                cfg.weights.clear();
                for (const json& e : v) {
                    if (e.is_string()) cfg.weights.push_back(make_weight(weight_kind_from_string(e.get<std::string>())));
                    else
                        cfg.weights.push_back(make_weight(weight_kind_from_string(e.at("kind").get<std::string>()),
                                                          e.value("mu", 0.0)));
                }
            } else if (key == "p_values") {
                cfg.p_values = v.get<std::vector<double>>();
            } else if (key == "resolvent_mu") {
                cfg.resolvent_mu = v.get<double>();
            } else if (key == "tol") {
                cfg.tol = v.get<double>();
            } else if (key == "out") {
                cfg.out_dir = v.get<std::string>();
            } else if (key == "seed") {
                cfg.seed = v.get<std::uint64_t>();
            } else {
                raise(ErrorCode::ConfigInvalid, "unknown configuration key \"" + key + "\"");
            }
        }
    } catch (const json::exception& e) {
        raise(ErrorCode::ConfigInvalid, std::string("configuration: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        raise(ErrorCode::ConfigInvalid, e.what());
    }
    return cfg;
}

void validate_config(const SuiteConfig& cfg) {
    for (const std::string& s : cfg.suites)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            raise(ErrorCode::ConfigInvalid, "unknown suite \"" + s + "\"");
    if (!(cfg.tol > 0.0)) raise(ErrorCode::ConfigInvalid, "tolerance must be positive");
    if (cfg.t_grid.empty()) raise(ErrorCode::ConfigInvalid, "t_grid is empty");
    for (double t : cfg.t_grid)
        if (!(t > 0.0) || !std::isfinite(t)) raise(ErrorCode::ConfigInvalid, "t_grid entries must be positive");
    for (double p : cfg.p_values)
        if (!(p >= 1.0)) raise(ErrorCode::ConfigInvalid, "p_values must be >= 1");
    for (double o : cfg.lambda_offsets)
        if (!(o > 0.0)) raise(ErrorCode::ConfigInvalid, "lambda_offsets must be positive");
    if (cfg.weights.empty()) raise(ErrorCode::ConfigInvalid, "weights list is empty");
    if (!cfg.system_path.empty() && !std::filesystem::is_regular_file(cfg.system_path))
        raise(ErrorCode::ConfigInvalid, "system file " + cfg.system_path + " does not exist");
    for (const auto& g : {cfg.grid, cfg.resolvent_grid}) {
        if (!g) continue;
        try {
            g->validate();
        } catch (const Error& e) {
            raise(ErrorCode::ConfigInvalid, e.what());
        }
    }
}

std::vector<VerificationRecord> run_suite(const std::string& name, const OUSystem& sys, const SuiteConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<VerificationRecord> out;
    guard(out, name, "suite", [&] {
        if (name == "kernel") out = kernel_suite(sys, cfg);
        else if (name == "riccati") out = riccati_suite(sys, cfg);
        else if (name == "moments") out = moments_suite(sys, cfg);
        else if (name == "chapman") out = chapman_suite(sys, cfg);
        else if (name == "bounds") out = bounds_suite(sys, cfg);
        else if (name == "semigroup") out = semigroup_suite(sys, cfg);
        else if (name == "continuity") out = continuity_suite(sys, cfg);
        else if (name == "resolvent") out = resolvent_suite(sys, cfg);
        else raise(ErrorCode::ConfigInvalid, "unknown suite \"" + name + "\"");
    });
    const double ms = elapsed_ms(start);
    for (VerificationRecord& r : out) {
        r.suite = name;
        if (r.runtime_ms == 0.0) r.runtime_ms = ms;
    }
    return out;
}

std::vector<VerificationRecord> run_verify(const SuiteConfig& cfg) {
    validate_config(cfg);
    OUSystem sys;
    try {
        sys = cfg.system_path.empty() ? default_heat_system(cfg.grid ? cfg.grid->dim() : 2) : load_system(cfg.system_path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigInvalid) throw;
        VerificationRecord r = failure_record(to_string(e.code()), "system.validation", e.what());
        r.suite = "system";
        return {r};
    }
    if (cfg.grid && cfg.grid->dim() != sys.d)
        raise(ErrorCode::ConfigInvalid, "grid dimension differs from the system dimension");

    std::vector<std::string> names = cfg.suites.empty() ? suite_names() : cfg.suites;
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    std::vector<std::vector<VerificationRecord>> results(names.size());
    const std::size_t workers = std::min<std::size_t>(names.size(), static_cast<std::size_t>(std::max(1, thread_count())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < names.size(); k = next++) results[k] = run_suite(names[k], sys, cfg);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    std::vector<VerificationRecord> out;
    for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
    return out;
}

bool all_pass(const std::vector<VerificationRecord>& records) {
    if (records.empty()) return false;
    return std::all_of(records.begin(), records.end(), [](const VerificationRecord& r) { return r.pass; });
}

std::string eval_bounds_csv(const OUSystem& sys, const std::vector<double>& t_values, double eta, double p,
                            double C_theta) {
    const SpectralQuantities sq = spectral_quantities(sys, eta, p);
    BoundExtras ex;
    ex.p = p;
    ex.C_theta = C_theta;
    std::ostringstream os;
    os << "t,C1,C2,C3,C4,C5,C6\r\n";
    for (double t : t_values) {
        os << format_double(t);
        for (int level = 1; level <= 6; ++level) os << ',' << format_double(bound_C(level, sq, t, ex));
        os << "\r\n";
    }
    return os.str();
}

}  // namespace oukit
