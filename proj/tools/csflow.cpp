// Command-line front end: single runs with CSV traces, convergence studies,
// and the validation suite.
//
// Exit codes: 0 success, 1 configuration error, 2 segment-length abort,
// 3 validation failure.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csf/analysis.hpp"
#include "csf/problems.hpp"
#include "csf/scheme.hpp"
#include "csf/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTolAbort = 2;
constexpr int kExitValidation = 3;

std::string fmt(double v) { return csf::fmt_double(v); }

csf::ProblemSpec select_problem(const std::string& name, double radius) {
    if (name == "radial") return csf::radial_problem();
    if (name == "oscillating") return csf::oscillating_problem();
    if (name == "pure-csf") return csf::pure_csf_problem(radius);
    throw csf::ConfigError("unknown problem '" + name + "' (expected radial, oscillating, pure-csf)");
}

double parse_dt(const std::string& text, int nodes) {
    if (text == "h2") {
        const double h = 1.0 / static_cast<double>(nodes);
        return h * h;
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == nullptr || *end != '\0' || !(v > 0.0))
        throw csf::ConfigError("--dt expects a positive number or 'h2'");
    return v;
}

struct RunOptions {
    std::string problem = "radial";
    int nodes = 0;
    std::string dt_text;
    double t_max = -1.0; // problem default when negative
    double tol = -1.0;   // default_tol(n) when negative
    double radius = 1.0;
    std::string out_path;
    std::string trace_path;
};

int cmd_run(const RunOptions& opt) {
    const csf::ProblemSpec problem = select_problem(opt.problem, opt.radius);
    csf::SolverConfig config;
    config.n = opt.nodes;
    config.dt = parse_dt(opt.dt_text, opt.nodes);
    config.t_max = opt.t_max > 0.0 ? opt.t_max : problem.t_max;
    config.tol = opt.tol > 0.0 ? opt.tol : csf::default_tol(opt.nodes);
    config.validate();

    std::ofstream trace;
    const bool radial = problem.name == "radial";
    if (!opt.trace_path.empty()) {
        trace.open(opt.trace_path);
        if (!trace) throw csf::ConfigError("cannot open trace file '" + opt.trace_path + "'");
        trace << (radial ? "t,R,B,length,mass,min_q\n" : "t,length,mass,min_q\n");
    }

    const csf::StepObserver observer = [&](const csf::SimState& s) {
        if (!trace.is_open()) return;
        trace << fmt(s.t);
        if (radial) {
            const csf::RadialState obs = csf::radial_observables(s.geom, s.field);
            trace << ',' << fmt(obs.R) << ',' << fmt(obs.B);
        }
        trace << ',' << fmt(csf::total_length(s.geom)) << ',' << fmt(csf::discrete_mass(s.geom, s.field))
              << ',' << fmt(s.min_q()) << '\n';
    };

    const csf::RunResult result =
        trace.is_open() ? csf::run(problem, config, observer) : csf::run(problem, config);

    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path);
        if (!out) throw csf::ConfigError("cannot open output file '" + opt.out_path + "'");
        out << "x,u1,u2,c\n";
        const auto& s = result.state;
        for (std::size_t j = 0; j < s.curve.positions.size(); ++j) {
            out << fmt(s.mesh->node(static_cast<std::ptrdiff_t>(j))) << ',' << fmt(s.curve.positions[j].x)
                << ',' << fmt(s.curve.positions[j].y) << ',' << fmt(s.field.values[j]) << '\n';
        }
    }

    const csf::RadialState obs = csf::radial_observables(result.state.geom, result.state.field);
    std::cout << "problem=" << problem.name << " steps=" << result.completed_steps
              << " t=" << fmt(result.state.t) << " length=" << fmt(csf::total_length(result.state.geom))
              << " mass=" << fmt(csf::discrete_mass(result.state.geom, result.state.field));
    if (radial) std::cout << " R=" << fmt(obs.R) << " B=" << fmt(obs.B);
    std::cout << " min_q=" << fmt(result.state.min_q()) << '\n';

    if (result.status == csf::RunStatus::tol_abort) {
        std::cout << "aborted: minimal segment length fell below tol=" << fmt(config.tol) << '\n';
        return kExitTolAbort;
    }
    return kExitOk;
}

struct ConvergenceOptions {
    std::string mode;
    std::string problem = "oscillating";
    std::vector<int> nodes;
    std::string m_range;
    int quad = 5;
    std::string rule = "trapezoid";
    std::string out_path;
};

std::pair<long, long> parse_m_range(const std::string& text) {
    const auto sep = text.find("..");
    if (sep == std::string::npos) throw csf::ConfigError("--m-range expects the form a..b");
    try {
        const long a = std::stol(text.substr(0, sep));
        const long b = std::stol(text.substr(sep + 2));
        if (b < a) throw csf::ConfigError("--m-range must be nondecreasing");
        return {a, b};
    } catch (const std::invalid_argument&) {
        throw csf::ConfigError("--m-range expects integers of the form a..b");
    }
}

int cmd_convergence(const ConvergenceOptions& opt) {
    const csf::ProblemSpec problem = select_problem(opt.problem, 1.0);
    csf::ErrorQuadrature rule;
    if (opt.rule == "trapezoid")
        rule = csf::ErrorQuadrature::trapezoid;
    else if (opt.rule == "gauss")
        rule = csf::ErrorQuadrature::gauss;
    else
        throw csf::ConfigError("--rule expects 'trapezoid' or 'gauss'");

    csf::ConvergenceTable table;
    if (opt.mode == "space") {
        if (opt.nodes.empty()) throw csf::ConfigError("space mode needs --nodes n1,n2,...");
        table = csf::convergence_study_space(problem, opt.nodes, opt.quad, rule);
    } else if (opt.mode == "time") {
        if (opt.nodes.size() != 1)
            throw csf::ConfigError("time mode needs a single --nodes value");
        if (opt.m_range.empty()) throw csf::ConfigError("time mode needs --m-range a..b");
        const auto [m_lo, m_hi] = parse_m_range(opt.m_range);
        std::vector<double> deltas;
        for (long m = m_lo; m <= m_hi; ++m) deltas.push_back(0.02 * std::pow(2.0, -static_cast<double>(m)));
        table = csf::convergence_study_time(problem, opt.nodes[0], deltas, opt.quad, m_lo, rule);
    } else {
        throw csf::ConfigError("--mode expects 'space' or 'time'");
    }

    if (opt.out_path.empty()) {
        csf::write_csv(table, std::cout);
    } else {
        std::ofstream out(opt.out_path);
        if (!out) throw csf::ConfigError("cannot open output file '" + opt.out_path + "'");
        csf::write_csv(table, out);
    }
    return kExitOk;
}

// ---- validation suite -------------------------------------------------------

struct CheckResult {
    bool ok = false;
    std::string detail;
};

CheckResult check_residual_oracle() {
    const csf::ResidualReport r = csf::pde_residual_check(csf::oscillating_problem(), 200, 12345);
    std::ostringstream os;
    os << "geo=" << r.max_rel_residual_geo << " field=" << r.max_rel_residual_field << " @200 points";
    return {r.max_rel_residual_geo <= 1e-6 && r.max_rel_residual_field <= 1e-6, os.str()};
}

CheckResult check_negative_controls() {
    std::size_t detected = 0;
    const auto mutants = csf::oscillating_source_mutants();
    std::ostringstream os;
    for (const csf::ProblemSpec& m : mutants) {
        const csf::ResidualReport r = csf::pde_residual_check(m, 200, 12345);
        const double worst = std::max(r.max_rel_residual_geo, r.max_rel_residual_field);
        if (worst > 1e-2) ++detected;
        os << m.name << "=" << worst << ' ';
    }
    return {detected == mutants.size(), os.str()};
}

CheckResult check_weak_form() {
    std::mt19937 rng(29);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const csf::PeriodicMesh mesh = csf::PeriodicMesh::uniform(21);
        std::vector<csf::Vec2> pts(21);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (std::size_t j = 0; j < 21; ++j) {
            const double angle = 2.0 * std::numbers::pi *
                                 (mesh.node(static_cast<std::ptrdiff_t>(j)) + 0.25 * u(rng) / 21.0);
            const double radius = 1.0 + 0.25 * u(rng);
            pts[j] = {radius * std::cos(angle), radius * std::sin(angle)};
        }
        const csf::DiscreteCurve poly{&mesh, pts};
        csf::SurfaceField c{&mesh, std::vector<double>(21)};
        for (auto& v : c.values) v = u(rng);
        const csf::CrosscheckReport rep =
            csf::weak_form_crosscheck(poly, c, [](double x) { return 2.0 * x; });
        worst = std::max(worst, rep.max_abs_discrepancy / rep.scale);
    }
    std::ostringstream os;
    os << "max discrepancy/scale=" << worst << " over 100 random polygons";
    return {worst <= 1e-12, os.str()};
}

CheckResult check_identities() {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst_rate = 0.0, worst_nubar = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const csf::PeriodicMesh mesh = csf::PeriodicMesh::uniform(19);
        std::vector<csf::Vec2> pts(19);
        for (std::size_t j = 0; j < 19; ++j) {
            const double angle = 2.0 * std::numbers::pi *
                                 (mesh.node(static_cast<std::ptrdiff_t>(j)) + 0.25 * u(rng) / 19.0);
            pts[j] = {(1.0 + 0.25 * u(rng)) * std::cos(angle), (1.0 + 0.25 * u(rng)) * std::sin(angle)};
        }
        const csf::DiscreteCurve poly{&mesh, pts};
        const csf::PolygonGeometry g = csf::compute_geometry(poly);
        csf::SurfaceField c{&mesh, std::vector<double>(19)};
        for (auto& v : c.values) v = u(rng);
        const auto r = csf::forcing_vectors(g, c, [](double x) { return 2.0 * x; });
        const auto v = csf::nodal_velocities(g, r);
        double vmax = 0.0;
        for (const csf::Vec2& vi : v) vmax = std::max(vmax, csf::norm(vi));
        for (double res : csf::length_rate_residual(g, r))
            worst_rate = std::max(worst_rate, std::abs(res) / (1.0 + vmax));
        for (const csf::Vec2& nb : g.nubar) worst_nubar = std::max(worst_nubar, csf::norm(nb));
    }
    std::ostringstream os;
    os << "length-rate residual=" << worst_rate << " max|nubar|=" << worst_nubar;
    return {worst_rate <= 1e-12 && worst_nubar <= 1.0 + 4e-16, os.str()};
}

CheckResult check_system_audit() {
    const csf::ProblemSpec p = csf::radial_problem();
    const csf::SolverConfig cfg{50, 1e-4, 0.02, csf::default_tol(50)};
    bool ok = true;
    (void)csf::run(p, cfg, csf::StepObserver([&](const csf::SimState& s) {
                       if (s.step % 50 == 0) ok = ok && csf::audit_step_systems(s, cfg).all_ok();
                   }));
    return {ok, "symmetry, positive quadratic forms, diagonal dominance along a radial run"};
}

CheckResult check_mass_conservation() {
    // unsourced: conservation per step
    const csf::ProblemSpec p = csf::pure_csf_problem(1.0);
    const csf::SolverConfig cfg{64, 1e-4, 0.1, csf::default_tol(64)};
    double prev = -1.0, worst = 0.0;
    (void)csf::run(p, cfg, csf::StepObserver([&](const csf::SimState& s) {
                       const double mass = csf::discrete_mass(s.geom, s.field);
                       if (prev > 0.0) worst = std::max(worst, std::abs(mass - prev) / prev);
                       prev = mass;
                   }));

    // sourced: per-step increment identity
    const csf::ProblemSpec osc = csf::oscillating_problem();
    const int n = 32;
    const csf::SolverConfig cfg2{n, 1.0 / (n * n), 0.25, csf::default_tol(n)};
    const csf::PeriodicMesh mesh = csf::PeriodicMesh::uniform(n);
    double prev_mass = 0.0, worst_src = 0.0;
    std::vector<double> prev_q;
    (void)csf::run(osc, cfg2, csf::StepObserver([&](const csf::SimState& s) {
                       const double mass = csf::discrete_mass(s.geom, s.field);
                       csf::SurfaceField abs_field = s.field;
                       for (auto& v : abs_field.values) v = std::abs(v);
                       const double scale = csf::discrete_mass(s.geom, abs_field);
                       if (s.step > 0) {
                           double incr = 0.0;
                           for (std::size_t j = 0; j < prev_q.size(); ++j) {
                               const std::size_t jp = (j + prev_q.size() - 1) % prev_q.size();
                               incr += prev_q[j] * 0.5 *
                                       (osc.source_c(mesh.node(static_cast<std::ptrdiff_t>(jp)), s.t) +
                                        osc.source_c(mesh.node(static_cast<std::ptrdiff_t>(j)), s.t));
                           }
                           incr *= cfg2.dt;
                           worst_src = std::max(worst_src, std::abs(mass - prev_mass - incr) /
                                                               (scale + std::abs(incr)));
                       }
                       prev_mass = mass;
                       prev_q = s.geom.q;
                   }));
    std::ostringstream os;
    os << "unsourced drift/step=" << worst << " sourced increment defect=" << worst_src;
    return {worst <= 1e-12 && worst_src <= 1e-12, os.str()};
}

CheckResult check_solver_residual() {
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (std::size_t n = 3; n <= 64; ++n) {
        csf::CyclicTridiagonal a;
        a.off.resize(n);
        a.diag.resize(n);
        for (auto& o : a.off) o = u(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = (i + n - 1) % n;
            a.diag[i] = std::abs(a.off[i]) + std::abs(a.off[ip]) + 0.5 + std::abs(u(rng));
        }
        std::vector<double> rhs(n);
        for (auto& r : rhs) r = u(rng);
        const auto x = csf::solve(a, rhs);
        const auto ax = csf::matvec(a, x);
        double xmax = 0.0, rmax = 0.0, dmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            xmax = std::max(xmax, std::abs(x[i]));
            rmax = std::max(rmax, std::abs(rhs[i]));
            dmax = std::max(dmax, std::abs(ax[i] - rhs[i]));
        }
        worst = std::max(worst, dmax / (csf::inf_norm(a) * xmax + rmax));
    }
    std::ostringstream os;
    os << "max relative residual=" << worst << " for n=3..64";
    return {worst <= 1e-12, os.str()};
}

int cmd_validate(const std::string& only) {
    using Check = CheckResult (*)();
    const std::vector<std::pair<std::string, Check>> checks = {
        {"residual-oracle", &check_residual_oracle},
        {"negative-controls", &check_negative_controls},
        {"weak-form", &check_weak_form},
        {"identities", &check_identities},
        {"system-audit", &check_system_audit},
        {"mass-conservation", &check_mass_conservation},
        {"solver-residual", &check_solver_residual},
    };
    if (!only.empty()) {
        bool known = false;
        for (const auto& [name, fn] : checks)
            if (name == only) known = true;
        if (!known) throw csf::ConfigError("unknown check '" + only + "'");
    }
    bool all_ok = true;
    for (const auto& [name, fn] : checks) {
        if (!only.empty() && name != only) continue;
        const CheckResult r = fn();
        std::cout << (r.ok ? "PASS" : "FAIL") << ' ' << name << " (" << r.detail << ")\n";
        all_ok = all_ok && r.ok;
    }
    return all_ok ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-implicit finite element solver for forced curve shortening flow\n"
                 "coupled to a diffusion field on the evolving curve."};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "read options from an INI-style key=value file");

    RunOptions run_opt;
    CLI::App* run_cmd_app = app.add_subcommand("run", "run a single simulation");
    run_cmd_app->configurable();
    run_cmd_app->add_option("--problem", run_opt.problem, "radial | oscillating | pure-csf")
        ->required();
    run_cmd_app->add_option("--nodes", run_opt.nodes, "number of curve nodes N")->required();
    run_cmd_app->add_option("--dt", run_opt.dt_text, "time step, a number or 'h2' for (1/N)^2")
        ->required();
    run_cmd_app->add_option("--tmax", run_opt.t_max, "final time (default: problem specific)");
    run_cmd_app->add_option("--tol", run_opt.tol, "abort threshold on segment lengths (default 1e-3/N)");
    run_cmd_app->add_option("--radius", run_opt.radius, "initial radius for pure-csf (default 1)");
    run_cmd_app->add_option("--out", run_opt.out_path, "write final state CSV (x,u1,u2,c)");
    run_cmd_app->add_option("--trace", run_opt.trace_path, "write per-step trace CSV");

    ConvergenceOptions conv_opt;
    CLI::App* conv_cmd_app = app.add_subcommand("convergence", "run a convergence study");
    conv_cmd_app->configurable();
    conv_cmd_app->add_option("--mode", conv_opt.mode, "space | time")->required();
    conv_cmd_app->add_option("--problem", conv_opt.problem, "problem with an exact solution");
    conv_cmd_app->add_option("--nodes", conv_opt.nodes, "node counts (comma separated)")
        ->delimiter(',')
        ->required();
    conv_cmd_app->add_option("--m-range", conv_opt.m_range, "time mode: dt = 0.02*2^-m for m=a..b");
    conv_cmd_app->add_option("--quad", conv_opt.quad, "quadrature points per segment (default 5)");
    conv_cmd_app->add_option("--rule", conv_opt.rule, "error quadrature: trapezoid | gauss");
    conv_cmd_app->add_option("--out", conv_opt.out_path, "CSV output path (default stdout)");

    std::string only_check;
    CLI::App* val_cmd_app = app.add_subcommand("validate", "run the validation suite");
    val_cmd_app->configurable();
    val_cmd_app->add_option("--only", only_check, "run a single named check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run_cmd_app->parsed()) return cmd_run(run_opt);
        if (conv_cmd_app->parsed()) return cmd_convergence(conv_opt);
        return cmd_validate(only_check);
    } catch (const csf::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const csf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
