#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "csf/errors.hpp"
#include "csf/geometry.hpp"
#include "csf/problems.hpp"
#include "csf/scheme.hpp"

namespace csf {

// Residuals of the strong-form equations evaluated on the exact solution with
// the manufactured sources subtracted. Both residuals vanish (to the accuracy
// of the finite differences) iff the source formulas match the exact fields.
struct ResidualReport {
    double max_rel_residual_geo = 0.0;
    double max_rel_residual_field = 0.0;
    int samples = 0;
    std::array<double, 2> fd_steps{};
};

namespace detail {

// Richardson-extrapolated central differences (two step sizes, fourth order).
// Only the pointwise values of the callable are used, which keeps this path
// independent of the closed-form derivatives carried by ExactSolution.
template <class F>
auto fd_d1(F&& f, double a, double e) {
    const auto coarse = (f(a + e) - f(a - e)) / (2.0 * e);
    const auto fine = (f(a + 0.5 * e) - f(a - 0.5 * e)) / e;
    return (4.0 * fine - coarse) / 3.0;
}

template <class F>
auto fd_d2(F&& f, double a, double e) {
    const auto at = f(a);
    const auto coarse = (f(a + e) - 2.0 * at + f(a - e)) / (e * e);
    const auto fine = (f(a + 0.5 * e) - 2.0 * at + f(a - 0.5 * e)) / (0.25 * e * e);
    return (4.0 * fine - coarse) / 3.0;
}

template <class F>
auto fd_mixed(F&& f, double a, double b, double e) {
    const auto cross = [&](double ea, double eb) {
        return (f(a + ea, b + eb) - f(a - ea, b + eb) - f(a + ea, b - eb) + f(a - ea, b - eb)) /
               (4.0 * ea * eb);
    };
    return (4.0 * cross(0.5 * e, 0.5 * e) - cross(e, e)) / 3.0;
}

} // namespace detail

// Check the manufactured sources of a problem against the strong forms
//   u_t - (1/|u_x|) (u_x/|u_x|)_x - f(c) u_x^perp / |u_x| = s_u
//   c_t + c |u_x|_t / |u_x| - (1/|u_x|) (c_x/|u_x|)_x     = s_c
// at pseudo-random sample points, with every derivative taken by finite
// differences of exact.u and exact.c only. Residuals are reported relative to
// the largest term magnitude at each point.
inline ResidualReport pde_residual_check(const ProblemSpec& problem, int samples, unsigned seed,
                                         double fd_step = 1e-3) {
    if (!problem.exact)
        throw MissingExactSolutionError("pde_residual_check: problem has no exact solution");
    const ExactSolution& ex = *problem.exact;

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, problem.t_max);

    ResidualReport report;
    report.samples = samples;
    report.fd_steps = {fd_step, 0.5 * fd_step};
    const double tiny = 1e-300;

    for (int i = 0; i < samples; ++i) {
        const double x = ux(rng);
        const double t = ut(rng);

        const auto u_of_x = [&](double xx) { return ex.u(xx, t); };
        const auto u_of_t = [&](double tt) { return ex.u(x, tt); };
        const auto c_of_x = [&](double xx) { return ex.c(xx, t); };
        const auto c_of_t = [&](double tt) { return ex.c(x, tt); };

        const Vec2 u_t = detail::fd_d1(u_of_t, t, fd_step);
        const Vec2 u_x = detail::fd_d1(u_of_x, x, fd_step);
        const Vec2 u_xx = detail::fd_d2(u_of_x, x, fd_step);
        const double len = norm(u_x);

        // (u_x/|u_x|)_x = u_xx/|u_x| - u_x (u_x . u_xx)/|u_x|^3
        const Vec2 tau_x = u_xx / len - u_x * (dot(u_x, u_xx) / (len * len * len));
        const Vec2 curvature_term = tau_x / len;
        const Vec2 forcing_term = problem.eval_forcing(ex.c(x, t)) * perp(u_x) / len;
        const Vec2 s_u = problem.source_u(x, t);
        const Vec2 res_geo = u_t - curvature_term - forcing_term - s_u;
        const double scale_geo =
            std::max({norm(u_t), norm(curvature_term), norm(forcing_term), norm(s_u), tiny});
        report.max_rel_residual_geo = std::max(report.max_rel_residual_geo, norm(res_geo) / scale_geo);

        const double c_t = detail::fd_d1(c_of_t, t, fd_step);
        const double c_x = detail::fd_d1(c_of_x, x, fd_step);
        const double c_xx = detail::fd_d2(c_of_x, x, fd_step);
        const Vec2 u_xt = detail::fd_mixed([&](double xx, double tt) { return ex.u(xx, tt); }, x, t, fd_step);
        const double len_t = dot(u_x, u_xt) / len;
        const double transport = ex.c(x, t) * len_t / len;
        const double diffusion = (c_xx / len - c_x * dot(u_x, u_xx) / (len * len * len)) / len;
        const double s_c = problem.source_c(x, t);
        const double res_field = c_t + transport - diffusion - s_c;
        const double scale_field = std::max(
            {std::abs(c_t), std::abs(transport), std::abs(diffusion), std::abs(s_c), tiny});
        report.max_rel_residual_field =
            std::max(report.max_rel_residual_field, std::abs(res_field) / scale_field);
    }
    return report;
}

// Named copies of the oscillating problem with one deliberate transcription
// error each. The residual check must flag every one of them; together they
// guard the long source formulas against silent typos.
inline std::vector<ProblemSpec> oscillating_source_mutants() {
    constexpr double pi = std::numbers::pi;
    std::vector<ProblemSpec> mutants;

    {
        ProblemSpec p = oscillating_problem();
        p.name = "mutant-sc-sign";
        // sign flip on the sin(6 pi x) part of the first s_c term
        p.source_c = [](double x, double t) {
            return detail::oscillating_source_c(x, t) + 2.0 * std::sin(6.0 * pi * x);
        };
        mutants.push_back(std::move(p));
    }
    {
        ProblemSpec p = oscillating_problem();
        p.name = "mutant-su1-factor";
        // coefficient -2*sqrt(2) -> -2 in the coupling term of s_u1
        p.source_u = [](double x, double t) {
            Vec2 s = detail::oscillating_source_u(x, t);
            const double st = std::sin(2.0 * pi * t);
            const double base = std::cos(2.0 * pi * x) * (-2.0 + st) * detail::oscillating_c(x, t) /
                                std::sqrt(detail::oscillating_denom(x, t));
            s.x += (2.0 * std::numbers::sqrt2 - 2.0) * base;
            return s;
        };
        mutants.push_back(std::move(p));
    }
    {
        ProblemSpec p = oscillating_problem();
        p.name = "mutant-su2-swap";
        // cos(2 pi t) -> sin(2 pi t) in the leading term of s_u2
        p.source_u = [](double x, double t) {
            Vec2 s = detail::oscillating_source_u(x, t);
            s.y += pi * std::cos(2.0 * pi * t) * std::sin(2.0 * pi * x) -
                   pi * std::sin(2.0 * pi * t) * std::sin(2.0 * pi * x);
            return s;
        };
        mutants.push_back(std::move(p));
    }
    {
        ProblemSpec p = oscillating_problem();
        p.name = "mutant-sc-frequency";
        // cos(8 pi x) -> cos(6 pi x) inside the diffusion term of s_c
        p.source_c = [](double x, double t) {
            const double den = detail::oscillating_denom(x, t);
            return detail::oscillating_source_c(x, t) +
                   8.0 * 16.0 * t * (std::cos(6.0 * pi * x) - std::cos(8.0 * pi * x)) / den;
        };
        mutants.push_back(std::move(p));
    }
    {
        ProblemSpec p = oscillating_problem();
        p.name = "mutant-su1-sign";
        // sign flip on the third term of s_u1
        p.source_u = [](double x, double t) {
            Vec2 s = detail::oscillating_source_u(x, t);
            const double st = std::sin(2.0 * pi * t);
            const double den = detail::oscillating_denom(x, t);
            s.x -= 2.0 * 8.0 * std::cos(2.0 * pi * x) * (-2.0 + st) * (-2.0 + st) * (2.0 + st) /
                   (den * den);
            return s;
        };
        mutants.push_back(std::move(p));
    }
    return mutants;
}

// Independent assembly of the spatially discrete weak form tested with every
// nodal hat function: integrate, segment by segment and in closed form,
//   int I_h(v . phi_j) |u_hx| dx + int (u_hx/|u_hx|) . phi_jx dx
//     - int I_h(f(c_h) phi_j) . u_hx^perp dx
// with v = nodal_velocities. Agreement with zero certifies that the node
// equations behind nodal_velocities assemble the weak form correctly.
struct CrosscheckReport {
    double max_abs_discrepancy = 0.0;
    double scale = 0.0;
};

inline CrosscheckReport weak_form_residuals(const DiscreteCurve& curve, const SurfaceField& field,
                                            const std::function<double(double)>& f,
                                            std::span<const Vec2> v) {
    const PolygonGeometry geom = compute_geometry(curve);
    const std::size_t n = geom.size();
    const PeriodicMesh& mesh = *curve.mesh;

    // integral over one segment of an affine scalar with endpoint values (a,b)
    const auto affine_int = [](double a, double b, double h) { return 0.5 * h * (a + b); };

    CrosscheckReport report;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        const std::size_t jp = (j + n - 1) % n;
        const double hj = mesh.seg_len(static_cast<std::ptrdiff_t>(j));
        const double hn = mesh.seg_len(static_cast<std::ptrdiff_t>(jn));

        // mass: I_h(v . phi_j) rises 0 -> v_j on segment j, falls v_j -> 0 on
        // segment j+1; |u_hx| is q/h per segment.
        Vec2 mass = (geom.q[j] / hj) * Vec2{affine_int(0.0, v[j].x, hj), affine_int(0.0, v[j].y, hj)};
        mass += (geom.q[jn] / hn) *
                Vec2{affine_int(v[j].x, 0.0, hn), affine_int(v[j].y, 0.0, hn)};

        // stiffness: tau is constant per segment, phi_jx = 1/h_j and -1/h_{j+1}
        const Vec2 stiff = geom.tau[j] * (1.0 / hj) * hj - geom.tau[jn] * (1.0 / hn) * hn;

        // forcing: I_h(f(c_h) phi_j) rises 0 -> f(c_j), falls back to 0;
        // u_hx^perp is constant per segment.
        const double fj = f(field.values[j]);
        const Vec2 uhx_j = (curve.positions[j] - curve.positions[jp]) / hj;
        const Vec2 uhx_n = (curve.positions[jn] - curve.positions[j]) / hn;
        const Vec2 rhs = affine_int(0.0, fj, hj) * perp(uhx_j) + affine_int(fj, 0.0, hn) * perp(uhx_n);

        const Vec2 residual = mass + stiff - rhs;
        report.max_abs_discrepancy = std::max(report.max_abs_discrepancy, norm(residual));
        report.scale = std::max({report.scale, norm(mass), norm(stiff), norm(rhs)});
    }
    return report;
}

inline CrosscheckReport weak_form_crosscheck(const DiscreteCurve& curve, const SurfaceField& field,
                                             const std::function<double(double)>& f) {
    const PolygonGeometry geom = compute_geometry(curve);
    const std::vector<Vec2> v = nodal_velocities(geom, forcing_vectors(geom, field, f));
    return weak_form_residuals(curve, field, f, v);
}

// Structural checks on the two per-step matrices at a given state.
struct StepSystemAudit {
    bool symmetry_ok = false;
    bool position_spd_ok = false;
    bool field_spd_ok = false;
    bool position_diag_dominant = false;
    double min_position_quadform = 0.0;
    double min_field_quadform = 0.0;

    bool all_ok() const {
        return symmetry_ok && position_spd_ok && field_spd_ok && position_diag_dominant;
    }
};

inline StepSystemAudit audit_step_systems(const SimState& state, const SolverConfig& config,
                                          unsigned seed = 2024, int probes = 50) {
    const CyclicTridiagonal pos = assemble_position_matrix(state.geom, config.dt);
    const CyclicTridiagonal fld = assemble_field_matrix(state.geom, config.dt);
    const std::size_t n = pos.size();

    StepSystemAudit audit;

    // symmetry: e_i . (A e_j) must equal e_j . (A e_i) exactly
    audit.symmetry_ok = true;
    std::vector<double> ei(n, 0.0), ej(n, 0.0);
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 8); ++i) {
        const std::size_t jn = (i + 1) % n;
        ei[i] = 1.0;
        ej[jn] = 1.0;
        for (const auto* a : {&pos, &fld}) {
            const std::vector<double> aei = matvec(*a, ei);
            const std::vector<double> aej = matvec(*a, ej);
            if (aei[jn] != aej[i]) audit.symmetry_ok = false;
        }
        ei[i] = 0.0;
        ej[jn] = 0.0;
    }

    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    audit.min_position_quadform = audit.min_field_quadform = std::numeric_limits<double>::max();
    std::vector<double> v(n);
    for (int p = 0; p < probes; ++p) {
        double len = 0.0;
        for (auto& vi : v) {
            vi = gauss(rng);
            len += vi * vi;
        }
        len = std::sqrt(len);
        for (auto& vi : v) vi /= len;
        audit.min_position_quadform = std::min(audit.min_position_quadform, quadratic_form(pos, v));
        audit.min_field_quadform = std::min(audit.min_field_quadform, quadratic_form(fld, v));
    }
    audit.position_spd_ok = audit.min_position_quadform > 0.0;
    audit.field_spd_ok = audit.min_field_quadform > 0.0;

    audit.position_diag_dominant = true;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t ip = (i + n - 1) % n;
        if (!(pos.diag[i] > std::abs(pos.off[i]) + std::abs(pos.off[ip])))
            audit.position_diag_dominant = false;
    }
    return audit;
}

} // namespace csf
