#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "csf/validation.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace csf;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("residual oracle passes on the oscillating problem") {
    const ResidualReport r = pde_residual_check(oscillating_problem(), 200, 12345);
    CHECK(r.max_rel_residual_geo <= 1e-6);
    CHECK(r.max_rel_residual_field <= 1e-6);
    CHECK(r.samples == 200);
}

TEST_CASE("residual oracle on a stationary circle") {
    // clockwise unit circle (outward normal), c = 1, f(c) = 2c-1: curvature
    // and forcing cancel exactly
    ProblemSpec p;
    p.name = "stationary-circle";
    p.forcing = [](double c) { return 2.0 * c - 1.0; };
    p.source_u = [](double, double) { return Vec2{0.0, 0.0}; };
    p.source_c = [](double, double) { return 0.0; };
    p.initial_position = [](double x) { return Vec2{std::cos(2.0 * pi * x), -std::sin(2.0 * pi * x)}; };
    p.initial_field = [](double) { return 1.0; };
    p.t_max = 1.0;
    ExactSolution ex;
    ex.u = [](double x, double) { return Vec2{std::cos(2.0 * pi * x), -std::sin(2.0 * pi * x)}; };
    ex.u_t = [](double, double) { return Vec2{0.0, 0.0}; };
    ex.u_x = [](double x, double) {
        return Vec2{-2.0 * pi * std::sin(2.0 * pi * x), -2.0 * pi * std::cos(2.0 * pi * x)};
    };
    ex.c = [](double, double) { return 1.0; };
    ex.c_x = [](double, double) { return 0.0; };
    p.exact = ex;

    const ResidualReport r = pde_residual_check(p, 100, 7);
    CHECK(r.max_rel_residual_geo <= 1e-10);
    CHECK(r.max_rel_residual_field <= 1e-10);
}

TEST_CASE("every source mutant trips the oracle") {
    const auto mutants = oscillating_source_mutants();
    REQUIRE(mutants.size() == 5);
    for (const ProblemSpec& m : mutants) {
        const ResidualReport r = pde_residual_check(m, 200, 12345);
        INFO(m.name);
        CHECK(std::max(r.max_rel_residual_geo, r.max_rel_residual_field) > 1e-2);
    }
}

TEST_CASE("oracle needs an exact solution") {
    CHECK_THROWS_AS((void)pde_residual_check(radial_problem(), 10, 1), MissingExactSolutionError);
}

TEST_CASE("weak form crosscheck on random polygons") {
    std::mt19937 rng(29);
    const std::function<double(double)> f = [](double c) { return 2.0 * c; };
    for (int trial = 0; trial < 100; ++trial) {
        const PeriodicMesh mesh = PeriodicMesh::uniform(21);
        const DiscreteCurve poly = oracles::random_polygon(mesh, rng);
        const SurfaceField c = oracles::random_field(mesh, rng);
        const CrosscheckReport rep = weak_form_crosscheck(poly, c, f);
        CHECK(rep.max_abs_discrepancy <= 1e-12 * rep.scale);
    }
}

TEST_CASE("weak form crosscheck on a regular polygon without forcing") {
    const PeriodicMesh mesh = PeriodicMesh::uniform(24);
    const DiscreteCurve poly = oracles::regular_polygon(mesh, 1.0);
    const SurfaceField c{&mesh, std::vector<double>(24, 0.0)};
    const CrosscheckReport rep = weak_form_crosscheck(poly, c, [](double) { return 0.0; });
    CHECK(rep.max_abs_discrepancy <= 1e-14 * std::max(rep.scale, 1.0));
}

TEST_CASE("perturbed mass coefficient is detected (negative control)") {
    std::mt19937 rng(31);
    const PeriodicMesh mesh = PeriodicMesh::uniform(21);
    const DiscreteCurve poly = oracles::random_polygon(mesh, rng);
    const SurfaceField c = oracles::random_field(mesh, rng);
    const std::function<double(double)> f = [](double x) { return 2.0 * x; };

    const PolygonGeometry g = compute_geometry(poly);
    const auto r = forcing_vectors(g, c, f);
    std::vector<Vec2> v(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const std::size_t jn = (j + 1) % g.size();
        // mass weight (q_j + q_{j+1})/2 inflated by 1%
        v[j] = r[j] - (2.0 / (1.01 * (g.q[j] + g.q[jn]))) * (g.tau[j] - g.tau[jn]);
    }
    const CrosscheckReport rep = weak_form_residuals(poly, c, f, v);
    CHECK(rep.max_abs_discrepancy > 1e-4 * rep.scale);
}

TEST_CASE("step-system audit on a radial state") {
    const ProblemSpec p = radial_problem();
    const SolverConfig cfg{50, 1e-4, 3.0, default_tol(50)};
    const SimState s = initialize(p, cfg);
    const StepSystemAudit audit = audit_step_systems(s, cfg);
    CHECK(audit.symmetry_ok);
    CHECK(audit.position_spd_ok);
    CHECK(audit.field_spd_ok);
    CHECK(audit.position_diag_dominant);
    CHECK(audit.all_ok());
    CHECK(audit.min_position_quadform > 0.0);
    CHECK(audit.min_field_quadform > 0.0);
}

TEST_CASE("position matrix row sums equal the mass term") {
    std::mt19937 rng(37);
    const PeriodicMesh mesh = PeriodicMesh::uniform(18);
    const PolygonGeometry g = compute_geometry(oracles::random_polygon(mesh, rng));
    const double dt = 1e-3;
    const CyclicTridiagonal a = assemble_position_matrix(g, dt);
    const auto row_sums = matvec(a, std::vector<double>(18, 1.0));
    for (std::size_t i = 0; i < 18; ++i) {
        const std::size_t in = (i + 1) % 18;
        const double mass = (g.q[i] + g.q[in]) / (2.0 * dt);
        CHECK(row_sums[i] == doctest::Approx(mass).epsilon(1e-12));
    }
}

TEST_CASE("field matrix reduces to pure stiffness as dt grows") {
    std::mt19937 rng(41);
    const PeriodicMesh mesh = PeriodicMesh::uniform(18);
    const PolygonGeometry g = compute_geometry(oracles::random_polygon(mesh, rng));
    const CyclicTridiagonal a = assemble_field_matrix(g, 1e12);
    double qinv_max = 0.0;
    for (double q : g.q) qinv_max = std::max(qinv_max, 1.0 / q);
    // stiffness annihilates constants; only the vanishing mass part remains
    for (double s : matvec(a, std::vector<double>(18, 1.0))) CHECK(std::abs(s) <= 1e-11 * qinv_max);
}

TEST_CASE("audit detects position systems within a live run") {
    const ProblemSpec p = radial_problem();
    const SolverConfig cfg{40, 1e-4, 0.01, default_tol(40)};
    bool all_ok = true;
    (void)run(p, cfg, StepObserver([&](const SimState& s) {
                  if (s.step % 50 == 0) all_ok = all_ok && audit_step_systems(s, cfg).all_ok();
              }));
    CHECK(all_ok);
}
