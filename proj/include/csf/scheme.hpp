#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "csf/cyclic_tridiagonal.hpp"
#include "csf/errors.hpp"
#include "csf/geometry.hpp"
#include "csf/mesh.hpp"
#include "csf/problems.hpp"

namespace csf {

// Run parameters of the semi-implicit stepper.
struct SolverConfig {
    int n = 0;        // node count
    double dt = 0.0;  // time step
    double t_max = 0.0;
    double tol = 0.0; // abort when any segment length drops below tol

    long steps() const { return std::lround(t_max / dt); }

    void validate() const {
        if (n < 3) throw ConfigError("SolverConfig: need n >= 3");
        if (!(dt > 0.0)) throw ConfigError("SolverConfig: dt must be positive");
        if (!(tol > 0.0)) throw ConfigError("SolverConfig: tol must be positive");
        if (steps() < 1) throw ConfigError("SolverConfig: t_max must cover at least one step");
    }
};

// Abort only on near-collapse; never fires in the shipped experiments.
inline double default_tol(int n) { return 1e-3 / static_cast<double>(n); }

// Solver state after step m (time t = m * dt). geom is always consistent
// with curve.
struct SimState {
    long step = 0;
    double t = 0.0;
    std::shared_ptr<const PeriodicMesh> mesh;
    DiscreteCurve curve;
    SurfaceField field;
    PolygonGeometry geom;

    double min_q() const { return *std::min_element(geom.q.begin(), geom.q.end()); }
};

enum class RunStatus {
    completed, // all steps taken
    tol_abort  // a segment length fell below tol before the final step
};

struct RunResult {
    RunStatus status = RunStatus::completed;
    long completed_steps = 0;
    SimState state; // state at the last completed step
};

// Called after initialization (step 0) and after every completed step.
using StepObserver = std::function<void(const SimState&)>;

namespace detail {

inline SimState build_initial_state(const ProblemSpec& problem, const SolverConfig& config) {
    auto mesh = std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(config.n));
    SimState s;
    s.mesh = mesh;
    s.curve = DiscreteCurve{mesh.get(), interpolate_nodal(problem.initial_position, *mesh)};
    s.field = SurfaceField{mesh.get(), interpolate_nodal(problem.initial_field, *mesh)};
    s.geom = compute_geometry(s.curve);
    return s;
}

} // namespace detail

// Nodal interpolation of the initial data, with the degenerate-curve guard.
inline SimState initialize(const ProblemSpec& problem, const SolverConfig& config) {
    config.validate();
    SimState s = detail::build_initial_state(problem, config);
    if (s.min_q() < config.tol)
        throw DegenerateCurveError("initialize: initial polygon has a segment shorter than tol");
    return s;
}

// Position-step matrix, row i (all q at the previous step):
//   [ (q_i + q_{i+1})/(2 dt) + 1/q_i + 1/q_{i+1} ] u_i
//   - (1/q_i) u_{i-1} - (1/q_{i+1}) u_{i+1}
// The same scalar matrix acts on both coordinates. Strictly diagonally
// dominant, symmetric positive definite.
inline CyclicTridiagonal assemble_position_matrix(const PolygonGeometry& geom, double dt) {
    const std::size_t n = geom.size();
    CyclicTridiagonal a;
    a.diag.resize(n);
    a.off.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = (i + 1) % n;
        a.diag[i] = (geom.q[i] + geom.q[in]) / (2.0 * dt) + 1.0 / geom.q[i] + 1.0 / geom.q[in];
        a.off[i] = -1.0 / geom.q[in];
    }
    return a;
}

// Position-step right-hand sides (x and y components):
//   (q_i + q_{i+1})/2 * ( u_i/dt + s_u(x_i, t_new) )
//   + f(c_i)/2 * perp(u_{i+1} - u_{i-1})
inline std::array<std::vector<double>, 2> assemble_position_rhs(const SimState& s, double dt,
                                                                double t_new,
                                                                const ProblemSpec& problem) {
    const std::size_t n = s.geom.size();
    std::array<std::vector<double>, 2> rhs{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t in = (i + 1) % n;
        const std::size_t ip = (i + n - 1) % n;
        const double w = 0.5 * (s.geom.q[i] + s.geom.q[in]);
        const Vec2 su = problem.source_u(s.mesh->node(static_cast<std::ptrdiff_t>(i)), t_new);
        const double fc = problem.eval_forcing(s.field.values[i]);
        const Vec2 v = w * (s.curve.positions[i] / dt + su) +
                       0.5 * fc * perp(s.curve.positions[in] - s.curve.positions[ip]);
        rhs[0][i] = v.x;
        rhs[1][i] = v.y;
    }
    return rhs;
}

// One position step: solve the scalar system once per coordinate with a
// shared factorization, then rebuild the segment geometry.
inline DiscreteCurve position_step(const SimState& s, const SolverConfig& config,
                                   const ProblemSpec& problem) {
    const double t_new = s.t + config.dt;
    const CyclicTridiagonal a = assemble_position_matrix(s.geom, config.dt);
    const auto rhs = assemble_position_rhs(s, config.dt, t_new, problem);
    const CyclicSolver solver(a);
    const std::vector<double> ux = solver.solve(rhs[0]);
    const std::vector<double> uy = solver.solve(rhs[1]);
    DiscreteCurve next{s.curve.mesh, std::vector<Vec2>(s.geom.size())};
    for (std::size_t i = 0; i < next.positions.size(); ++i) next.positions[i] = {ux[i], uy[i]};
    return next;
}

// Field-step matrix, built from the new segment lengths. Row j:
//   [ (q_j + q_{j+1})/(3 dt) + 1/q_j + 1/q_{j+1} ] c_j
//   + [ q_{j+1}/(6 dt) - 1/q_{j+1} ] c_{j+1}
//   + [ q_j/(6 dt) - 1/q_j ] c_{j-1}
// (consistent 1/3-1/6 mass matrix plus stiffness; symmetric positive definite).
inline CyclicTridiagonal assemble_field_matrix(const PolygonGeometry& geom_new, double dt) {
    const std::size_t n = geom_new.size();
    CyclicTridiagonal a;
    a.diag.resize(n);
    a.off.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        a.diag[j] = (geom_new.q[j] + geom_new.q[jn]) / (3.0 * dt) + 1.0 / geom_new.q[j] +
                    1.0 / geom_new.q[jn];
        a.off[j] = geom_new.q[jn] / (6.0 * dt) - 1.0 / geom_new.q[jn];
    }
    return a;
}

// Field-step right-hand side; the mass weights use the old segment lengths:
//   (q_j + q_{j+1})/(3 dt) * ( c_j + dt s_c(x_j, t_new) )
//   + q_{j+1}/(6 dt) * ( c_{j+1} + dt s_c(x_{j+1}, t_new) )
//   + q_j/(6 dt) * ( c_{j-1} + dt s_c(x_{j-1}, t_new) )
inline std::vector<double> assemble_field_rhs(const PolygonGeometry& geom_old,
                                              const SurfaceField& field_old, double dt,
                                              double t_new, const ProblemSpec& problem) {
    const std::size_t n = geom_old.size();
    const PeriodicMesh& mesh = *field_old.mesh;
    std::vector<double> sc(n);
    for (std::size_t j = 0; j < n; ++j)
        sc[j] = problem.source_c(mesh.node(static_cast<std::ptrdiff_t>(j)), t_new);
    std::vector<double> rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jn = (j + 1) % n;
        const std::size_t jp = (j + n - 1) % n;
        rhs[j] = (geom_old.q[j] + geom_old.q[jn]) / (3.0 * dt) * (field_old.values[j] + dt * sc[j]) +
                 geom_old.q[jn] / (6.0 * dt) * (field_old.values[jn] + dt * sc[jn]) +
                 geom_old.q[j] / (6.0 * dt) * (field_old.values[jp] + dt * sc[jp]);
    }
    return rhs;
}

// One field step: old lengths weight the data side, new lengths the unknowns.
inline SurfaceField field_step(const PolygonGeometry& geom_old, const SurfaceField& field_old,
                               const PolygonGeometry& geom_new, double t_new,
                               const SolverConfig& config, const ProblemSpec& problem) {
    const CyclicTridiagonal a = assemble_field_matrix(geom_new, config.dt);
    const std::vector<double> rhs = assemble_field_rhs(geom_old, field_old, config.dt, t_new, problem);
    return SurfaceField{field_old.mesh, solve(a, rhs)};
}

// Full run: initialize, then M = round(t_max/dt) iterations of position step
// followed by field step. The run stops early (status tol_abort) when any
// segment length falls below tol before the final step; the offending state
// is still completed and reported. Observers see read-only snapshots.
inline RunResult run(const ProblemSpec& problem, const SolverConfig& config,
                     std::span<const StepObserver> observers = {}) {
    config.validate();
    const long m_total = config.steps();

    SimState s = detail::build_initial_state(problem, config);
    if (s.min_q() < config.tol)
        return RunResult{RunStatus::tol_abort, 0, std::move(s)};
    for (const auto& obs : observers) obs(s);

    for (long m = 0; m < m_total; ++m) {
        const double t_new = static_cast<double>(m + 1) * config.dt;

        DiscreteCurve curve_new = position_step(s, config, problem);
        PolygonGeometry geom_new = compute_geometry(curve_new);
        const bool collapsed =
            *std::min_element(geom_new.q.begin(), geom_new.q.end()) < config.tol;
        SurfaceField field_new;
        try {
            field_new = field_step(s.geom, s.field, geom_new, t_new, config, problem);
        } catch (const SingularSystemError&) {
            // A collapse can overshoot tol so far within one position step
            // that the field system is numerically singular. The guard has
            // already fired then; report the last consistent state.
            if (!collapsed) throw;
            return RunResult{RunStatus::tol_abort, m, std::move(s)};
        }

        s.step = m + 1;
        s.t = t_new;
        s.curve = std::move(curve_new);
        s.geom = std::move(geom_new);
        s.field = std::move(field_new);
        for (const auto& obs : observers) obs(s);

        if (s.min_q() < config.tol && m + 1 < m_total)
            return RunResult{RunStatus::tol_abort, m + 1, std::move(s)};
    }
    return RunResult{RunStatus::completed, m_total, std::move(s)};
}

inline RunResult run(const ProblemSpec& problem, const SolverConfig& config,
                     const StepObserver& observer) {
    const StepObserver obs[1] = {observer};
    return run(problem, config, std::span<const StepObserver>(obs, 1));
}

} // namespace csf
