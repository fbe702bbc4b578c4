#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "csf/errors.hpp"
#include "csf/quadrature.hpp"
#include "csf/scheme.hpp"

namespace csf {

// Error norms of one run against the exact solution:
//   e1 = sup_m  int |c - c_h|^2 dx
//   e2 = sup_m  int |tau - tau_h|^2 dx
//   e3 = sup_m  int (|u_x| - |u_hx|)^2 dx
//   e4 = sum_m dt int |u_t(t_{m+1}) - (u^{m+1} - u^m)/dt|^2 dx
//   e5 = sum_m dt int |c_x(t_{m+1}) - c_hx^{m+1}|^2 dx
//   e6 (optional) = sup_m int (|u - u_h|^2 + |u_x - u_hx|^2) dx
// The sups run over all recorded steps m = 0..M, the sums over m = 0..M-1.
struct ErrorReport {
    std::array<double, 5> e{}; // e[0] = e1, ..., e[4] = e5
    std::optional<double> e6;
    int n = 0;
    double dt = 0.0;
    double t_max = 0.0;
    std::string problem;
};

struct SnapshotErrors {
    double e1 = 0.0;
    double e2 = 0.0;
    double e3 = 0.0;
};

// Sampling rule for the error integrals. The trapezoid rule uses quad_pts
// uniformly spaced points per segment including both endpoints; it is the
// rule the reference error tables were produced with, so it is the default.
// Gauss-Legendre is available where near-exact integration is wanted instead.
enum class ErrorQuadrature { trapezoid, gauss };

// Per-segment quadrature of the error integrands. Quadrature points in
// parameter space are fixed by the mesh, so they are precomputed once and
// reused across every step of a run.
class ErrorIntegrator {
public:
    ErrorIntegrator(const PeriodicMesh& mesh, const ExactSolution& exact, int quad_pts,
                    ErrorQuadrature rule = ErrorQuadrature::trapezoid)
        : mesh_(&mesh), exact_(&exact) {
        if (rule == ErrorQuadrature::gauss) {
            const GaussLegendre gauss(quad_pts);
            theta_.resize(gauss.size());
            w_.resize(gauss.size());
            for (std::size_t k = 0; k < gauss.size(); ++k) {
                theta_[k] = 0.5 * (gauss.node(k) + 1.0);
                w_[k] = 0.5 * gauss.weight(k);
            }
        } else {
            if (quad_pts < 2) throw ConfigError("ErrorIntegrator: trapezoid rule needs >= 2 points");
            const std::size_t p = static_cast<std::size_t>(quad_pts);
            theta_.resize(p);
            w_.resize(p);
            for (std::size_t k = 0; k < p; ++k) {
                theta_[k] = static_cast<double>(k) / static_cast<double>(p - 1);
                w_[k] = (k == 0 || k + 1 == p) ? 0.5 / static_cast<double>(p - 1)
                                               : 1.0 / static_cast<double>(p - 1);
            }
        }
        const std::size_t n = mesh.size();
        const std::size_t p = theta_.size();
        xq_.resize(n * p);
        for (std::size_t j = 0; j < n; ++j) {
            const double h = mesh.seg_len(static_cast<std::ptrdiff_t>(j));
            const double left = mesh.node(static_cast<std::ptrdiff_t>(j)) - h;
            for (std::size_t k = 0; k < p; ++k) xq_[j * p + k] = wrap_unit(left + theta_[k] * h);
        }
    }

    SnapshotErrors snapshot(const SimState& s) const {
        const std::size_t n = mesh_->size();
        const std::size_t p = theta_.size();
        SnapshotErrors out;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t jp = (j + n - 1) % n;
            const double h = mesh_->seg_len(static_cast<std::ptrdiff_t>(j));
            const double cl = s.field.values[jp];
            const double cr = s.field.values[j];
            const Vec2 tau_h = s.geom.tau[j];
            const double uhx = s.geom.q[j] / h;
            double a1 = 0.0, a2 = 0.0, a3 = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double x = xq_[j * p + k];
                const double ce = exact_->c(x, s.t);
                const Vec2 uxe = exact_->u_x(x, s.t);
                const double uxe_n = norm(uxe);
                const Vec2 tau_e = uxe / uxe_n;
                const double ch = cl + (cr - cl) * theta_[k];
                a1 += w_[k] * (ce - ch) * (ce - ch);
                a2 += w_[k] * norm2(tau_e - tau_h);
                a3 += w_[k] * (uxe_n - uhx) * (uxe_n - uhx);
            }
            out.e1 += h * a1;
            out.e2 += h * a2;
            out.e3 += h * a3;
        }
        return out;
    }

    // Contributions of one completed step to e4 and e5 (without the dt factor):
    // the difference quotient uses the previous positions, everything else the
    // new state.
    std::pair<double, double> step_terms(std::span<const Vec2> prev_positions, const SimState& s,
                                         double dt) const {
        const std::size_t n = mesh_->size();
        const std::size_t p = theta_.size();
        double t4 = 0.0, t5 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t jp = (j + n - 1) % n;
            const double h = mesh_->seg_len(static_cast<std::ptrdiff_t>(j));
            const Vec2 dql = (s.curve.positions[jp] - prev_positions[jp]) / dt;
            const Vec2 dqr = (s.curve.positions[j] - prev_positions[j]) / dt;
            const double chx = (s.field.values[j] - s.field.values[jp]) / h;
            double a4 = 0.0, a5 = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double x = xq_[j * p + k];
                const Vec2 ute = exact_->u_t(x, s.t);
                const double cxe = exact_->c_x(x, s.t);
                const Vec2 dq = dql + theta_[k] * (dqr - dql);
                a4 += w_[k] * norm2(ute - dq);
                a5 += w_[k] * (cxe - chx) * (cxe - chx);
            }
            t4 += h * a4;
            t5 += h * a5;
        }
        return {t4, t5};
    }

    // Squared H1 distance between the exact position and the interpolant.
    double h1_snapshot(const SimState& s) const {
        const std::size_t n = mesh_->size();
        const std::size_t p = theta_.size();
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t jp = (j + n - 1) % n;
            const double h = mesh_->seg_len(static_cast<std::ptrdiff_t>(j));
            const Vec2 ul = s.curve.positions[jp];
            const Vec2 ur = s.curve.positions[j];
            const Vec2 uhx = (ur - ul) / h;
            double a = 0.0;
            for (std::size_t k = 0; k < p; ++k) {
                const double x = xq_[j * p + k];
                const Vec2 ue = exact_->u(x, s.t);
                const Vec2 uxe = exact_->u_x(x, s.t);
                const Vec2 uh = ul + theta_[k] * (ur - ul);
                a += w_[k] * (norm2(ue - uh) + norm2(uxe - uhx));
            }
            sum += h * a;
        }
        return sum;
    }

private:
    const PeriodicMesh* mesh_;
    const ExactSolution* exact_;
    std::vector<double> theta_, w_, xq_;
};

// One-off snapshot of e1..e3 at the state's current time.
inline SnapshotErrors snapshot_errors(const SimState& s, const ExactSolution& exact, int quad_pts,
                                      ErrorQuadrature rule = ErrorQuadrature::trapezoid) {
    return ErrorIntegrator(*s.mesh, exact, quad_pts, rule).snapshot(s);
}

// Run the scheme and accumulate all error norms along the way.
inline ErrorReport measure_run_errors(const ProblemSpec& problem, const SolverConfig& config,
                                      int quad_pts = 5, bool with_h1 = false,
                                      ErrorQuadrature rule = ErrorQuadrature::trapezoid) {
    if (!problem.exact)
        throw MissingExactSolutionError("measure_run_errors: problem has no exact solution");
    config.validate();

    ErrorReport report;
    report.n = config.n;
    report.dt = config.dt;
    report.t_max = config.t_max;
    report.problem = problem.name;
    if (with_h1) report.e6 = 0.0;

    std::optional<ErrorIntegrator> integ;
    std::vector<Vec2> prev;
    const StepObserver observer = [&](const SimState& s) {
        if (!integ) integ.emplace(*s.mesh, *problem.exact, quad_pts, rule);
        const SnapshotErrors snap = integ->snapshot(s);
        report.e[0] = std::max(report.e[0], snap.e1);
        report.e[1] = std::max(report.e[1], snap.e2);
        report.e[2] = std::max(report.e[2], snap.e3);
        if (with_h1) report.e6 = std::max(*report.e6, integ->h1_snapshot(s));
        if (s.step > 0) {
            const auto [t4, t5] = integ->step_terms(prev, s, config.dt);
            report.e[3] += config.dt * t4;
            report.e[4] += config.dt * t5;
        }
        prev = s.curve.positions;
    };

    const RunResult result = run(problem, config, observer);
    if (result.status != RunStatus::completed)
        throw Error("measure_run_errors: run aborted on the segment-length guard");
    return report;
}

// Experimental orders of convergence: eoc_k = log(E_{k-1}/E_k) / log(s_{k-1}/s_k)
// for k = 1..len-1. Resolutions must decrease, errors must be positive.
inline std::vector<double> eoc(std::span<const double> errors, std::span<const double> resolutions) {
    if (errors.size() != resolutions.size() || errors.size() < 2)
        throw ConfigError("eoc: need equally sized lists with at least 2 entries");
    std::vector<double> out;
    out.reserve(errors.size() - 1);
    for (std::size_t k = 1; k < errors.size(); ++k) {
        if (!(errors[k] > 0.0) || !(errors[k - 1] > 0.0))
            throw ConfigError("eoc: errors must be positive");
        if (!(resolutions[k] < resolutions[k - 1]))
            throw ConfigError("eoc: resolutions must be strictly decreasing");
        out.push_back(std::log(errors[k - 1] / errors[k]) / std::log(resolutions[k - 1] / resolutions[k]));
    }
    return out;
}

struct ConvergenceRow {
    long label = 0; // N (space mode) or m (time mode)
    double delta = 0.0;
    std::array<double, 5> err{};
    std::array<double, 5> eoc{};
    bool has_eoc = false;
};

struct ConvergenceTable {
    enum class Mode { space, time };
    Mode mode = Mode::space;
    std::vector<ConvergenceRow> rows;
};

namespace detail {

inline int study_threads() {
    const char* env = std::getenv("CSF_STUDY_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return v > 1 ? v : 1;
}

template <class MakeReport>
inline std::vector<ErrorReport> run_study_rows(std::size_t count, MakeReport&& make) {
    std::vector<ErrorReport> reports(count);
    const int threads = study_threads();
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) reports[i] = make(i);
        return reports;
    }
    std::vector<std::future<ErrorReport>> futures(count);
    std::size_t next = 0;
    while (next < count) {
        const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(threads), count - next);
        for (std::size_t i = 0; i < batch; ++i)
            futures[next + i] = std::async(std::launch::async, make, next + i);
        for (std::size_t i = 0; i < batch; ++i) reports[next + i] = futures[next + i].get();
        next += batch;
    }
    return reports;
}

inline void attach_eocs(ConvergenceTable& table, std::span<const double> resolutions) {
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        for (int q = 0; q < 5; ++q) {
            const double pair_err[2] = {table.rows[i - 1].err[static_cast<std::size_t>(q)],
                                        table.rows[i].err[static_cast<std::size_t>(q)]};
            const double pair_res[2] = {resolutions[i - 1], resolutions[i]};
            table.rows[i].eoc[static_cast<std::size_t>(q)] = eoc(pair_err, pair_res)[0];
        }
        table.rows[i].has_eoc = true;
    }
}

} // namespace detail

// Spatial convergence sweep: for each node count N, run with dt = h^2
// (h = 1/N) up to the problem's final time; EOCs are taken against h.
inline ConvergenceTable convergence_study_space(const ProblemSpec& problem,
                                                std::span<const int> node_counts, int quad_pts = 5,
                                                ErrorQuadrature rule = ErrorQuadrature::trapezoid) {
    if (node_counts.empty()) throw ConfigError("convergence_study_space: empty node list");
    for (std::size_t i = 1; i < node_counts.size(); ++i)
        if (node_counts[i] <= node_counts[i - 1])
            throw ConfigError("convergence_study_space: node counts must increase");

    const auto reports = detail::run_study_rows(node_counts.size(), [&](std::size_t i) {
        const int n = node_counts[i];
        const double h = 1.0 / static_cast<double>(n);
        const SolverConfig config{n, h * h, problem.t_max, default_tol(n)};
        return measure_run_errors(problem, config, quad_pts, false, rule);
    });

    ConvergenceTable table;
    table.mode = ConvergenceTable::Mode::space;
    std::vector<double> hs;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const double h = 1.0 / static_cast<double>(node_counts[i]);
        table.rows.push_back({node_counts[i], reports[i].dt, reports[i].e, {}, false});
        hs.push_back(h);
    }
    detail::attach_eocs(table, hs);
    return table;
}

// Temporal convergence sweep at fixed N; EOCs are taken against dt. Row
// labels count from label_start (useful when dt = base * 2^-m).
inline ConvergenceTable convergence_study_time(const ProblemSpec& problem, int n,
                                               std::span<const double> deltas, int quad_pts = 5,
                                               long label_start = 0,
                                               ErrorQuadrature rule = ErrorQuadrature::trapezoid) {
    if (deltas.empty()) throw ConfigError("convergence_study_time: empty dt list");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw ConfigError("convergence_study_time: time steps must strictly decrease");

    const auto reports = detail::run_study_rows(deltas.size(), [&](std::size_t i) {
        const SolverConfig config{n, deltas[i], problem.t_max, default_tol(n)};
        return measure_run_errors(problem, config, quad_pts, false, rule);
    });

    ConvergenceTable table;
    table.mode = ConvergenceTable::Mode::time;
    for (std::size_t i = 0; i < reports.size(); ++i)
        table.rows.push_back({label_start + static_cast<long>(i), deltas[i], reports[i].e, {}, false});
    detail::attach_eocs(table, std::vector<double>(deltas.begin(), deltas.end()));
    return table;
}

// Round-trip exact formatting for CSV output.
inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const ConvergenceTable& table, std::ostream& os) {
    os << (table.mode == ConvergenceTable::Mode::space ? "N" : "m")
       << ",delta,E1,E2,E3,E4,E5,eoc1,eoc2,eoc3,eoc4,eoc5\n";
    for (const auto& row : table.rows) {
        os << row.label << ',' << fmt_double(row.delta);
        for (double e : row.err) os << ',' << fmt_double(e);
        for (double o : row.eoc) {
            os << ',';
            if (row.has_eoc) os << fmt_double(o);
        }
        os << '\n';
    }
}

} // namespace csf
