#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <vector>

#include "csf/analysis.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace csf;

namespace {
constexpr double pi = std::numbers::pi;

// least-squares slope of log(err) against log(res)
double loglog_slope(std::span<const double> err, std::span<const double> res) {
    const double n = static_cast<double>(err.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double x = std::log(res[i]);
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// state holding the nodal interpolant of the exact solution at time t
SimState interpolated_state(const ProblemSpec& p, int n, double t) {
    auto mesh = std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(n));
    SimState s;
    s.mesh = mesh;
    s.t = t;
    s.curve = DiscreteCurve{mesh.get(),
                            interpolate_nodal([&](double x) { return p.exact->u(x, t); }, *mesh)};
    s.field = SurfaceField{mesh.get(),
                           interpolate_nodal([&](double x) { return p.exact->c(x, t); }, *mesh)};
    s.geom = compute_geometry(s.curve);
    return s;
}

} // namespace

TEST_CASE("eoc basics") {
    const std::vector<double> e2{1.0, 0.25};
    const std::vector<double> s2{1.0, 0.5};
    CHECK(std::abs(eoc(e2, s2)[0] - 2.0) < 1e-12);

    const std::vector<double> flat{1.0, 1.0};
    CHECK(std::abs(eoc(flat, s2)[0]) < 1e-12);

    // reference pair from the spatial error table
    const std::vector<double> e1{1.2912950e-1, 0.0228319e-1};
    const std::vector<double> h{1.0 / 21.0, 1.0 / 61.0};
    CHECK(eoc(e1, h)[0] == doctest::Approx(3.78).epsilon(0.005));
}

TEST_CASE("eoc rejects bad input") {
    const std::vector<double> one{1.0};
    const std::vector<double> pos{1.0, 0.5};
    const std::vector<double> zero{1.0, 0.0};
    const std::vector<double> up{0.5, 1.0};
    CHECK_THROWS_AS((void)eoc(one, one), ConfigError);
    CHECK_THROWS_AS((void)eoc(zero, pos), ConfigError);
    CHECK_THROWS_AS((void)eoc(pos, up), ConfigError);
    const std::vector<double> same{1.0, 1.0};
    CHECK_THROWS_AS((void)eoc(pos, same), ConfigError);
}

TEST_CASE("snapshot errors vanish when the exact solution is the interpolant itself") {
    // exact bundle that IS piecewise linear on the n=8 mesh
    const int n = 8;
    auto mesh = std::make_shared<const PeriodicMesh>(PeriodicMesh::uniform(n));
    std::mt19937 rng(19);
    DiscreteCurve curve = oracles::random_polygon(*mesh, rng);
    SurfaceField field = oracles::random_field(*mesh, rng);

    // on the uniform mesh, segment j covers [j/n, (j+1)/n); theta is the local coordinate
    const auto locate = [n](double x) {
        const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(n - 1),
                                                    static_cast<std::size_t>(std::floor(x * n)));
        return std::pair<std::size_t, double>{j, x * n - static_cast<double>(j)};
    };
    ExactSolution ex;
    ex.u = [&curve, locate](double x, double) {
        const auto [j, th] = locate(x);
        const std::size_t jp = (j + curve.positions.size() - 1) % curve.positions.size();
        return curve.positions[jp] + th * (curve.positions[j] - curve.positions[jp]);
    };
    ex.u_x = [&curve, locate, mesh](double x, double) {
        const auto [j, th] = locate(x);
        const std::size_t jp = (j + curve.positions.size() - 1) % curve.positions.size();
        return (curve.positions[j] - curve.positions[jp]) / mesh->seg_len(static_cast<std::ptrdiff_t>(j));
    };
    ex.u_t = [](double, double) { return Vec2{0.0, 0.0}; };
    ex.c = [&field, locate](double x, double) {
        const auto [j, th] = locate(x);
        const std::size_t jp = (j + field.values.size() - 1) % field.values.size();
        return field.values[jp] + th * (field.values[j] - field.values[jp]);
    };
    ex.c_x = [&field, locate, mesh](double x, double) {
        const auto [j, th] = locate(x);
        const std::size_t jp = (j + field.values.size() - 1) % field.values.size();
        return (field.values[j] - field.values[jp]) / mesh->seg_len(static_cast<std::ptrdiff_t>(j));
    };

    SimState s;
    s.mesh = mesh;
    s.curve = curve;
    s.field = field;
    s.geom = compute_geometry(curve);
    // gauss points are interior, which keeps the piecewise definitions single-valued
    const SnapshotErrors snap = snapshot_errors(s, ex, 4, ErrorQuadrature::gauss);
    CHECK(std::abs(snap.e1) < 1e-14);
    CHECK(std::abs(snap.e2) < 1e-14);
    CHECK(std::abs(snap.e3) < 1e-14);
}

TEST_CASE("interpolants of the smooth solution converge at the expected rates") {
    const ProblemSpec p = oscillating_problem();
    std::vector<double> e1s, e2s, e3s, hs;
    for (int n : {32, 64, 128}) {
        const SimState s = interpolated_state(p, n, 0.3);
        const SnapshotErrors snap = snapshot_errors(s, *p.exact, 5);
        e1s.push_back(snap.e1);
        e2s.push_back(snap.e2);
        e3s.push_back(snap.e3);
        hs.push_back(1.0 / n);
    }
    CHECK(loglog_slope(e1s, hs) >= 3.8); // squared L2 value error: order 4
    CHECK(loglog_slope(e2s, hs) >= 1.8); // squared tangent error: order 2
    CHECK(loglog_slope(e3s, hs) >= 1.8); // squared length-element error: order 2
}

TEST_CASE("optional H1 position error") {
    const ProblemSpec p = oscillating_problem();
    // interpolants: squared H1 error decays at order 2
    std::vector<double> e6s, hs;
    for (int n : {32, 64, 128}) {
        const SimState s = interpolated_state(p, n, 0.3);
        const ErrorIntegrator integ(*s.mesh, *p.exact, 5);
        e6s.push_back(integ.h1_snapshot(s));
        hs.push_back(1.0 / n);
    }
    CHECK(loglog_slope(e6s, hs) >= 1.8);

    // off by default, populated on request
    const int n = 21;
    const SolverConfig cfg{n, 1.0 / (n * n), 0.1, default_tol(n)};
    const ErrorReport without = measure_run_errors(p, cfg);
    CHECK_FALSE(without.e6.has_value());
    const ErrorReport with = measure_run_errors(p, cfg, 5, true);
    REQUIRE(with.e6.has_value());
    CHECK(*with.e6 > 0.0);
    CHECK(*with.e6 >= with.e[1]); // H1 content dominates the tangent error here
}

TEST_CASE("sup-type errors grow with the recorded window") {
    const ProblemSpec p = oscillating_problem();
    const int n = 21;
    const SolverConfig half{n, 1.0 / (n * n), 0.5, default_tol(n)};
    const SolverConfig full{n, 1.0 / (n * n), 1.0, default_tol(n)};
    const ErrorReport rh = measure_run_errors(p, half);
    const ErrorReport rf = measure_run_errors(p, full);
    for (int q = 0; q < 3; ++q) CHECK(rf.e[static_cast<std::size_t>(q)] >= rh.e[static_cast<std::size_t>(q)]);
    // the time-summed errors strictly accumulate
    CHECK(rf.e[3] > rh.e[3]);
    CHECK(rf.e[4] > rh.e[4]);
}

TEST_CASE("missing exact solution is rejected") {
    const SolverConfig cfg{16, 1e-3, 0.1, default_tol(16)};
    CHECK_THROWS_AS((void)measure_run_errors(radial_problem(), cfg), MissingExactSolutionError);
}

TEST_CASE("space study: single node count leaves EOCs unpopulated") {
    const std::vector<int> ns{21};
    const ConvergenceTable t = convergence_study_space(oscillating_problem(), ns);
    REQUIRE(t.rows.size() == 1);
    CHECK_FALSE(t.rows[0].has_eoc);
    CHECK(t.rows[0].label == 21);
    CHECK(t.rows[0].delta == doctest::Approx(1.0 / 441.0));
}

TEST_CASE("study drivers validate their resolution lists") {
    const std::vector<int> bad{61, 21};
    CHECK_THROWS_AS((void)convergence_study_space(oscillating_problem(), bad), ConfigError);
    const std::vector<double> same{0.02, 0.02};
    CHECK_THROWS_AS((void)convergence_study_time(oscillating_problem(), 21, same), ConfigError);
    const std::vector<int> none{};
    CHECK_THROWS_AS((void)convergence_study_space(oscillating_problem(), none), ConfigError);
}

TEST_CASE("csv output is deterministic and round-trip exact") {
    ConvergenceTable t;
    t.mode = ConvergenceTable::Mode::space;
    t.rows.push_back({21, 1.0 / 441.0, {0.1291295, 0.0208142, 1.15896, 0.08047392, 25.488}, {}, false});
    t.rows.push_back({61, 1.0 / 3721.0,
                      {1.0 / 3.0, 2.0 / 7.0, 0.123456789012345678, 1e-300, 5.0},
                      {3.78, 2.32, 3.15, 3.84, 2.23},
                      true});
    std::ostringstream a, b;
    write_csv(t, a);
    write_csv(t, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, 54) == "N,delta,E1,E2,E3,E4,E5,eoc1,eoc2,eoc3,eoc4,eoc5\n21,0.0");

    // first row has empty eoc cells
    std::istringstream in(a.str());
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(row1.substr(row1.size() - 5) == ",,,,,");

    // every numeric field round-trips exactly through the 17-digit format
    const auto check_roundtrip = [](const std::string& row, const ConvergenceRow& ref) {
        std::istringstream cells(row);
        std::string cell;
        std::getline(cells, cell, ','); // label
        std::getline(cells, cell, ',');
        CHECK(std::strtod(cell.c_str(), nullptr) == ref.delta);
        for (double e : ref.err) {
            std::getline(cells, cell, ',');
            CHECK(std::strtod(cell.c_str(), nullptr) == e);
        }
        if (ref.has_eoc)
            for (double o : ref.eoc) {
                std::getline(cells, cell, ',');
                CHECK(std::strtod(cell.c_str(), nullptr) == o);
            }
    };
    check_roundtrip(row1, t.rows[0]);
    check_roundtrip(row2, t.rows[1]);
}

TEST_CASE("time-mode csv header and labels") {
    ConvergenceTable t;
    t.mode = ConvergenceTable::Mode::time;
    t.rows.push_back({0, 0.02, {1, 1, 1, 1, 1}, {}, false});
    std::ostringstream os;
    write_csv(t, os);
    CHECK(os.str().rfind("m,delta,E1", 0) == 0);
}

TEST_CASE("gauss and trapezoid sampling agree where both are accurate") {
    // on a fine mesh both rules resolve the smooth integrands; the h^2-order
    // derivative errors keep a fixed 9/8 trapezoid-vs-gauss signature
    const ProblemSpec p = oscillating_problem();
    const SimState s = interpolated_state(p, 96, 0.3);
    const SnapshotErrors trap = snapshot_errors(s, *p.exact, 5, ErrorQuadrature::trapezoid);
    const SnapshotErrors gauss = snapshot_errors(s, *p.exact, 5, ErrorQuadrature::gauss);
    CHECK(trap.e1 == doctest::Approx(gauss.e1).epsilon(0.02));
    CHECK(trap.e2 == doctest::Approx(gauss.e2 * 9.0 / 8.0).epsilon(0.02));
    CHECK(trap.e3 == doctest::Approx(gauss.e3 * 9.0 / 8.0).epsilon(0.02));
}
